//! Event-level Monte Carlo engine.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::rng::{chain_rng, Regime};
use super::scenario::{ChannelKind, EnergySynthesis, PuModel, Scenario};
use crate::adaptive::Detector;
use crate::channel::{
    draw_channel, draw_noise_variance, gen_pu_samples, synthesize_received, ChannelDraw,
    EnergySampler, Hypothesis, NoiseModel,
};
use crate::error::{Error, Result};
use crate::sensing::{measure_energy, SensingReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    Conventional,
    Proposed,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Conventional => "conventional",
            Scheme::Proposed => "proposed",
        }
    }
}

/// Decision-positive rate of one scheme in one forced regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeRate {
    pub rate: f64,
    /// Three binomial standard deviations.
    pub ci_halfwidth: f64,
    pub hits: u64,
    pub trials: u64,
    pub warning: Option<String>,
}

impl RegimeRate {
    pub fn from_counts(hits: u64, trials: u64) -> Self {
        let n = trials.max(1) as f64;
        let rate = hits as f64 / n;
        let warning = if (hits as f64) < 5.0 || ((trials - hits) as f64) < 5.0 {
            Some(format!(
                "only {} of {trials} events on one side of the threshold; binomial CI is unreliable",
                hits.min(trials - hits)
            ))
        } else {
            None
        };
        RegimeRate {
            rate,
            ci_halfwidth: 3.0 * binomial_sd(rate, trials),
            hits,
            trials,
            warning,
        }
    }
}

/// `√(p(1−p)/n)` with `p` kept at least one event away from 0 and 1.
pub fn binomial_sd(p: f64, n: u64) -> f64 {
    let n = n.max(1) as f64;
    let p = p.clamp(1.0 / n, 1.0 - 1.0 / n);
    (p * (1.0 - p) / n).sqrt()
}

/// Both schemes scored on the same event stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedRates {
    pub conventional: RegimeRate,
    pub proposed: RegimeRate,
    /// Scored events on which the two schemes decided differently.
    pub disagreements: u64,
}

impl PairedRates {
    pub fn get(&self, scheme: Scheme) -> &RegimeRate {
        match scheme {
            Scheme::Conventional => &self.conventional,
            Scheme::Proposed => &self.proposed,
        }
    }
}

/// Produces the `K` reports of successive sensing events.
pub(crate) struct EventSource<'a> {
    sc: &'a Scenario,
    noise: NoiseModel,
    sampler: EnergySampler,
    avg_snr: f64,
    channels: Vec<ChannelDraw>,
    age: usize,
}

impl<'a> EventSource<'a> {
    pub(crate) fn new(sc: &'a Scenario) -> Result<Self> {
        Ok(EventSource {
            sc,
            noise: NoiseModel::new(sc.nominal_variance, sc.uncertainty_db)?,
            sampler: EnergySampler::new(sc.n_samples)?,
            avg_snr: sc.avg_snr(),
            channels: vec![ChannelDraw::silent(); sc.num_crs],
            age: 0,
        })
    }

    pub(crate) fn fill<R: Rng + ?Sized>(
        &mut self,
        hyp: Hypothesis,
        rng: &mut R,
        out: &mut Vec<SensingReport>,
    ) -> Result<()> {
        if self.age % self.sc.coherence_events == 0 {
            for c in self.channels.iter_mut() {
                *c = match self.sc.channel {
                    ChannelKind::Rayleigh => draw_channel(self.avg_snr, self.sc.nominal_variance, rng)?,
                    ChannelKind::Awgn => ChannelDraw::fixed(self.avg_snr, self.sc.nominal_variance),
                };
            }
        }
        self.age += 1;
        out.clear();
        match self.sc.energy_synthesis {
            EnergySynthesis::Statistic => {
                for (j, c) in self.channels.iter().enumerate() {
                    let v = draw_noise_variance(&self.noise, rng);
                    out.push(SensingReport {
                        energy: self.sampler.sample(hyp, c, v, rng),
                        est_noise_variance: v,
                        instantaneous_snr: c.instantaneous_snr,
                        cr_index: j + 1,
                    });
                }
            }
            EnergySynthesis::Samples => {
                let pu = gen_pu_samples(self.sc.n_samples / 2, rng)?;
                for (j, c) in self.channels.iter().enumerate() {
                    let v = draw_noise_variance(&self.noise, rng);
                    let block = synthesize_received(hyp, *c, &pu, v, rng)?;
                    out.push(SensingReport {
                        energy: measure_energy(&block),
                        est_noise_variance: v,
                        instantaneous_snr: c.instantaneous_snr,
                        cr_index: j + 1,
                    });
                }
            }
        }
        Ok(())
    }
}

fn detector(sc: &Scenario, lambda: f64) -> Result<Detector> {
    Detector::new(sc.combiner, sc.history_len, lambda)?.with_rho_override(sc.rho_override)
}

/// Runs `f` for every chain index, in parallel when enabled, keeping order.
pub(crate) fn map_chains<T, F>(n: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct ChainCounts {
    conventional: u64,
    proposed: u64,
    scored: u64,
    disagree: u64,
}

fn run_forced_chain(
    sc: &Scenario,
    lambda: f64,
    hyp: Hypothesis,
    mut rng: ChaCha8Rng,
    scored: u64,
) -> Result<ChainCounts> {
    let mut src = EventSource::new(sc)?;
    let mut det = detector(sc, lambda)?;
    let mut reports = Vec::with_capacity(sc.num_crs);
    let mut c = ChainCounts::default();
    while c.scored < scored {
        src.fill(hyp, &mut rng, &mut reports)?;
        let out = det.step(&reports)?;
        if out.adaptive.is_none() {
            continue;
        }
        let conv = out.conventional.is_present();
        let prop = out.proposed().is_present();
        c.scored += 1;
        c.conventional += conv as u64;
        c.proposed += prop as u64;
        c.disagree += (conv != prop) as u64;
    }
    Ok(c)
}

fn chain_sizes(trials: usize, chain_len: usize) -> (u64, impl Fn(u64) -> u64) {
    let trials = trials as u64;
    let len = chain_len as u64;
    let n = trials.div_ceil(len);
    (n, move |i| len.min(trials - i * len))
}

/// Both schemes under a forced hypothesis at threshold `lambda`.
///
/// `point` selects the random streams; callers sweeping a grid pass a key
/// derived from the grid value so each point sees independent events.
pub fn run_paired(sc: &Scenario, lambda: f64, hyp: Hypothesis, point: u64) -> Result<PairedRates> {
    sc.validate()?;
    if !(lambda > 0.0) {
        return Err(Error::invalid(format!("threshold must be positive, got {lambda}")));
    }
    let regime = match hyp {
        Hypothesis::H0 => Regime::H0,
        Hypothesis::H1 => Regime::H1,
    };
    let (n, size) = chain_sizes(sc.trials, sc.chain_len);
    let parts = map_chains(n, |i| {
        run_forced_chain(sc, lambda, hyp, chain_rng(sc.seed, point, regime, i), size(i))
    })?;
    let mut t = ChainCounts::default();
    for p in parts {
        t.conventional += p.conventional;
        t.proposed += p.proposed;
        t.scored += p.scored;
        t.disagree += p.disagree;
    }
    Ok(PairedRates {
        conventional: RegimeRate::from_counts(t.conventional, t.scored),
        proposed: RegimeRate::from_counts(t.proposed, t.scored),
        disagreements: t.disagree,
    })
}

/// Decision-positive rate of `scheme` under the scenario's forced PU model:
/// the false-alarm rate for `forced_h0`, the detection rate for `forced_h1`.
pub fn run_regime(sc: &Scenario, scheme: Scheme, lambda: f64) -> Result<RegimeRate> {
    let hyp = match sc.pu_model {
        PuModel::ForcedH0 => Hypothesis::H0,
        PuModel::ForcedH1 => Hypothesis::H1,
        PuModel::Markov { .. } => {
            return Err(Error::invalid(
                "run_regime needs a forced PU model; use run_markov for markov",
            ))
        }
    };
    let r = run_paired(sc, lambda, hyp, lambda.to_bits())?;
    Ok(r.get(scheme).clone())
}

/// Rates of one scheme on a Markov PU stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovRates {
    pub pfa: f64,
    pub pd: f64,
    /// Rates over events within `L` of a PU state change.
    pub pfa_transition: f64,
    pub pd_transition: f64,
    /// Rates over the remaining events.
    pub pfa_steady: f64,
    pub pd_steady: f64,
    /// `pfa_transition − pfa_steady`.
    pub excess_false_alarm: f64,
    /// `(1 − pd_transition) − (1 − pd_steady)`.
    pub excess_missed_detection: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovReport {
    pub lambda: f64,
    pub events: u64,
    pub transitions: u64,
    pub conventional: MarkovRates,
    pub proposed: MarkovRates,
}

// [scheme][near transition][truth] -> (hits, total)
type MarkovTally = [[[(u64, u64); 2]; 2]; 2];

fn tally_rates(t: &MarkovTally, s: usize) -> MarkovRates {
    let rate = |h: u64, n: u64| if n == 0 { 0.0 } else { h as f64 / n as f64 };
    let sum = |truth: usize| {
        let (a, b) = (t[s][0][truth], t[s][1][truth]);
        (a.0 + b.0, a.1 + b.1)
    };
    let (fa, n0) = sum(0);
    let (d, n1) = sum(1);
    let pfa_transition = rate(t[s][1][0].0, t[s][1][0].1);
    let pd_transition = rate(t[s][1][1].0, t[s][1][1].1);
    let pfa_steady = rate(t[s][0][0].0, t[s][0][0].1);
    let pd_steady = rate(t[s][0][1].0, t[s][0][1].1);
    MarkovRates {
        pfa: rate(fa, n0),
        pd: rate(d, n1),
        pfa_transition,
        pd_transition,
        pfa_steady,
        pd_steady,
        excess_false_alarm: pfa_transition - pfa_steady,
        excess_missed_detection: pd_steady - pd_transition,
    }
}

/// Both schemes on a two-state Markov PU stream, with transition penalties.
pub fn run_markov(sc: &Scenario, lambda: f64) -> Result<MarkovReport> {
    sc.validate()?;
    let PuModel::Markov { mean_dwell_events } = sc.pu_model else {
        return Err(Error::invalid("run_markov needs pu_model = markov"));
    };
    let p_switch = 1.0 / mean_dwell_events;
    let l = sc.history_len;
    let (n, size) = chain_sizes(sc.trials, sc.chain_len);
    let parts = map_chains(n, |i| -> Result<(MarkovTally, u64)> {
        let mut rng = chain_rng(sc.seed, lambda.to_bits(), Regime::Markov, i);
        let mut src = EventSource::new(sc)?;
        let mut det = detector(sc, lambda)?;
        let mut reports = Vec::with_capacity(sc.num_crs);
        let mut state = Hypothesis::from_present(rng.random::<bool>());
        let total = size(i) as usize + l - 1;
        let mut truth = Vec::with_capacity(total);
        let mut decisions = Vec::with_capacity(total);
        let mut toggles = Vec::new();
        for e in 0..total {
            if e > 0 && rng.random::<f64>() < p_switch {
                state = Hypothesis::from_present(!state.is_present());
                toggles.push(e);
            }
            src.fill(state, &mut rng, &mut reports)?;
            let out = det.step(&reports)?;
            truth.push(state);
            decisions.push(out.adaptive.map(|_| (out.conventional, out.proposed())));
        }
        let mut tally: MarkovTally = Default::default();
        let mut next = 0usize;
        for (e, d) in decisions.iter().enumerate() {
            let Some((conv, prop)) = d else { continue };
            while next < toggles.len() && toggles[next] + l < e {
                next += 1;
            }
            let near = toggles.get(next).is_some_and(|&t| t <= e + l);
            let tr = truth[e].is_present() as usize;
            for (s, dec) in [(0, conv), (1, prop)] {
                let cell = &mut tally[s][near as usize][tr];
                cell.0 += dec.is_present() as u64;
                cell.1 += 1;
            }
        }
        Ok((tally, toggles.len() as u64))
    })?;
    let mut t: MarkovTally = Default::default();
    let mut transitions = 0;
    for (p, tr) in parts {
        transitions += tr;
        for s in 0..2 {
            for near in 0..2 {
                for truth in 0..2 {
                    t[s][near][truth].0 += p[s][near][truth].0;
                    t[s][near][truth].1 += p[s][near][truth].1;
                }
            }
        }
    }
    Ok(MarkovReport {
        lambda,
        events: sc.trials as u64,
        transitions,
        conventional: tally_rates(&t, 0),
        proposed: tally_rates(&t, 1),
    })
}
