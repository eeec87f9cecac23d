//! ROC curves, AUC summaries, parameter sweeps and the CR-count equivalence
//! search.

use serde::{Deserialize, Serialize};

use super::rng::{chain_rng, Regime};
use super::scenario::{ChannelKind, Scenario};
use super::sim::{binomial_sd, run_paired, Scheme};
use crate::channel::{draw_noise_variance, Hypothesis, NoiseModel};
use crate::error::{Error, Result};
use crate::fusion::cfar_threshold;
use crate::theory::{
    qd_awgn_exact, qd_proposed_awgn, qd_proposed_rayleigh, qd_rayleigh, qfa_approx, qfa_proposed,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub target_pfa: f64,
    pub lambda: f64,
    pub empirical_pfa: f64,
    pub empirical_pfa_ci: f64,
    pub empirical_pd: f64,
    pub empirical_pd_ci: f64,
    pub theory_pfa: f64,
    pub theory_pd: f64,
    /// Scored events per regime.
    pub trials: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub scheme: Scheme,
    pub scenario: Scenario,
    pub points: Vec<RocPoint>,
    pub auc: f64,
    /// Delta-method standard error of `auc` from the binomial noise of the
    /// points.
    pub auc_se: f64,
    pub warnings: Vec<String>,
}

/// Random-stream key of a grid point.
pub fn point_key(target_pfa: f64) -> u64 {
    target_pfa.to_bits()
}

/// Trapezoidal area under the empirical ROC with `(0,0)` and `(1,1)` anchors,
/// plus its delta-method standard error.
pub fn auc_with_se(points: &[RocPoint]) -> (f64, f64) {
    let mut pts: Vec<(f64, f64, u64)> = points
        .iter()
        .map(|p| (p.empirical_pfa, p.empirical_pd, p.trials))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut xs = vec![0.0];
    let mut ys = vec![0.0];
    let mut ns = vec![0u64];
    for (x, y, n) in pts {
        xs.push(x);
        ys.push(y);
        ns.push(n);
    }
    xs.push(1.0);
    ys.push(1.0);
    ns.push(0);
    let area: f64 = (1..xs.len())
        .map(|i| 0.5 * (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1]))
        .sum();
    let mut var = 0.0;
    for j in 1..xs.len() - 1 {
        let dy = 0.5 * (xs[j + 1] - xs[j - 1]);
        let dx = 0.5 * (ys[j - 1] - ys[j + 1]);
        var += dy * dy * binomial_sd(ys[j], ns[j]).powi(2) + dx * dx * binomial_sd(xs[j], ns[j]).powi(2);
    }
    (area, var.sqrt())
}

pub fn auc(points: &[RocPoint]) -> f64 {
    auc_with_se(points).0
}

const RHO_WINDOWS: usize = 20_000;

/// Mean of the estimated uncertainty factor over independent full windows.
///
/// Exactly 1 without noise uncertainty; equal to `rho_override` when set.
pub fn expected_rho(sc: &Scenario) -> Result<f64> {
    if let Some(r) = sc.rho_override {
        return Ok(r);
    }
    if sc.uncertainty_db == 0.0 {
        return Ok(1.0);
    }
    let noise = NoiseModel::new(sc.nominal_variance, sc.uncertainty_db)?;
    let mut rng = chain_rng(sc.seed, 0, Regime::Rho, 0);
    let l = sc.history_len;
    let mut total = 0.0;
    for _ in 0..RHO_WINDOWS {
        let (mut sum, mut max) = (0.0, 0f64);
        for _ in 0..l {
            let m: f64 = (0..sc.num_crs)
                .map(|_| draw_noise_variance(&noise, &mut rng))
                .sum::<f64>()
                / sc.num_crs as f64;
            sum += m;
            max = max.max(m);
        }
        total += (max / (sum / l as f64)).max(1.0);
    }
    Ok(total / RHO_WINDOWS as f64)
}

/// Theory values of one grid point for both schemes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryPoint {
    pub conventional_pfa: f64,
    pub conventional_pd: f64,
    pub proposed_pfa: f64,
    pub proposed_pd: f64,
}

/// Gaussian false-alarm forms, exact (AWGN) or fading-averaged detection,
/// and the dual-threshold forms at uncertainty factor `rho` with the
/// predictor window empty of the PU for false alarms and full for detection.
pub fn theory_point(sc: &Scenario, lambda: f64, rho: f64) -> Result<TheoryPoint> {
    let base = sc.theory_params()?;
    let g = base.awgn_gamma();
    let h0 = base.with_rho(rho)?.with_m(0)?;
    let h1 = base.with_rho(rho)?.with_m(sc.history_len)?;
    let (conventional_pd, proposed_pd) = match sc.channel {
        ChannelKind::Rayleigh => (qd_rayleigh(&base, lambda)?, qd_proposed_rayleigh(&h1, lambda)?),
        ChannelKind::Awgn => (qd_awgn_exact(&base, lambda, g)?, qd_proposed_awgn(&h1, lambda, g)?),
    };
    Ok(TheoryPoint {
        conventional_pfa: qfa_approx(&base, lambda),
        conventional_pd,
        proposed_pfa: qfa_proposed(&h0, lambda, g)?,
        proposed_pd,
    })
}

fn curve(sc: &Scenario, scheme: Scheme, points: Vec<RocPoint>, warnings: Vec<String>) -> RocCurve {
    let (auc, auc_se) = auc_with_se(&points);
    RocCurve {
        scheme,
        scenario: sc.clone(),
        points,
        auc,
        auc_se,
        warnings,
    }
}

/// Conventional and proposed curves measured on the same events. Theory
/// columns are NaN when `with_theory` is false.
pub fn simulate_pair(sc: &Scenario, with_theory: bool) -> Result<(RocCurve, RocCurve)> {
    sc.validate()?;
    let cfg = sc.fusion_config()?;
    let rho = if with_theory { expected_rho(sc)? } else { f64::NAN };
    let mut conv = Vec::with_capacity(sc.pfa_grid.len());
    let mut prop = Vec::with_capacity(sc.pfa_grid.len());
    let mut warnings = Vec::new();
    for &target in &sc.pfa_grid {
        let lambda = cfar_threshold(&cfg, target)?;
        let key = point_key(target);
        let h0 = run_paired(sc, lambda, Hypothesis::H0, key)?;
        let h1 = run_paired(sc, lambda, Hypothesis::H1, key)?;
        let th = if with_theory {
            theory_point(sc, lambda, rho)?
        } else {
            TheoryPoint {
                conventional_pfa: f64::NAN,
                conventional_pd: f64::NAN,
                proposed_pfa: f64::NAN,
                proposed_pd: f64::NAN,
            }
        };
        for (scheme, out) in [(Scheme::Conventional, &mut conv), (Scheme::Proposed, &mut prop)] {
            let (fa, d) = (h0.get(scheme), h1.get(scheme));
            for w in [&fa.warning, &d.warning].into_iter().flatten() {
                warnings.push(format!("{} target {target}: {w}", scheme.as_str()));
            }
            let (tfa, td) = match scheme {
                Scheme::Conventional => (th.conventional_pfa, th.conventional_pd),
                Scheme::Proposed => (th.proposed_pfa, th.proposed_pd),
            };
            out.push(RocPoint {
                target_pfa: target,
                lambda,
                empirical_pfa: fa.rate,
                empirical_pfa_ci: fa.ci_halfwidth,
                empirical_pd: d.rate,
                empirical_pd_ci: d.ci_halfwidth,
                theory_pfa: tfa,
                theory_pd: td,
                trials: fa.trials,
            });
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok((
        curve(sc, Scheme::Conventional, conv, warnings.clone()),
        curve(sc, Scheme::Proposed, prop, warnings),
    ))
}

/// Both curves with theory columns.
pub fn roc_pair(sc: &Scenario) -> Result<(RocCurve, RocCurve)> {
    simulate_pair(sc, true)
}

pub fn roc_sweep(sc: &Scenario, scheme: Scheme) -> Result<RocCurve> {
    let (c, p) = roc_pair(sc)?;
    Ok(match scheme {
        Scheme::Conventional => c,
        Scheme::Proposed => p,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    HistoryLen,
    NumCrs,
}

impl SweepParam {
    pub fn key(self) -> &'static str {
        match self {
            SweepParam::HistoryLen => "history_len",
            SweepParam::NumCrs => "num_crs",
        }
    }
}

/// One proposed-scheme curve per value of `param`, all on the base seed.
pub fn sweep_param(base: &Scenario, param: SweepParam, values: &[usize]) -> Result<Vec<RocCurve>> {
    if values.is_empty() {
        return Err(Error::invalid("sweep needs at least one value"));
    }
    values
        .iter()
        .map(|&v| {
            let mut sc = base.clone();
            match param {
                SweepParam::HistoryLen => sc.history_len = v,
                SweepParam::NumCrs => sc.num_crs = v,
            }
            sc.validate()?;
            roc_sweep(&sc, Scheme::Proposed)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceResult {
    pub k_proposed: usize,
    pub proposed_auc: f64,
    /// Smallest conventional `K` within [`AUC_MATCH_TOL`] of the proposed AUC,
    /// `None` when no value in the range got there.
    pub k_match: Option<usize>,
    /// Proposed AUC minus conventional AUC at `k_match`, or at the largest
    /// `K` tried when there was no match.
    pub auc_gap: f64,
    /// `(K, conventional AUC)` for every `K` evaluated.
    pub conventional: Vec<(usize, f64)>,
}

pub const AUC_MATCH_TOL: f64 = 0.02;

/// Scans `k_range` upwards for the first conventional configuration whose
/// AUC comes within [`AUC_MATCH_TOL`] of the proposed scheme at
/// `proposed.num_crs`.
pub fn equivalence_search(proposed: &Scenario, k_range: &[usize]) -> Result<EquivalenceResult> {
    if k_range.is_empty() {
        return Err(Error::invalid("K range must not be empty"));
    }
    if k_range.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("K range must be strictly ascending"));
    }
    let (_, prop) = simulate_pair(proposed, false)?;
    let mut conventional = Vec::new();
    let mut k_match = None;
    let mut gap = f64::NAN;
    for &k in k_range {
        let mut sc = proposed.clone();
        sc.num_crs = k;
        let (conv, _) = simulate_pair(&sc, false)?;
        conventional.push((k, conv.auc));
        gap = prop.auc - conv.auc;
        if conv.auc >= prop.auc - AUC_MATCH_TOL {
            k_match = Some(k);
            break;
        }
    }
    Ok(EquivalenceResult {
        k_proposed: proposed.num_crs,
        proposed_auc: prop.auc,
        k_match,
        auc_gap: gap,
        conventional,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> RocPoint {
        RocPoint {
            target_pfa: x,
            lambda: 1.0,
            empirical_pfa: x,
            empirical_pfa_ci: 0.0,
            empirical_pd: y,
            empirical_pd_ci: 0.0,
            theory_pfa: x,
            theory_pd: y,
            trials: 1000,
        }
    }

    #[test]
    fn auc_reference_shapes() {
        assert!((auc(&[]) - 0.5).abs() < 1e-15);
        assert!((auc(&[pt(0.5, 0.5)]) - 0.5).abs() < 1e-15);
        assert!((auc(&[pt(0.0, 1.0)]) - 1.0).abs() < 1e-15);
        assert!((auc(&[pt(0.2, 0.6)]) - (0.5 * 0.2 * 0.6 + 0.5 * 0.8 * 1.6)).abs() < 1e-15);
        // order of points does not matter
        let a = auc(&[pt(0.1, 0.4), pt(0.3, 0.7)]);
        let b = auc(&[pt(0.3, 0.7), pt(0.1, 0.4)]);
        assert_eq!(a, b);
    }

    #[test]
    fn rho_without_uncertainty_is_one() {
        let sc = Scenario {
            uncertainty_db: 0.0,
            ..Scenario::default()
        };
        assert_eq!(expected_rho(&sc).unwrap(), 1.0);
        let sc = Scenario {
            rho_override: Some(1.2),
            ..Scenario::default()
        };
        assert_eq!(expected_rho(&sc).unwrap(), 1.2);
        let r = expected_rho(&Scenario::default()).unwrap();
        assert!(r > 1.0 && r < 1.26, "{r}");
    }

    #[test]
    fn median_grid_point() {
        let sc = Scenario {
            pfa_grid: vec![0.5],
            uncertainty_db: 0.0,
            trials: 20_000,
            ..Scenario::default()
        };
        let c = roc_sweep(&sc, Scheme::Conventional).unwrap();
        assert_eq!(c.points.len(), 1);
        let p = &c.points[0];
        assert!((p.empirical_pfa - 0.5).abs() <= p.empirical_pfa_ci, "{p:?}");
        assert_eq!(p.theory_pfa, 0.5);
    }

    #[test]
    fn sweep_validates_values() {
        let sc = Scenario {
            trials: 100,
            pfa_grid: vec![0.1],
            ..Scenario::default()
        };
        assert!(sweep_param(&sc, SweepParam::HistoryLen, &[1]).is_err());
        assert!(sweep_param(&sc, SweepParam::NumCrs, &[0]).is_err());
        assert!(sweep_param(&sc, SweepParam::NumCrs, &[]).is_err());
        let one = sweep_param(&sc, SweepParam::HistoryLen, &[15]).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0], roc_sweep(&sc, Scheme::Proposed).unwrap());
    }

    #[test]
    fn equivalence_without_uncertainty_matches_immediately() {
        let sc = Scenario {
            num_crs: 3,
            uncertainty_db: 0.0,
            trials: 2000,
            pfa_grid: vec![0.05, 0.1, 0.3],
            ..Scenario::default()
        };
        let r = equivalence_search(&sc, &[3, 4, 5]).unwrap();
        assert_eq!(r.k_match, Some(3));
        assert_eq!(r.auc_gap, 0.0);
        assert!(equivalence_search(&sc, &[]).is_err());
        assert!(equivalence_search(&sc, &[4, 3]).is_err());
    }
}
