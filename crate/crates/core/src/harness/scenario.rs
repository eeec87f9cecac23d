//! Experiment description with validated defaults.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::{CombinerKind, FusionConfig, SlsInversion};
use crate::theory::TheoryParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelKind {
    Rayleigh,
    Awgn,
}

impl ChannelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ChannelKind::Rayleigh => "rayleigh",
            ChannelKind::Awgn => "awgn",
        }
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rayleigh" => Ok(ChannelKind::Rayleigh),
            "awgn" => Ok(ChannelKind::Awgn),
            other => Err(Error::invalid(format!(
                "channel must be rayleigh or awgn, got {other:?}"
            ))),
        }
    }
}

/// How PU activity evolves over the simulated event stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PuModel {
    ForcedH0,
    ForcedH1,
    /// Two-state chain with geometric dwell times of the given mean.
    Markov { mean_dwell_events: f64 },
}

impl PuModel {
    pub fn name(&self) -> &'static str {
        match self {
            PuModel::ForcedH0 => "forced_h0",
            PuModel::ForcedH1 => "forced_h1",
            PuModel::Markov { .. } => "markov",
        }
    }
}

/// How per-CR block energies are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnergySynthesis {
    /// Draw the energy from its exact law (fast).
    Statistic,
    /// Synthesize every complex sample and sum `|y|²`.
    Samples,
}

impl EnergySynthesis {
    pub fn as_str(self) -> &'static str {
        match self {
            EnergySynthesis::Statistic => "statistic",
            EnergySynthesis::Samples => "samples",
        }
    }
}

impl FromStr for EnergySynthesis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "statistic" => Ok(EnergySynthesis::Statistic),
            "samples" => Ok(EnergySynthesis::Samples),
            other => Err(Error::invalid(format!(
                "energy_synthesis must be statistic or samples, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub snr_db: f64,
    /// Real degrees of freedom per CR and event (`N = 2u`).
    pub n_samples: usize,
    pub num_crs: usize,
    pub history_len: usize,
    pub uncertainty_db: f64,
    pub combiner: CombinerKind,
    /// Scored events per regime and grid point.
    pub trials: usize,
    pub seed: u64,
    pub pfa_grid: Vec<f64>,
    pub channel: ChannelKind,
    pub pu_model: PuModel,
    pub nominal_variance: f64,
    pub energy_synthesis: EnergySynthesis,
    /// Consecutive events that share one fading realisation.
    pub coherence_events: usize,
    /// Scored events per independent chain; every chain has its own warm-up.
    pub chain_len: usize,
    pub rho_override: Option<f64>,
    pub sls_inversion: SlsInversion,
}

pub const DEFAULT_MEAN_DWELL: f64 = 300.0;

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            snr_db: -15.0,
            n_samples: 1000,
            num_crs: 7,
            history_len: 15,
            uncertainty_db: 1.0,
            combiner: CombinerKind::Slc,
            trials: 10_000,
            seed: 1,
            pfa_grid: log_grid(0.01, 0.5, 15),
            channel: ChannelKind::Rayleigh,
            pu_model: PuModel::ForcedH1,
            nominal_variance: 1.0,
            energy_synthesis: EnergySynthesis::Statistic,
            coherence_events: 1,
            chain_len: 1000,
            rho_override: None,
            sls_inversion: SlsInversion::PerBranch,
        }
    }
}

pub const KEYS: &[&str] = &[
    "snr_db",
    "n_samples",
    "num_crs",
    "history_len",
    "uncertainty_db",
    "combiner",
    "trials",
    "seed",
    "pfa_grid",
    "channel",
    "pu_model",
    "mean_dwell_events",
    "nominal_variance",
    "energy_synthesis",
    "coherence_events",
    "chain_len",
    "rho_override",
    "sls_inversion",
];

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("{key}: cannot parse {value:?}")))
}

impl Scenario {
    /// Applies one `key=value` setting. Values use plain text; lists are
    /// comma separated.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "snr_db" => self.snr_db = parse_num(key, value)?,
            "n_samples" => self.n_samples = parse_num(key, value)?,
            "num_crs" => self.num_crs = parse_num(key, value)?,
            "history_len" => self.history_len = parse_num(key, value)?,
            "uncertainty_db" => self.uncertainty_db = parse_num(key, value)?,
            "combiner" => self.combiner = value.parse()?,
            "trials" => self.trials = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "pfa_grid" => {
                let v = value.trim().trim_start_matches('[').trim_end_matches(']');
                self.pfa_grid = v
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| parse_num(key, s))
                    .collect::<Result<_>>()?;
            }
            "channel" => self.channel = value.parse()?,
            "pu_model" => {
                let dwell = match self.pu_model {
                    PuModel::Markov { mean_dwell_events } => mean_dwell_events,
                    _ => DEFAULT_MEAN_DWELL,
                };
                self.pu_model = match value.trim() {
                    "forced_h0" => PuModel::ForcedH0,
                    "forced_h1" => PuModel::ForcedH1,
                    "markov" => PuModel::Markov {
                        mean_dwell_events: dwell,
                    },
                    other => {
                        return Err(Error::invalid(format!(
                            "pu_model must be forced_h0, forced_h1 or markov, got {other:?}"
                        )))
                    }
                };
            }
            "mean_dwell_events" => {
                let d: f64 = parse_num(key, value)?;
                self.pu_model = PuModel::Markov {
                    mean_dwell_events: d,
                };
            }
            "nominal_variance" => self.nominal_variance = parse_num(key, value)?,
            "energy_synthesis" => self.energy_synthesis = value.parse()?,
            "coherence_events" => self.coherence_events = parse_num(key, value)?,
            "chain_len" => self.chain_len = parse_num(key, value)?,
            "rho_override" => {
                let v = value.trim();
                self.rho_override = if v.is_empty() || v == "none" {
                    None
                } else {
                    Some(parse_num(key, v)?)
                };
            }
            "sls_inversion" => self.sls_inversion = value.parse()?,
            other => {
                return Err(Error::invalid(format!(
                    "unknown key {other:?}; valid keys: {}",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, rule: &str| Err(Error::invalid(format!("{field}: {rule}")));
        if !self.snr_db.is_finite() {
            return bad("snr_db", "must be finite");
        }
        if self.n_samples < 2 || self.n_samples % 2 != 0 {
            return bad("n_samples", "must be even and at least 2 (N = 2u)");
        }
        if self.num_crs < 1 {
            return bad("num_crs", "must be at least 1");
        }
        if self.history_len < 2 {
            return bad("history_len", "must be at least 2");
        }
        if !(self.uncertainty_db >= 0.0 && self.uncertainty_db.is_finite()) {
            return bad("uncertainty_db", "must be finite and nonnegative");
        }
        if self.trials < 1 {
            return bad("trials", "must be positive");
        }
        if self.pfa_grid.is_empty() {
            return bad("pfa_grid", "must not be empty");
        }
        if self.pfa_grid.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
            return bad("pfa_grid", "values must lie in (0, 1)");
        }
        if self.pfa_grid.windows(2).any(|w| w[1] <= w[0]) {
            return bad("pfa_grid", "must be strictly increasing");
        }
        if let PuModel::Markov { mean_dwell_events } = self.pu_model {
            if !(mean_dwell_events >= 10.0 * self.history_len as f64) {
                return bad("mean_dwell_events", "must be at least 10 * history_len");
            }
        }
        if !(self.nominal_variance > 0.0 && self.nominal_variance.is_finite()) {
            return bad("nominal_variance", "must be positive");
        }
        if self.coherence_events < 1 {
            return bad("coherence_events", "must be at least 1");
        }
        if self.chain_len < 1 {
            return bad("chain_len", "must be at least 1");
        }
        if let Some(r) = self.rho_override {
            if !(r >= 1.0 && r.is_finite()) {
                return bad("rho_override", "must be at least 1");
            }
        }
        Ok(())
    }

    pub fn avg_snr(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    pub fn fusion_config(&self) -> Result<FusionConfig> {
        Ok(FusionConfig::new(self.combiner, self.num_crs, self.n_samples, self.nominal_variance)?
            .with_sls_inversion(self.sls_inversion))
    }

    /// Theory parameters at `ρ = 1`, `M = L`.
    pub fn theory_params(&self) -> Result<TheoryParams> {
        TheoryParams::from_fusion(&self.fusion_config()?, self.avg_snr(), self.history_len)
    }

    /// Stable `key=value` listing of every resolved field, used for digests.
    pub fn canonical_text(&self) -> String {
        let mut s = String::new();
        let grid: Vec<String> = self.pfa_grid.iter().map(|p| format!("{p:?}")).collect();
        let dwell = match self.pu_model {
            PuModel::Markov { mean_dwell_events } => format!("{mean_dwell_events:?}"),
            _ => "none".into(),
        };
        let rho = self
            .rho_override
            .map_or_else(|| "none".to_string(), |r| format!("{r:?}"));
        let _ = writeln!(s, "channel={}", self.channel.as_str());
        let _ = writeln!(s, "chain_len={}", self.chain_len);
        let _ = writeln!(s, "coherence_events={}", self.coherence_events);
        let _ = writeln!(s, "combiner={}", self.combiner);
        let _ = writeln!(s, "energy_synthesis={}", self.energy_synthesis.as_str());
        let _ = writeln!(s, "history_len={}", self.history_len);
        let _ = writeln!(s, "mean_dwell_events={dwell}");
        let _ = writeln!(s, "n_samples={}", self.n_samples);
        let _ = writeln!(s, "nominal_variance={:?}", self.nominal_variance);
        let _ = writeln!(s, "num_crs={}", self.num_crs);
        let _ = writeln!(s, "pfa_grid={}", grid.join(","));
        let _ = writeln!(s, "pu_model={}", self.pu_model.name());
        let _ = writeln!(s, "rho_override={rho}");
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "sls_inversion={}", self.sls_inversion.as_str());
        let _ = writeln!(s, "snr_db={:?}", self.snr_db);
        let _ = writeln!(s, "trials={}", self.trials);
        let _ = writeln!(s, "uncertainty_db={:?}", self.uncertainty_db);
        s
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let s = Scenario::default();
        s.validate().unwrap();
        assert_eq!(s.pfa_grid.len(), 15);
        assert_eq!(s.pfa_grid[0], 0.01);
        assert_eq!(s.pfa_grid[14], 0.5);
    }

    #[test]
    fn set_and_validate() {
        let mut s = Scenario::default();
        s.set("history_len", "1").unwrap();
        assert!(s.validate().is_err());
        let mut s = Scenario::default();
        assert!(s.set("bogus", "1").unwrap_err().to_string().contains("history_len"));
        s.set("pfa_grid", "[0.1, 0.2]").unwrap();
        assert_eq!(s.pfa_grid, vec![0.1, 0.2]);
        s.set("pfa_grid", "0.2,0.1").unwrap();
        assert!(s.validate().is_err());
        let mut s = Scenario::default();
        s.set("pu_model", "markov").unwrap();
        s.validate().unwrap();
        s.set("mean_dwell_events", "100").unwrap();
        assert!(s.validate().is_err());
        s.set("combiner", "mrc").unwrap();
        assert_eq!(s.combiner, CombinerKind::Mrc);
        s.set("rho_override", "1.2").unwrap();
        assert_eq!(s.rho_override, Some(1.2));
    }

    #[test]
    fn canonical_text_is_stable() {
        let a = Scenario::default();
        let mut b = Scenario::default();
        b.set("snr_db", "-15").unwrap();
        assert_eq!(a.canonical_text(), b.canonical_text());
        b.set("seed", "2").unwrap();
        assert_ne!(a.canonical_text(), b.canonical_text());
    }
}
