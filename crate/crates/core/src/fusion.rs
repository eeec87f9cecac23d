//! Fusion-center combining, CFAR thresholds and the fixed-threshold decision.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::Hypothesis;
use crate::error::{Error, Result};
use crate::sensing::SensingReport;
use crate::theory::special::inv_erfc;

/// Soft-combining rule applied at the fusion center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CombinerKind {
    /// Square-law combining: sum of energies.
    Slc,
    /// Maximal-ratio combining: SNR-weighted sum of energies.
    Mrc,
    /// Square-law selection: largest energy.
    Sls,
}

impl CombinerKind {
    pub const ALL: [CombinerKind; 3] = [CombinerKind::Slc, CombinerKind::Mrc, CombinerKind::Sls];

    pub fn as_str(self) -> &'static str {
        match self {
            CombinerKind::Slc => "SLC",
            CombinerKind::Mrc => "MRC",
            CombinerKind::Sls => "SLS",
        }
    }
}

impl fmt::Display for CombinerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CombinerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "SLC" => Ok(CombinerKind::Slc),
            "MRC" => Ok(CombinerKind::Mrc),
            "SLS" => Ok(CombinerKind::Sls),
            other => Err(Error::invalid(format!(
                "unknown combiner {other:?} (expected SLC, MRC or SLS)"
            ))),
        }
    }
}

/// How the SLS CFAR threshold maps the network false-alarm target onto a
/// single branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum SlsInversion {
    /// `p = 1 − (1 − P_fa)^(1/K)`, the exact inverse of the K-branch
    /// false-alarm expression.
    #[default]
    PerBranch,
    /// `p = 1 − (1 − P_fa)^K` as printed in the original threshold table.
    /// Kept for comparison only; it does not invert the SLS false-alarm law.
    Literal,
}

impl FromStr for SlsInversion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "per_branch" => Ok(SlsInversion::PerBranch),
            "literal" => Ok(SlsInversion::Literal),
            other => Err(Error::invalid(format!(
                "unknown SLS inversion {other:?} (expected per_branch or literal)"
            ))),
        }
    }
}

impl SlsInversion {
    pub fn as_str(self) -> &'static str {
        match self {
            SlsInversion::PerBranch => "per_branch",
            SlsInversion::Literal => "literal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    pub kind: CombinerKind,
    pub num_crs: usize,
    /// Real degrees of freedom per CR and event; always `2u`.
    pub n_samples: usize,
    pub nominal_variance: f64,
    pub sls_inversion: SlsInversion,
}

impl FusionConfig {
    pub fn new(
        kind: CombinerKind,
        num_crs: usize,
        n_samples: usize,
        nominal_variance: f64,
    ) -> Result<Self> {
        if num_crs == 0 {
            return Err(Error::invalid("number of CRs must be at least 1"));
        }
        if n_samples < 2 || n_samples % 2 != 0 {
            return Err(Error::invalid(format!(
                "sample count N must be even and at least 2 (N = 2u), got {n_samples}"
            )));
        }
        if !(nominal_variance > 0.0 && nominal_variance.is_finite()) {
            return Err(Error::invalid("nominal noise variance must be positive"));
        }
        Ok(FusionConfig {
            kind,
            num_crs,
            n_samples,
            nominal_variance,
            sls_inversion: SlsInversion::PerBranch,
        })
    }

    pub fn with_sls_inversion(mut self, inversion: SlsInversion) -> Self {
        self.sls_inversion = inversion;
        self
    }

    /// Time-bandwidth product `u = N/2`.
    pub fn tbw_product(&self) -> usize {
        self.n_samples / 2
    }
}

/// `w_j = γ_j / Σγ`.
pub fn mrc_weights(snrs: &[f64]) -> Result<Vec<f64>> {
    if snrs.is_empty() {
        return Err(Error::invalid("MRC weights need at least one SNR"));
    }
    if let Some(bad) = snrs.iter().find(|g| !(**g >= 0.0) || !g.is_finite()) {
        return Err(Error::invalid(format!("SNR must be finite and nonnegative, got {bad}")));
    }
    let total: f64 = snrs.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateWeights);
    }
    Ok(snrs.iter().map(|g| g / total).collect())
}

pub fn combine(kind: CombinerKind, reports: &[SensingReport]) -> Result<f64> {
    if reports.is_empty() {
        return Err(Error::invalid("cannot combine an empty report set"));
    }
    match kind {
        CombinerKind::Slc => Ok(reports.iter().map(|r| r.energy).sum()),
        CombinerKind::Mrc => {
            let snrs: Vec<f64> = reports.iter().map(|r| r.instantaneous_snr).collect();
            let w = mrc_weights(&snrs)?;
            Ok(w.iter().zip(reports).map(|(w, r)| w * r.energy).sum())
        }
        CombinerKind::Sls => Ok(reports
            .iter()
            .map(|r| r.energy)
            .fold(f64::NEG_INFINITY, f64::max)),
    }
}

/// CFAR threshold from the Gaussian approximation of the H0 combined energy.
///
/// With `u = N/2`:
/// - SLC: `σ²(erfc⁻¹(2p)·2√(2Ku) + 2Ku)`
/// - MRC: `σ²(erfc⁻¹(2p)·2√(2u) + 2u)`
/// - SLS: the MRC form at the branch false-alarm level chosen by
///   [`SlsInversion`].
pub fn cfar_threshold(cfg: &FusionConfig, target_pfa: f64) -> Result<f64> {
    if !(target_pfa > 0.0 && target_pfa < 1.0) {
        return Err(Error::invalid(format!(
            "target false-alarm probability must lie in (0, 1), got {target_pfa}"
        )));
    }
    let u = cfg.tbw_product() as f64;
    if u < 50.0 {
        log::warn!("time-bandwidth product u = {u} is small; Gaussian CFAR threshold is inaccurate");
    }
    let k = cfg.num_crs as f64;
    let (dof_half, p) = match cfg.kind {
        CombinerKind::Slc => (k * u, target_pfa),
        CombinerKind::Mrc => (u, target_pfa),
        CombinerKind::Sls => {
            let p = match cfg.sls_inversion {
                // 1 − (1 − P)^(1/K) without cancellation for small P
                SlsInversion::PerBranch => -((1.0 - target_pfa).ln() / k).exp_m1(),
                SlsInversion::Literal => 1.0 - (1.0 - target_pfa).powf(k),
            };
            (u, p)
        }
    };
    let x = inv_erfc(2.0 * p)?;
    Ok(cfg.nominal_variance * (x * 2.0 * (2.0 * dof_half).sqrt() + 2.0 * dof_half))
}

/// H1 iff the combined energy reaches the threshold.
pub fn decide_conventional(combined_energy: f64, threshold: f64) -> Hypothesis {
    Hypothesis::from_present(combined_energy >= threshold)
}
