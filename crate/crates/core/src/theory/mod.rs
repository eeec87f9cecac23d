//! Closed-form and quadrature-based detection probabilities.
//!
//! All thresholds are in energy units. `γ` arguments are the combined SNR for
//! SLC and MRC (`Σγ_j`) and the per-branch SNR for SLS, where every branch is
//! taken to see the same value.

pub mod quad;
pub mod special;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::{CombinerKind, FusionConfig};
use special::{marcum_q, q_func, upper_reg_gamma};

pub use special::{inv_erfc, ln_gamma};

/// Absolute tolerance for the fading averages.
pub const QUAD_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryParams {
    pub kind: CombinerKind,
    pub k: usize,
    /// Real degrees of freedom per branch, `N = 2u`.
    pub n: usize,
    pub sigma_sq: f64,
    /// Average per-branch SNR (linear).
    pub gamma_bar: f64,
    pub rho: f64,
    pub l: usize,
    /// Number of PU-present events in the predictor window.
    pub m: usize,
}

impl TheoryParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        kind: CombinerKind,
        k: usize,
        n: usize,
        sigma_sq: f64,
        gamma_bar: f64,
        rho: f64,
        l: usize,
        m: usize,
    ) -> Result<Self> {
        let p = TheoryParams {
            kind,
            k,
            n,
            sigma_sq,
            gamma_bar,
            rho,
            l,
            m,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters matching a fusion configuration, with `ρ = 1` and a fully
    /// occupied window (`M = L`).
    pub fn from_fusion(cfg: &FusionConfig, gamma_bar: f64, l: usize) -> Result<Self> {
        Self::new(cfg.kind, cfg.num_crs, cfg.n_samples, cfg.nominal_variance, gamma_bar, 1.0, l, l)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("K must be at least 1"));
        }
        if self.n < 2 || self.n % 2 != 0 {
            return Err(Error::invalid(format!("N must be even and at least 2, got {}", self.n)));
        }
        if !(self.sigma_sq > 0.0 && self.sigma_sq.is_finite()) {
            return Err(Error::invalid("noise variance must be positive"));
        }
        if !(self.gamma_bar > 0.0 && self.gamma_bar.is_finite()) {
            return Err(Error::invalid("average SNR must be positive"));
        }
        if !(self.rho >= 1.0 && self.rho.is_finite()) {
            return Err(Error::invalid(format!("rho must be at least 1, got {}", self.rho)));
        }
        if self.l < 2 {
            return Err(Error::invalid(format!("L must be at least 2, got {}", self.l)));
        }
        if self.m > self.l {
            return Err(Error::invalid(format!("M must lie in [0, L], got M={} L={}", self.m, self.l)));
        }
        Ok(())
    }

    pub fn with_rho(mut self, rho: f64) -> Result<Self> {
        self.rho = rho;
        self.validate()?;
        Ok(self)
    }

    pub fn with_m(mut self, m: usize) -> Result<Self> {
        self.m = m;
        self.validate()?;
        Ok(self)
    }

    pub fn with_kind(mut self, kind: CombinerKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn u(&self) -> f64 {
        (self.n / 2) as f64
    }

    /// Combined-SNR value used in AWGN formulas for a link where every branch
    /// sits at the average SNR.
    pub fn awgn_gamma(&self) -> f64 {
        match self.kind {
            CombinerKind::Slc | CombinerKind::Mrc => self.k as f64 * self.gamma_bar,
            CombinerKind::Sls => self.gamma_bar,
        }
    }
}

// 1 − (1 − q)^K without cancellation for small q
fn any_of_k(q: f64, k: usize) -> f64 {
    if q >= 1.0 {
        return 1.0;
    }
    -(k as f64 * (-q).ln_1p()).exp_m1()
}

/// Exact false-alarm probability.
pub fn qfa_exact(p: &TheoryParams, lambda: f64) -> Result<f64> {
    if lambda <= 0.0 {
        return Ok(1.0);
    }
    let x = lambda / (2.0 * p.sigma_sq);
    let u = p.u();
    Ok(match p.kind {
        CombinerKind::Slc => upper_reg_gamma(p.k as f64 * u, x)?,
        CombinerKind::Mrc => upper_reg_gamma(u, x)?,
        CombinerKind::Sls => any_of_k(upper_reg_gamma(u, x)?, p.k),
    })
}

// single-branch or combined Marcum detection term
fn marcum_term(order: f64, n: f64, gamma: f64, sigma_sq: f64, lambda: f64) -> Result<f64> {
    marcum_q(order, (n * gamma.max(0.0)).sqrt(), (lambda / sigma_sq).sqrt())
}

/// Exact detection probability in AWGN at (combined or per-branch) SNR `γ`.
pub fn qd_awgn_exact(p: &TheoryParams, lambda: f64, gamma: f64) -> Result<f64> {
    if lambda <= 0.0 {
        return Ok(1.0);
    }
    let n = p.n as f64;
    let u = p.u();
    Ok(match p.kind {
        CombinerKind::Slc => marcum_term(p.k as f64 * u, n, gamma, p.sigma_sq, lambda)?,
        CombinerKind::Mrc => marcum_term(u, n, gamma, p.sigma_sq, lambda)?,
        CombinerKind::Sls => any_of_k(marcum_term(u, n, gamma, p.sigma_sq, lambda)?, p.k),
    })
}

/// Shape of the gamma-distributed SNR the combiner averages over: `K` for
/// the summed SNR of SLC/MRC, one for a single SLS branch.
fn fading_shape(p: &TheoryParams) -> usize {
    match p.kind {
        CombinerKind::Slc | CombinerKind::Mrc => p.k,
        CombinerKind::Sls => 1,
    }
}

fn gamma_pdf(shape: usize, scale: f64, g: f64) -> f64 {
    if g < 0.0 {
        return 0.0;
    }
    if shape == 1 {
        return (-g / scale).exp() / scale;
    }
    if g == 0.0 {
        return 0.0;
    }
    let a = shape as f64;
    ((a - 1.0) * g.ln() - g / scale - ln_gamma(a) - a * scale.ln()).exp()
}

/// `∫ h(γ) f(γ) dγ` over the combiner's fading density.
fn fading_average<F>(p: &TheoryParams, mut h: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let shape = fading_shape(p);
    let a = shape as f64;
    let upper = p.gamma_bar * (a + 40.0 * a.sqrt());
    quad::integrate(
        |g| {
            let w = gamma_pdf(shape, p.gamma_bar, g);
            if w == 0.0 {
                return Ok(0.0);
            }
            Ok(h(g)? * w)
        },
        0.0,
        upper,
        QUAD_TOL,
    )
    .map(|v| v.clamp(0.0, 1.0))
}

/// Branch-level Marcum term for SLS, the combined term otherwise.
fn detection_kernel(p: &TheoryParams, lambda: f64, gamma: f64) -> Result<f64> {
    let n = p.n as f64;
    let u = p.u();
    match p.kind {
        CombinerKind::Slc => marcum_term(p.k as f64 * u, n, gamma, p.sigma_sq, lambda),
        CombinerKind::Mrc | CombinerKind::Sls => marcum_term(u, n, gamma, p.sigma_sq, lambda),
    }
}

fn rayleigh_at(p: &TheoryParams, lambda: f64) -> Result<f64> {
    if lambda <= 0.0 {
        return Ok(1.0);
    }
    let avg = fading_average(p, |g| detection_kernel(p, lambda, g))?;
    Ok(match p.kind {
        CombinerKind::Sls => any_of_k(avg, p.k),
        _ => avg,
    })
}

/// Detection probability averaged over Rayleigh fading.
pub fn qd_rayleigh(p: &TheoryParams, lambda: f64) -> Result<f64> {
    rayleigh_at(p, lambda)
}

/// SLS detection with unequal branches: instantaneous SNRs `gammas` in AWGN,
/// or average SNRs when `rayleigh` is set. `p.kind` and `p.k` are ignored.
pub fn qd_sls_branches(p: &TheoryParams, lambda: f64, gammas: &[f64], rayleigh: bool) -> Result<f64> {
    if gammas.is_empty() {
        return Err(Error::invalid("need at least one branch SNR"));
    }
    if gammas.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
        return Err(Error::invalid("branch SNRs must be finite and nonnegative"));
    }
    if lambda <= 0.0 {
        return Ok(1.0);
    }
    let n = p.n as f64;
    let u = p.u();
    let mut log_miss = 0.0;
    for &g in gammas {
        let q = if rayleigh && g > 0.0 {
            let branch = TheoryParams { kind: CombinerKind::Sls, gamma_bar: g, ..*p };
            fading_average(&branch, |x| marcum_term(u, n, x, p.sigma_sq, lambda))?
        } else {
            marcum_term(u, n, g, p.sigma_sq, lambda)?
        };
        log_miss += (-q).ln_1p();
    }
    Ok(-log_miss.exp_m1())
}

/// Gaussian (large-N) false-alarm probability.
pub fn qfa_approx(p: &TheoryParams, lambda: f64) -> f64 {
    if p.n < 100 {
        log::warn!("N = {} is small; Gaussian false-alarm approximation is inaccurate", p.n);
    }
    let n = p.n as f64;
    let s = p.sigma_sq;
    match p.kind {
        CombinerKind::Slc => {
            let nk = n * p.k as f64;
            q_func((lambda - nk * s) / (s * (2.0 * nk).sqrt()))
        }
        CombinerKind::Mrc => q_func((lambda - n * s) / (s * (2.0 * n).sqrt())),
        CombinerKind::Sls => any_of_k(q_func((lambda - n * s) / (s * (2.0 * n).sqrt())), p.k),
    }
}

/// Mean and variance of one combined energy under the Gaussian model, for
/// `γ = 0` (H0) or the given SNR (H1).
fn gaussian_moments(p: &TheoryParams, gamma: f64) -> (f64, f64) {
    let n = p.n as f64;
    let s = p.sigma_sq;
    match p.kind {
        CombinerKind::Slc => {
            let nk = n * p.k as f64;
            let g = 1.0 + gamma / p.k as f64;
            (nk * s * g, 2.0 * nk * s * s * g * g)
        }
        CombinerKind::Mrc | CombinerKind::Sls => {
            let g = 1.0 + gamma;
            (n * s * g, 2.0 * n * s * s * g * g)
        }
    }
}

/// Gaussian (large-N) detection probability in AWGN.
pub fn qd_awgn_approx(p: &TheoryParams, lambda: f64, gamma: f64) -> f64 {
    if p.n < 100 {
        log::warn!("N = {} is small; Gaussian detection approximation is inaccurate", p.n);
    }
    let (mu, var) = gaussian_moments(p, gamma.max(0.0));
    let q = q_func((lambda - mu) / var.sqrt());
    match p.kind {
        CombinerKind::Sls => any_of_k(q, p.k),
        _ => q,
    }
}

/// Mean and variance of the window average of `L` combined energies with `M`
/// of them drawn under H1 at SNR `γ`.
pub fn avg_stats(p: &TheoryParams, gamma: f64) -> Result<(f64, f64)> {
    if p.m > p.l {
        return Err(Error::invalid(format!("M must lie in [0, L], got M={} L={}", p.m, p.l)));
    }
    let (mu0, v0) = gaussian_moments(p, 0.0);
    let (mu1, v1) = gaussian_moments(p, gamma.max(0.0));
    let l = p.l as f64;
    let m = p.m as f64;
    Ok(((m * mu1 + (l - m) * mu0) / l, (m * v1 + (l - m) * v0) / (l * l)))
}

/// Probability that the window average reaches `λ`, i.e. that H1 is predicted.
pub fn predictor_prob(p: &TheoryParams, lambda: f64, gamma: f64) -> Result<f64> {
    let (mu, var) = avg_stats(p, gamma)?;
    Ok(q_func((lambda - mu) / var.sqrt()))
}

// P·(a − b) + b, which returns b exactly when a == b
fn blend(pred: f64, at_low: f64, at_high: f64) -> f64 {
    (pred * (at_low - at_high) + at_high).clamp(0.0, 1.0)
}

/// False-alarm probability of the dual-threshold scheme. The predictor is
/// evaluated for the window composition `p.m` (normally `M = 0`).
pub fn qfa_proposed(p: &TheoryParams, lambda: f64, gamma: f64) -> Result<f64> {
    let pred = predictor_prob(p, lambda, gamma)?;
    Ok(blend(pred, qfa_approx(p, lambda / p.rho), qfa_approx(p, lambda * p.rho)))
}

/// AWGN detection probability of the dual-threshold scheme (Gaussian forms).
pub fn qd_proposed_awgn(p: &TheoryParams, lambda: f64, gamma: f64) -> Result<f64> {
    let pred = predictor_prob(p, lambda, gamma)?;
    Ok(blend(
        pred,
        qd_awgn_approx(p, lambda / p.rho, gamma),
        qd_awgn_approx(p, lambda * p.rho, gamma),
    ))
}

/// Rayleigh detection probability of the dual-threshold scheme.
///
/// The window is assumed to see the same SNR as the current event. For SLC
/// and MRC the blend is averaged over the combined-SNR density with exact
/// detection terms; for SLS the predictor and the branch terms are averaged
/// separately over the branch density, then combined across `K` branches.
/// With `ρ = 1` this reduces to [`qd_rayleigh`] bit for bit.
pub fn qd_proposed_rayleigh(p: &TheoryParams, lambda: f64) -> Result<f64> {
    let low = lambda / p.rho;
    let high = lambda * p.rho;
    match p.kind {
        CombinerKind::Slc | CombinerKind::Mrc => {
            if lambda <= 0.0 {
                return Ok(1.0);
            }
            fading_average(p, |g| {
                let pred = predictor_prob(p, lambda, g)?;
                let a = detection_kernel(p, low, g)?;
                let b = detection_kernel(p, high, g)?;
                Ok(pred * (a - b) + b)
            })
        }
        CombinerKind::Sls => {
            let pred = if lambda <= 0.0 {
                1.0
            } else {
                fading_average(p, |g| predictor_prob(p, lambda, g))?
            };
            let a = rayleigh_at(p, low)?;
            let b = rayleigh_at(p, high)?;
            Ok(blend(pred, a, b))
        }
    }
}
