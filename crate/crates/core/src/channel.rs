//! Primary-user signal, Rayleigh flat fading and noisy receiver synthesis.
//!
//! Samples are complex baseband. Noise is circular complex Gaussian with
//! variance `σ²` per real dimension, so one sensing event of `u` complex
//! samples carries `N = 2u` real degrees of freedom and its noise-only energy
//! is `σ²·χ²_N`. The average SNR of a link is the received signal power over
//! the total complex noise power at the nominal level, `E|h|²/(2σ²)` for the
//! unit-power BPSK source.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Primary-user activity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    /// PU absent.
    H0,
    /// PU present.
    H1,
}

impl Hypothesis {
    pub fn is_present(self) -> bool {
        self == Hypothesis::H1
    }

    pub fn from_present(present: bool) -> Self {
        if present {
            Hypothesis::H1
        } else {
            Hypothesis::H0
        }
    }
}

/// One flat-fading channel realisation between the PU and a CR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelDraw {
    pub gain: Complex64,
    /// `|gain|² / (2σ²_nominal)` for a unit-power source.
    pub instantaneous_snr: f64,
}

impl ChannelDraw {
    /// Deterministic (non-fading) link at a fixed SNR.
    pub fn fixed(snr: f64, nominal_variance: f64) -> Self {
        let amplitude = (2.0 * nominal_variance * snr.max(0.0)).sqrt();
        ChannelDraw {
            gain: Complex64::new(amplitude, 0.0),
            instantaneous_snr: snr.max(0.0),
        }
    }

    /// A link with no signal at all.
    pub fn silent() -> Self {
        ChannelDraw {
            gain: Complex64::new(0.0, 0.0),
            instantaneous_snr: 0.0,
        }
    }
}

/// Noise-variance uncertainty: per-event variances are drawn uniformly in dB
/// over `[-Δ, +Δ]` around the nominal value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub nominal_variance: f64,
    pub uncertainty_halfwidth_db: f64,
}

impl NoiseModel {
    pub fn new(nominal_variance: f64, uncertainty_halfwidth_db: f64) -> Result<Self> {
        if !(nominal_variance > 0.0 && nominal_variance.is_finite()) {
            return Err(Error::invalid(format!(
                "nominal noise variance must be positive, got {nominal_variance}"
            )));
        }
        if !(uncertainty_halfwidth_db >= 0.0 && uncertainty_halfwidth_db.is_finite()) {
            return Err(Error::invalid(format!(
                "uncertainty half-width must be nonnegative, got {uncertainty_halfwidth_db} dB"
            )));
        }
        Ok(NoiseModel {
            nominal_variance,
            uncertainty_halfwidth_db,
        })
    }

    /// Smallest and largest variance the model can produce.
    pub fn bounds(&self) -> (f64, f64) {
        let d = self.uncertainty_halfwidth_db / 10.0;
        (
            self.nominal_variance * 10f64.powf(-d),
            self.nominal_variance * 10f64.powf(d),
        )
    }
}

/// A received block for one CR and one sensing event.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBlock {
    pub samples: Vec<Complex64>,
    pub true_hypothesis: Hypothesis,
    pub true_noise_variance: f64,
    pub channel: ChannelDraw,
}

impl SampleBlock {
    /// Real degrees of freedom, `N = 2 × complex samples`.
    pub fn degrees_of_freedom(&self) -> usize {
        2 * self.samples.len()
    }
}

/// `n` unit-power BPSK symbols on the real axis.
pub fn gen_pu_samples<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<Complex64>> {
    if n == 0 {
        return Err(Error::invalid("PU sample count must be at least 1"));
    }
    Ok((0..n)
        .map(|_| {
            let re = if rng.random::<bool>() { 1.0 } else { -1.0 };
            Complex64::new(re, 0.0)
        })
        .collect())
}

/// Rayleigh flat-fading gain with mean SNR `avg_snr` relative to `nominal_variance`.
pub fn draw_channel<R: Rng + ?Sized>(
    avg_snr: f64,
    nominal_variance: f64,
    rng: &mut R,
) -> Result<ChannelDraw> {
    if !(avg_snr > 0.0 && avg_snr.is_finite()) {
        return Err(Error::invalid(format!(
            "average SNR must be positive, got {avg_snr}"
        )));
    }
    if !(nominal_variance > 0.0) {
        return Err(Error::invalid("nominal noise variance must be positive"));
    }
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    // CN(0, 1) scaled so that E|h|² = 2σ²γ̄
    let scale = (nominal_variance * avg_snr).sqrt();
    let gain = Complex64::new(re * scale, im * scale);
    Ok(ChannelDraw {
        gain,
        instantaneous_snr: gain.norm_sqr() / (2.0 * nominal_variance),
    })
}

pub fn draw_noise_variance<R: Rng + ?Sized>(model: &NoiseModel, rng: &mut R) -> f64 {
    let delta = model.uncertainty_halfwidth_db;
    // always consume one uniform so that streams stay aligned across Δ
    let u: f64 = rng.random();
    if delta == 0.0 {
        return model.nominal_variance;
    }
    let db = delta * (2.0 * u - 1.0);
    model.nominal_variance * 10f64.powf(db / 10.0)
}

/// Received samples per `y = h·s + w` under H1 and `y = w` under H0.
pub fn synthesize_received<R: Rng + ?Sized>(
    hyp: Hypothesis,
    channel: ChannelDraw,
    pu: &[Complex64],
    noise_variance: f64,
    rng: &mut R,
) -> Result<SampleBlock> {
    if pu.is_empty() {
        return Err(Error::invalid("PU sample sequence is empty"));
    }
    if !(noise_variance > 0.0) {
        return Err(Error::invalid("noise variance must be positive"));
    }
    let sd = noise_variance.sqrt();
    let samples = pu
        .iter()
        .map(|&s| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let w = Complex64::new(re * sd, im * sd);
            match hyp {
                Hypothesis::H0 => w,
                Hypothesis::H1 => channel.gain * s + w,
            }
        })
        .collect();
    Ok(SampleBlock {
        samples,
        true_hypothesis: hyp,
        true_noise_variance: noise_variance,
        channel,
    })
}

/// Draws the energy `Σ|y|²` of a block directly from its exact distribution.
///
/// For a constant-modulus source the block energy is `σ²·χ'²_N(δ)` with
/// noncentrality `δ = u·|h|²/σ²`, which is sampled as
/// `σ²·((Z + √δ)² + χ²_{N−1})`. This produces the same law as
/// [`synthesize_received`] followed by [`crate::sensing::measure_energy`] at
/// O(1) cost per block instead of O(N).
#[derive(Debug, Clone)]
pub struct EnergySampler {
    complex_samples: usize,
    rest: ChiSquared<f64>,
}

impl EnergySampler {
    /// `dof` is the number of real degrees of freedom `N` (even, ≥ 2).
    pub fn new(dof: usize) -> Result<Self> {
        if dof < 2 || dof % 2 != 0 {
            return Err(Error::invalid(format!(
                "degrees of freedom must be even and at least 2, got {dof}"
            )));
        }
        let rest = ChiSquared::new((dof - 1) as f64)
            .map_err(|e| Error::invalid(format!("chi-square setup: {e}")))?;
        Ok(EnergySampler {
            complex_samples: dof / 2,
            rest,
        })
    }

    pub fn dof(&self) -> usize {
        2 * self.complex_samples
    }

    pub fn sample<R: Rng + ?Sized>(
        &self,
        hyp: Hypothesis,
        channel: &ChannelDraw,
        noise_variance: f64,
        rng: &mut R,
    ) -> f64 {
        let signal_energy = match hyp {
            Hypothesis::H0 => 0.0,
            Hypothesis::H1 => self.complex_samples as f64 * channel.gain.norm_sqr(),
        };
        let shift = (signal_energy / noise_variance).sqrt();
        let z: f64 = rng.sample(StandardNormal);
        let rest = self.rest.sample(rng);
        noise_variance * ((z + shift) * (z + shift) + rest)
    }
}
