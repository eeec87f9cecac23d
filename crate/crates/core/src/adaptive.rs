//! Noise-uncertainty aware dual-threshold decision.
//!
//! The fusion center keeps the last `L` combined energies and the mean noise
//! variance of each of those events. The window average of the energies
//! predicts PU activity. The ratio of the largest stored mean variance to the
//! window average gives the uncertainty factor `ρ`, and the CFAR threshold
//! is moved to `λ/ρ` or `ρλ` depending on the prediction.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::channel::Hypothesis;
use crate::error::{Error, Result};
use crate::fusion::{combine, decide_conventional, CombinerKind};
use crate::sensing::SensingReport;

// Running sums are rebuilt from scratch this often to stop drift.
const RESUM_PERIOD: u64 = 4096;

/// Rolling history of `(E_comb, σ²_mean)` pairs with O(1) aggregates.
#[derive(Debug, Clone)]
pub struct FusionState {
    capacity: usize,
    energy: VecDeque<f64>,
    variance: VecDeque<f64>,
    energy_sum: f64,
    variance_sum: f64,
    // monotonic queues of (sequence number, value)
    max_q: VecDeque<(u64, f64)>,
    min_q: VecDeque<(u64, f64)>,
    seq: u64,
}

impl FusionState {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity < 2 {
            return Err(Error::invalid(format!(
                "history length L must be at least 2, got {capacity}"
            )));
        }
        Ok(FusionState {
            capacity,
            energy: VecDeque::with_capacity(capacity + 1),
            variance: VecDeque::with_capacity(capacity + 1),
            energy_sum: 0.0,
            variance_sum: 0.0,
            max_q: VecDeque::new(),
            min_q: VecDeque::new(),
            seq: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.energy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energy.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.energy.len() == self.capacity
    }

    pub fn energy_history(&self) -> impl Iterator<Item = f64> + '_ {
        self.energy.iter().copied()
    }

    pub fn variance_history(&self) -> impl Iterator<Item = f64> + '_ {
        self.variance.iter().copied()
    }

    pub fn running_energy_sum(&self) -> f64 {
        self.energy_sum
    }

    pub fn running_variance_sum(&self) -> f64 {
        self.variance_sum
    }

    pub fn running_variance_max(&self) -> Option<f64> {
        self.max_q.front().map(|&(_, v)| v)
    }

    fn running_variance_min(&self) -> Option<f64> {
        self.min_q.front().map(|&(_, v)| v)
    }

    /// Appends one event, evicting the oldest when the window is full.
    pub fn push_event(&mut self, e_comb: f64, sigma_mean_sq: f64) {
        let seq = self.seq;
        self.seq += 1;

        self.energy.push_back(e_comb);
        self.variance.push_back(sigma_mean_sq);
        self.energy_sum += e_comb;
        self.variance_sum += sigma_mean_sq;

        while self.max_q.back().is_some_and(|&(_, v)| v <= sigma_mean_sq) {
            self.max_q.pop_back();
        }
        self.max_q.push_back((seq, sigma_mean_sq));
        while self.min_q.back().is_some_and(|&(_, v)| v >= sigma_mean_sq) {
            self.min_q.pop_back();
        }
        self.min_q.push_back((seq, sigma_mean_sq));

        if self.energy.len() > self.capacity {
            let old_e = self.energy.pop_front().unwrap_or(0.0);
            let old_v = self.variance.pop_front().unwrap_or(0.0);
            self.energy_sum -= old_e;
            self.variance_sum -= old_v;
            let oldest = seq + 1 - self.capacity as u64;
            while self.max_q.front().is_some_and(|&(s, _)| s < oldest) {
                self.max_q.pop_front();
            }
            while self.min_q.front().is_some_and(|&(s, _)| s < oldest) {
                self.min_q.pop_front();
            }
        }

        if self.seq % RESUM_PERIOD == 0 {
            self.energy_sum = self.energy.iter().sum();
            self.variance_sum = self.variance.iter().sum();
        }
    }

    /// Window average of the stored energies and the resulting prediction.
    pub fn predict_activity(&self, lambda_base: f64) -> Result<(f64, Hypothesis)> {
        if !self.is_full() {
            return Err(Error::WarmupIncomplete {
                have: self.len(),
                need: self.capacity,
            });
        }
        let e_avg = self.energy_sum / self.capacity as f64;
        Ok((e_avg, Hypothesis::from_present(e_avg >= lambda_base)))
    }

    /// `ρ = max σ²_mean / mean σ²_mean` over the stored window.
    pub fn estimate_rho(&self) -> Result<f64> {
        let (Some(max), Some(min)) = (self.running_variance_max(), self.running_variance_min())
        else {
            return Err(Error::invalid("variance history is empty"));
        };
        if max == min {
            return Ok(1.0);
        }
        let mean = self.variance_sum / self.len() as f64;
        // rounding in the running sum must not push ρ below one
        Ok((max / mean).max(1.0))
    }
}

/// `(1/K)·Σσ_j²` over the reported noise variances.
pub fn mean_variance(reports: &[SensingReport]) -> Result<f64> {
    if reports.is_empty() {
        return Err(Error::invalid("cannot average an empty report set"));
    }
    Ok(reports.iter().map(|r| r.est_noise_variance).sum::<f64>() / reports.len() as f64)
}

/// `λ/ρ` when H1 is predicted, `ρλ` otherwise.
pub fn dynamic_threshold(lambda_base: f64, rho: f64, predicted: Hypothesis) -> Result<f64> {
    if !(rho >= 1.0) {
        return Err(Error::InvariantViolation(format!(
            "uncertainty factor must be at least 1, got {rho}"
        )));
    }
    if !(lambda_base > 0.0) {
        return Err(Error::invalid(format!(
            "base threshold must be positive, got {lambda_base}"
        )));
    }
    Ok(match predicted {
        Hypothesis::H1 => lambda_base / rho,
        Hypothesis::H0 => rho * lambda_base,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveDecision {
    pub decision: Hypothesis,
    pub predicted: Hypothesis,
    pub e_avg: f64,
    pub rho: f64,
    pub lambda_base: f64,
    pub lambda_new: f64,
}

/// Decision for the event whose energy was pushed last, given `ρ`.
fn decide_from_state(
    state: &FusionState,
    e_comb: f64,
    rho: f64,
    lambda_base: f64,
) -> Result<AdaptiveDecision> {
    let (e_avg, predicted) = state.predict_activity(lambda_base)?;
    let lambda_new = dynamic_threshold(lambda_base, rho, predicted)?;
    Ok(AdaptiveDecision {
        decision: Hypothesis::from_present(e_comb >= lambda_new),
        predicted,
        e_avg,
        rho,
        lambda_base,
        lambda_new,
    })
}

/// Full pipeline for one event: combine, record, predict, estimate `ρ`,
/// move the threshold and decide.
///
/// The state must already hold `L−1` prior events. On a warm-up error the
/// current event has still been recorded.
pub fn decide_proposed(
    state: &mut FusionState,
    reports: &[SensingReport],
    kind: CombinerKind,
    lambda_base: f64,
) -> Result<AdaptiveDecision> {
    let e_comb = combine(kind, reports)?;
    let sigma = mean_variance(reports)?;
    state.push_event(e_comb, sigma);
    let rho = state.estimate_rho()?;
    decide_from_state(state, e_comb, rho, lambda_base)
}

/// Outcome of one event handled by [`Detector`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventOutcome {
    pub e_comb: f64,
    pub conventional: Hypothesis,
    /// `None` while the history is still warming up.
    pub adaptive: Option<AdaptiveDecision>,
}

impl EventOutcome {
    /// Proposed-scheme decision, falling back to the conventional one during
    /// warm-up.
    pub fn proposed(&self) -> Hypothesis {
        self.adaptive.map_or(self.conventional, |a| a.decision)
    }
}

/// Fusion center running both schemes side by side on one event stream.
#[derive(Debug, Clone)]
pub struct Detector {
    state: FusionState,
    kind: CombinerKind,
    lambda_base: f64,
    rho_override: Option<f64>,
}

impl Detector {
    pub fn new(kind: CombinerKind, history_len: usize, lambda_base: f64) -> Result<Self> {
        if !(lambda_base > 0.0 && lambda_base.is_finite()) {
            return Err(Error::invalid(format!(
                "base threshold must be positive, got {lambda_base}"
            )));
        }
        Ok(Detector {
            state: FusionState::new(history_len)?,
            kind,
            lambda_base,
            rho_override: None,
        })
    }

    /// Uses a fixed `ρ` instead of the estimate from the variance history.
    pub fn with_rho_override(mut self, rho: Option<f64>) -> Result<Self> {
        if let Some(r) = rho {
            if !(r >= 1.0 && r.is_finite()) {
                return Err(Error::invalid(format!("rho override must be >= 1, got {r}")));
            }
        }
        self.rho_override = rho;
        Ok(self)
    }

    pub fn state(&self) -> &FusionState {
        &self.state
    }

    pub fn lambda_base(&self) -> f64 {
        self.lambda_base
    }

    pub fn step(&mut self, reports: &[SensingReport]) -> Result<EventOutcome> {
        let e_comb = combine(self.kind, reports)?;
        let sigma = mean_variance(reports)?;
        Ok(self.step_combined(e_comb, sigma))
    }

    /// Same as [`Detector::step`] for an already combined energy.
    pub fn step_combined(&mut self, e_comb: f64, sigma_mean_sq: f64) -> EventOutcome {
        self.state.push_event(e_comb, sigma_mean_sq);
        let conventional = decide_conventional(e_comb, self.lambda_base);
        let adaptive = if self.state.is_full() {
            let rho = match self.rho_override {
                Some(r) => r,
                None => self.state.estimate_rho().unwrap_or(1.0),
            };
            decide_from_state(&self.state, e_comb, rho, self.lambda_base).ok()
        } else {
            None
        };
        EventOutcome {
            e_comb,
            conventional,
            adaptive,
        }
    }
}
