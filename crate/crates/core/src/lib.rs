//! Cooperative spectrum sensing under noise uncertainty.
//!
//! A fusion center combines energy reports from `K` cognitive radios (SLC,
//! MRC or SLS) and decides whether the primary user is present. Besides the
//! fixed CFAR threshold, the crate implements a dual-threshold detector that
//! keeps a short history of combined energies and noise variances, predicts
//! PU activity from it and moves the threshold by the estimated noise
//! uncertainty factor.
//!
//! - [`channel`], [`sensing`]: signal model and per-CR energy measurement
//! - [`fusion`]: soft combining and the CFAR threshold
//! - [`adaptive`]: the history-based dual-threshold detector
//! - [`theory`]: exact, Gaussian and fading-averaged probabilities
//! - [`harness`]: seeded Monte Carlo campaigns and ROC curves

pub mod adaptive;
pub mod channel;
pub mod error;
pub mod fusion;
pub mod harness;
pub mod sensing;
pub mod theory;

pub use adaptive::{AdaptiveDecision, Detector, EventOutcome, FusionState};
pub use channel::{ChannelDraw, EnergySampler, Hypothesis, NoiseModel, SampleBlock};
pub use error::{Error, Result};
pub use fusion::{CombinerKind, FusionConfig, SlsInversion};
pub use sensing::SensingReport;
pub use theory::TheoryParams;
