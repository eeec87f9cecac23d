//! Seeded Monte Carlo campaigns: forced-regime rates, ROC curves, parameter
//! sweeps and the CR-count equivalence search.

pub mod rng;
pub mod roc;
pub mod scenario;
pub mod sim;

pub use roc::{
    auc, auc_with_se, equivalence_search, expected_rho, roc_pair, roc_sweep, simulate_pair,
    sweep_param, theory_point, EquivalenceResult, RocCurve, RocPoint, SweepParam, TheoryPoint,
};
pub use scenario::{log_grid, ChannelKind, EnergySynthesis, PuModel, Scenario};
pub use sim::{
    binomial_sd, run_markov, run_paired, run_regime, MarkovRates, MarkovReport, PairedRates,
    RegimeRate, Scheme,
};
