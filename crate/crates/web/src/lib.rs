//! Browser bindings. Every export takes and returns JSON text so the page
//! needs no generated type glue.

use std::collections::BTreeMap;

use css_lab::fusion::cfar_threshold;
use css_lab::harness::{log_grid, simulate_pair, ChannelKind, RocCurve, Scenario};
use css_lab::theory::{
    avg_stats, predictor_prob, qd_awgn_exact, qd_proposed_awgn, qd_proposed_rayleigh,
    qd_rayleigh, qfa_approx, qfa_proposed,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use wasm_bindgen::prelude::*;

/// Monte Carlo in the page is capped to keep it interactive.
pub const MAX_TRIALS: usize = 20_000;

#[derive(Debug, Clone, Deserialize)]
struct Request {
    #[serde(default)]
    scenario: BTreeMap<String, Value>,
    /// Uncertainty factor for the theory curves; 1 disables the dual threshold.
    #[serde(default = "one")]
    rho: f64,
    #[serde(default = "grid_points")]
    points: usize,
    #[serde(default = "tenth")]
    target_pfa: f64,
}

fn one() -> f64 {
    1.0
}

fn grid_points() -> usize {
    25
}

fn tenth() -> f64 {
    0.1
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Curve {
    pub scheme: String,
    pub pfa: Vec<f64>,
    pub pd: Vec<f64>,
    pub auc: Option<f64>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RocView {
    pub curves: Vec<Curve>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ThresholdView {
    pub lambda: f64,
    pub lambda_low: f64,
    pub lambda_high: f64,
    pub x: Vec<f64>,
    pub pdf_h0: Vec<f64>,
    pub pdf_h1: Vec<f64>,
    pub predictor_h0: f64,
    pub predictor_h1: f64,
}

fn parse(json: &str) -> Result<(Request, Scenario), String> {
    let req: Request = serde_json::from_str(json).map_err(|e| e.to_string())?;
    let mut sc = Scenario::default();
    for (k, v) in &req.scenario {
        let text = match v {
            Value::String(s) => s.clone(),
            Value::Array(items) => items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
            other => other.to_string(),
        };
        sc.set(k, &text).map_err(|e| e.to_string())?;
    }
    sc.validate().map_err(|e| e.to_string())?;
    if !(req.rho >= 1.0 && req.rho.is_finite()) {
        return Err("rho must be at least 1".into());
    }
    if !(2..=200).contains(&req.points) {
        return Err("points must be between 2 and 200".into());
    }
    Ok((req, sc))
}

fn theory_curves(req: &Request, sc: &Scenario) -> css_lab::Result<RocView> {
    let cfg = sc.fusion_config()?;
    let base = sc.theory_params()?;
    let g = base.awgn_gamma();
    let h0 = base.with_rho(req.rho)?.with_m(0)?;
    let h1 = base.with_rho(req.rho)?.with_m(sc.history_len)?;
    let mut conv = Curve { scheme: "conventional".into(), pfa: vec![], pd: vec![], auc: None };
    let mut prop = Curve { scheme: "proposed".into(), pfa: vec![], pd: vec![], auc: None };
    for t in log_grid(1e-3, 0.99, req.points) {
        let l = cfar_threshold(&cfg, t)?;
        conv.pfa.push(qfa_approx(&base, l));
        prop.pfa.push(qfa_proposed(&h0, l, g)?);
        match sc.channel {
            ChannelKind::Rayleigh => {
                conv.pd.push(qd_rayleigh(&base, l)?);
                prop.pd.push(qd_proposed_rayleigh(&h1, l)?);
            }
            ChannelKind::Awgn => {
                conv.pd.push(qd_awgn_exact(&base, l, g)?);
                prop.pd.push(qd_proposed_awgn(&h1, l, g)?);
            }
        }
    }
    Ok(RocView { curves: vec![conv, prop] })
}

fn to_curve(c: &RocCurve) -> Curve {
    Curve {
        scheme: c.scheme.as_str().into(),
        pfa: c.points.iter().map(|p| p.empirical_pfa).collect(),
        pd: c.points.iter().map(|p| p.empirical_pd).collect(),
        auc: Some(c.auc),
    }
}

fn threshold(req: &Request, sc: &Scenario) -> css_lab::Result<ThresholdView> {
    let base = sc.theory_params()?;
    let g = base.awgn_gamma();
    let lambda = cfar_threshold(&sc.fusion_config()?, req.target_pfa)?;
    let h0 = base.with_rho(req.rho)?.with_m(0)?;
    let h1 = base.with_rho(req.rho)?.with_m(sc.history_len)?;
    // single-event Gaussian densities of the combined energy
    let n = base.l as f64;
    let (mean0, var0) = avg_stats(&h0, g)?;
    let (mean1, var1) = avg_stats(&h1, g)?;
    let (var0, var1) = (var0 * n, var1 * n);
    let lo = (mean0 - 5.0 * var0.sqrt()).min(lambda / req.rho * 0.98);
    let hi = (mean1 + 5.0 * var1.sqrt()).max(lambda * req.rho * 1.02);
    let pdf = |x: f64, m: f64, v: f64| (-(x - m).powi(2) / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt();
    let x: Vec<f64> = (0..200).map(|i| lo + (hi - lo) * i as f64 / 199.0).collect();
    Ok(ThresholdView {
        lambda,
        lambda_low: lambda / req.rho,
        lambda_high: lambda * req.rho,
        pdf_h0: x.iter().map(|&t| pdf(t, mean0, var0)).collect(),
        pdf_h1: x.iter().map(|&t| pdf(t, mean1, var1)).collect(),
        x,
        predictor_h0: predictor_prob(&h0, lambda, g)?,
        predictor_h1: predictor_prob(&h1, lambda, g)?,
    })
}

fn reply<T: Serialize>(r: css_lab::Result<T>) -> Result<String, String> {
    r.map(|v| serde_json::to_string(&v).expect("serializable")).map_err(|e| e.to_string())
}

/// Conventional and dual-threshold ROC curves from the closed forms.
#[wasm_bindgen]
pub fn theory_roc(request: &str) -> Result<String, String> {
    let (req, sc) = parse(request)?;
    reply(theory_curves(&req, &sc))
}

/// Monte Carlo ROC curves of both schemes on the same events.
#[wasm_bindgen]
pub fn simulate_roc(request: &str) -> Result<String, String> {
    let (_, mut sc) = parse(request)?;
    sc.trials = sc.trials.min(MAX_TRIALS);
    reply(simulate_pair(&sc, false).map(|(c, p)| RocView { curves: vec![to_curve(&c), to_curve(&p)] }))
}

/// Base and shifted thresholds against the single-event energy densities.
#[wasm_bindgen]
pub fn threshold_view(request: &str) -> Result<String, String> {
    let (req, sc) = parse(request)?;
    if !(req.target_pfa > 0.0 && req.target_pfa < 1.0) {
        return Err("target_pfa must lie in (0, 1)".into());
    }
    reply(threshold(&req, &sc))
}
