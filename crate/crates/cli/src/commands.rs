//! Subcommand dispatch and artifact writing.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use css_lab::fusion::{cfar_threshold, CombinerKind};
use css_lab::harness::{
    equivalence_search, expected_rho, run_markov, simulate_pair, sweep_param, PuModel, RocCurve,
    Scenario, SweepParam,
};
use css_lab::theory::{
    predictor_prob, qd_awgn_approx, qd_awgn_exact, qd_proposed_awgn, qd_proposed_rayleigh,
    qd_rayleigh, qfa_approx, qfa_exact, qfa_proposed,
};
use serde::Serialize;

use crate::error::{io, CliError};
use crate::format::num;
use crate::scenario_file::scenario_digest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Subcommand {
    Roc,
    SweepL,
    SweepK,
    Compare,
    Equivalence,
    TheoryTable,
}

impl Subcommand {
    pub fn as_str(self) -> &'static str {
        match self {
            Subcommand::Roc => "roc",
            Subcommand::SweepL => "sweep-l",
            Subcommand::SweepK => "sweep-k",
            Subcommand::Compare => "compare",
            Subcommand::Equivalence => "equivalence",
            Subcommand::TheoryTable => "theory-table",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Variant {
    pub scenario_digest: String,
    pub label: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub subcommand: String,
    pub scenario_digest: String,
    pub started_at: String,
    pub outputs: Vec<PathBuf>,
    /// Derived scenarios whose digests appear in the CSV rows.
    pub variants: Vec<Variant>,
    pub warnings: Vec<String>,
}

pub const ROC_HEADER: &str = "scenario_digest,combiner,scheme,target_pfa,lambda,empirical_pfa,empirical_pfa_ci,empirical_pd,empirical_pd_ci,theory_pfa,theory_pd,trials,seed";

pub const AUC_HEADER: &str = "scenario_digest,combiner,scheme,num_crs,history_len,auc,auc_se";

pub const THEORY_HEADER: &str = "scenario_digest,combiner,target_pfa,lambda,rho,qfa_exact,qfa_approx,qd_awgn_exact,qd_awgn_approx,qd_rayleigh,predictor_h0,predictor_h1,qfa_proposed,qd_proposed_awgn,qd_proposed_rayleigh";

const TRANSITIONS_HEADER: &str = "scenario_digest,combiner,scheme,target_pfa,lambda,events,transitions,pfa,pd,pfa_transition,pd_transition,pfa_steady,pd_steady,excess_false_alarm,excess_missed_detection";

const PLOT_ROC: &str = include_str!("plot_roc.py");
const PLOT_THEORY: &str = include_str!("plot_theory.py");

/// Values swept when none are given.
pub fn default_values(cmd: Subcommand) -> Vec<usize> {
    match cmd {
        Subcommand::SweepL => vec![5, 10, 15, 20],
        Subcommand::SweepK => vec![1, 3, 5, 7],
        Subcommand::Equivalence => (1..=20).chain((25..=120).step_by(5)).collect(),
        _ => Vec::new(),
    }
}

struct Out {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Out {
    fn write(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(io(&path))?;
        self.files.push(PathBuf::from(name));
        Ok(())
    }
}

fn roc_rows(buf: &mut String, curve: &RocCurve) {
    let sc = &curve.scenario;
    let digest = scenario_digest(sc);
    for p in &curve.points {
        let _ = writeln!(
            buf,
            "{digest},{},{},{},{},{},{},{},{},{},{},{},{}",
            sc.combiner,
            curve.scheme.as_str(),
            num(p.target_pfa),
            num(p.lambda),
            num(p.empirical_pfa),
            num(p.empirical_pfa_ci),
            num(p.empirical_pd),
            num(p.empirical_pd_ci),
            num(p.theory_pfa),
            num(p.theory_pd),
            p.trials,
            sc.seed,
        );
    }
}

fn auc_row(buf: &mut String, curve: &RocCurve) {
    let sc = &curve.scenario;
    let _ = writeln!(
        buf,
        "{},{},{},{},{},{},{}",
        scenario_digest(sc),
        sc.combiner,
        curve.scheme.as_str(),
        sc.num_crs,
        sc.history_len,
        num(curve.auc),
        num(curve.auc_se),
    );
}

fn variant(sc: &Scenario, label: String) -> Variant {
    Variant { scenario_digest: scenario_digest(sc), label }
}

/// Runs `cmd` on `sc`, writing CSV tables, a plot script and `manifest.json`
/// into `out_dir`. `values` overrides the swept values of `sweep-l`,
/// `sweep-k` and `equivalence`.
pub fn run_command(
    cmd: Subcommand,
    sc: &Scenario,
    out_dir: &Path,
    values: Option<&[usize]>,
) -> Result<RunManifest, CliError> {
    sc.validate()?;
    let started_at = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    fs::create_dir_all(out_dir).map_err(io(out_dir))?;
    let values = values.map_or_else(|| default_values(cmd), <[usize]>::to_vec);
    let mut out = Out { dir: out_dir.to_path_buf(), files: Vec::new() };
    let mut variants = Vec::new();
    let mut warnings = Vec::new();
    let mut roc = format!("{ROC_HEADER}\n");
    let mut aucs = format!("{AUC_HEADER}\n");

    match cmd {
        Subcommand::Roc => {
            let (c, p) = simulate_pair(sc, true)?;
            warnings.extend(c.warnings.iter().cloned());
            roc_rows(&mut roc, &c);
            roc_rows(&mut roc, &p);
            out.write("roc.csv", &roc)?;
            if matches!(sc.pu_model, PuModel::Markov { .. }) {
                out.write("transitions.csv", &transitions(sc)?)?;
            }
            out.write("plot_roc.py", PLOT_ROC)?;
        }
        Subcommand::Compare => {
            for kind in CombinerKind::ALL {
                let v = Scenario { combiner: kind, ..sc.clone() };
                variants.push(variant(&v, format!("combiner={kind}")));
                let (c, p) = simulate_pair(&v, true)?;
                warnings.extend(c.warnings.iter().cloned());
                for curve in [&c, &p] {
                    roc_rows(&mut roc, curve);
                    auc_row(&mut aucs, curve);
                }
            }
            out.write("roc.csv", &roc)?;
            out.write("auc.csv", &aucs)?;
            out.write("plot_roc.py", PLOT_ROC)?;
        }
        Subcommand::SweepL | Subcommand::SweepK => {
            let param = if cmd == Subcommand::SweepL { SweepParam::HistoryLen } else { SweepParam::NumCrs };
            let curves = sweep_param(sc, param, &values)?;
            for (v, curve) in values.iter().zip(&curves) {
                variants.push(variant(&curve.scenario, format!("{}={v}", param.key())));
                warnings.extend(curve.warnings.iter().cloned());
                roc_rows(&mut roc, curve);
                auc_row(&mut aucs, curve);
            }
            out.write("roc.csv", &roc)?;
            out.write("auc.csv", &aucs)?;
            out.write("plot_roc.py", PLOT_ROC)?;
        }
        Subcommand::Equivalence => {
            let r = equivalence_search(sc, &values)?;
            let k_conv = r.k_match.unwrap_or_else(|| r.conventional.last().map_or(sc.num_crs, |c| c.0));
            let (_, prop) = simulate_pair(sc, false)?;
            let conv_sc = Scenario { num_crs: k_conv, ..sc.clone() };
            let (conv, _) = simulate_pair(&conv_sc, false)?;
            auc_row(&mut aucs, &prop);
            for &(k, auc) in &r.conventional {
                let v = Scenario { num_crs: k, ..sc.clone() };
                variants.push(variant(&v, format!("num_crs={k}")));
                let _ = writeln!(
                    aucs,
                    "{},{},conventional,{k},{},{},",
                    scenario_digest(&v),
                    sc.combiner,
                    sc.history_len,
                    num(auc)
                );
            }
            roc_rows(&mut roc, &prop);
            roc_rows(&mut roc, &conv);
            out.write("roc.csv", &roc)?;
            out.write("auc.csv", &aucs)?;
            let json = serde_json::to_string_pretty(&r).expect("serializable") + "\n";
            out.write("equivalence.json", &json)?;
            out.write("plot_roc.py", PLOT_ROC)?;
        }
        Subcommand::TheoryTable => {
            let mut t = format!("{THEORY_HEADER}\n");
            for kind in CombinerKind::ALL {
                let v = Scenario { combiner: kind, ..sc.clone() };
                variants.push(variant(&v, format!("combiner={kind}")));
                theory_rows(&mut t, &v)?;
            }
            out.write("theory.csv", &t)?;
            out.write("plot_theory.py", PLOT_THEORY)?;
        }
    }

    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        subcommand: cmd.as_str().to_string(),
        scenario_digest: scenario_digest(sc),
        started_at,
        outputs: out.files.iter().cloned().chain([PathBuf::from("manifest.json")]).collect(),
        variants,
        warnings,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("serializable") + "\n";
    out.write("manifest.json", &json)?;
    Ok(manifest)
}

/// Every theory quantity at each grid point of `sc`, using the expected
/// uncertainty factor for the dual-threshold forms.
pub fn theory_rows(buf: &mut String, sc: &Scenario) -> Result<(), CliError> {
    let cfg = sc.fusion_config()?;
    let rho = expected_rho(sc)?;
    let base = sc.theory_params()?;
    let g = base.awgn_gamma();
    let h0 = base.with_rho(rho)?.with_m(0)?;
    let h1 = base.with_rho(rho)?.with_m(sc.history_len)?;
    let digest = scenario_digest(sc);
    for &target in &sc.pfa_grid {
        let l = cfar_threshold(&cfg, target)?;
        let vals = [
            qfa_exact(&base, l)?,
            qfa_approx(&base, l),
            qd_awgn_exact(&base, l, g)?,
            qd_awgn_approx(&base, l, g),
            qd_rayleigh(&base, l)?,
            predictor_prob(&h0, l, g)?,
            predictor_prob(&h1, l, g)?,
            qfa_proposed(&h0, l, g)?,
            qd_proposed_awgn(&h1, l, g)?,
            qd_proposed_rayleigh(&h1, l)?,
        ];
        let _ = write!(buf, "{digest},{},{},{},{}", sc.combiner, num(target), num(l), num(rho));
        for v in vals {
            let _ = write!(buf, ",{}", num(v));
        }
        buf.push('\n');
    }
    Ok(())
}

fn transitions(sc: &Scenario) -> Result<String, CliError> {
    let cfg = sc.fusion_config()?;
    let digest = scenario_digest(sc);
    let mut buf = format!("{TRANSITIONS_HEADER}\n");
    for &target in &sc.pfa_grid {
        let l = cfar_threshold(&cfg, target)?;
        let r = run_markov(sc, l)?;
        for (scheme, m) in [("conventional", &r.conventional), ("proposed", &r.proposed)] {
            let _ = write!(buf, "{digest},{},{scheme},{},{},{},{}", sc.combiner, num(target), num(l), r.events, r.transitions);
            for v in [
                m.pfa,
                m.pd,
                m.pfa_transition,
                m.pd_transition,
                m.pfa_steady,
                m.pd_steady,
                m.excess_false_alarm,
                m.excess_missed_detection,
            ] {
                let _ = write!(buf, ",{}", num(v));
            }
            buf.push('\n');
        }
    }
    Ok(buf)
}
