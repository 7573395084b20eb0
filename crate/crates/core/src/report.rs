//! Experiment reports, the full table reproduction run, and CSV/JSON output.
//!
//! JSON layout is versioned by [`SCHEMA_VERSION`] and documented in
//! `docs/report-schema.md`. Wall time is never serialized so that equal
//! inputs give byte-identical files.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::builder::PrepStrategy;
use crate::error::{QetError, Result};
use crate::observables::{Estimate, ModelParams};
use crate::protocol::{run_protocol, run_protocol_exact, EnergyLedger, ProtocolConfig};
use crate::symmetry::{exchange_test, translational_test, EvalMode, SymmetryReport};

pub const SCHEMA_VERSION: u32 = 1;
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// The (N, h, k) settings of the published tables.
pub const TABLE_CONFIGS: [(usize, f64, f64); 6] = [
    (3, 2.0, 1.0),
    (3, 1.0, 1.0),
    (4, 2.0, 1.0),
    (4, 1.0, 1.0),
    (5, 2.0, 1.0),
    (5, 1.0, 1.0),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunMode {
    Sampled,
    Exact,
    #[default]
    Both,
}

impl RunMode {
    pub fn sampled(self) -> bool {
        matches!(self, RunMode::Sampled | RunMode::Both)
    }

    pub fn exact(self) -> bool {
        matches!(self, RunMode::Exact | RunMode::Both)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub artifact_version: String,
    pub master_seed: u64,
    pub config: ProtocolConfig,
    pub mode: RunMode,
    pub sampled: Option<EnergyLedger>,
    pub exact: Option<EnergyLedger>,
    pub symmetry: Vec<SymmetryReport>,
    #[serde(skip)]
    pub wall_time: Option<Duration>,
}

// Wall time is a measurement of the run, not part of its result.
impl PartialEq for ExperimentReport {
    fn eq(&self, other: &Self) -> bool {
        self.schema_version == other.schema_version
            && self.artifact_version == other.artifact_version
            && self.master_seed == other.master_seed
            && self.config == other.config
            && self.mode == other.mode
            && self.sampled == other.sampled
            && self.exact == other.exact
            && self.symmetry == other.symmetry
    }
}

/// Runs the configured ledgers plus translational and reversed-order
/// exchange checks (the latter two only when there are two or more
/// receivers).
pub fn run_experiment(config: &ProtocolConfig, mode: RunMode) -> Result<ExperimentReport> {
    config.validate()?;
    let start = Instant::now();
    let sampled = mode.sampled().then(|| run_protocol(config)).transpose()?;
    let exact = mode.exact().then(|| run_protocol_exact(config)).transpose()?;

    let mut symmetry = Vec::new();
    if config.num_qubits() >= 3 {
        let reversed: Vec<usize> = config.receiver_order.iter().rev().copied().collect();
        let modes = [(mode.exact(), EvalMode::Exact), (mode.sampled(), EvalMode::Sampled)];
        for (_, m) in modes.into_iter().filter(|(on, _)| *on) {
            symmetry.push(translational_test(config, m)?);
            symmetry.push(exchange_test(config, &config.receiver_order, &reversed, m)?);
        }
    }
    Ok(ExperimentReport {
        schema_version: SCHEMA_VERSION,
        artifact_version: ARTIFACT_VERSION.to_owned(),
        master_seed: config.seed,
        config: config.clone(),
        mode,
        sampled,
        exact,
        symmetry,
        wall_time: Some(start.elapsed()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSet {
    pub schema_version: u32,
    pub artifact_version: String,
    pub master_seed: u64,
    pub experiments: Vec<ExperimentReport>,
}

/// All six table configurations, in both modes.
pub fn reproduce_all(seed: u64, shots: u64, prep: PrepStrategy) -> Result<ReportSet> {
    let experiments = TABLE_CONFIGS
        .iter()
        .map(|&(n, h, k)| {
            let cfg = ProtocolConfig::new(ModelParams::new(n, h, k)?)
                .with_seed(seed)
                .with_shots(shots)
                .with_prep(prep);
            run_experiment(&cfg, RunMode::Both)
        })
        .collect::<Result<_>>()?;
    Ok(ReportSet {
        schema_version: SCHEMA_VERSION,
        artifact_version: ARTIFACT_VERSION.to_owned(),
        master_seed: seed,
        experiments,
    })
}

impl ReportSet {
    pub fn check_complete(&self) -> Result<()> {
        for &(n, h, k) in &TABLE_CONFIGS {
            let found = self.experiments.iter().any(|e| {
                let p = e.config.params;
                p.n == n && p.h == h && p.k == k && e.sampled.is_some() && e.exact.is_some()
            });
            if !found {
                return Err(QetError::Report(format!(
                    "missing sampled+exact report for N={n}, h={h}, k={k}"
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        to_json(self)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| QetError::Report(e.to_string()))
}

pub fn report_set_from_json(text: &str) -> Result<ReportSet> {
    serde_json::from_str(text).map_err(|e| QetError::Report(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub qubits: usize,
    pub h: f64,
    pub k: f64,
    pub quantity: String,
    pub mode: EvalMode,
    pub mean: f64,
    pub stderr: f64,
    pub shots: u64,
}

/// Rank used to order quantities inside one configuration.
fn quantity_rank(q: &str) -> (u8, usize) {
    let idx = |p: &str| q.strip_prefix(p).and_then(|s| s.parse().ok()).unwrap_or(0);
    match q {
        "H_tot" => (0, 0),
        "E_o" => (2, 0),
        _ if q.starts_with("H_sub_") => (1, idx("H_sub_")),
        _ if q.starts_with("ΔE_") => (3, idx("ΔE_")),
        _ => (4, idx("H_")),
    }
}

fn ledger_rows(p: &ModelParams, mode: EvalMode, l: &EnergyLedger, out: &mut Vec<TableRow>) {
    let mut push = |quantity: String, e: &Estimate| {
        out.push(TableRow {
            qubits: p.n,
            h: p.h,
            k: p.k,
            quantity,
            mode,
            mean: e.mean,
            stderr: e.stderr,
            shots: e.shots,
        })
    };
    push("H_tot".into(), &l.h_total_post);
    for (i, e) in l.h_sub.iter().enumerate() {
        push(format!("H_sub_{}", i + 1), e);
    }
    push("E_o".into(), &Estimate::exact(l.e0));
    for (i, e) in l.harvested.iter().enumerate() {
        push(format!("ΔE_{}", i + 1), e);
    }
    for (i, e) in l.local.iter().enumerate() {
        push(format!("H_{i}"), e);
    }
}

/// One row per (quantity, mode) of every report, sorted by
/// (N, h descending, quantity, mode).
pub fn table_rows(reports: &[ExperimentReport]) -> Vec<TableRow> {
    let mut rows = Vec::new();
    for r in reports {
        let p = r.config.params;
        if let Some(l) = &r.sampled {
            ledger_rows(&p, EvalMode::Sampled, l, &mut rows);
        }
        if let Some(l) = &r.exact {
            ledger_rows(&p, EvalMode::Exact, l, &mut rows);
        }
    }
    rows.sort_by(|a, b| {
        a.qubits
            .cmp(&b.qubits)
            .then(b.h.total_cmp(&a.h))
            .then(a.k.total_cmp(&b.k))
            .then(quantity_rank(&a.quantity).cmp(&quantity_rank(&b.quantity)))
            .then((a.mode as u8).cmp(&(b.mode as u8)))
    });
    rows
}

pub fn to_csv(reports: &[ExperimentReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in table_rows(reports) {
        w.serialize(row).map_err(|e| QetError::Report(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| QetError::Report(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| QetError::Report(e.to_string()))
}

/// CSV and JSON for a complete table reproduction.
pub fn emit_tables(set: &ReportSet) -> Result<(String, String)> {
    set.check_complete()?;
    Ok((to_csv(&set.experiments)?, set.to_json()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(n: usize, h: f64, k: f64, mode: RunMode) -> ExperimentReport {
        let cfg = ProtocolConfig::new(ModelParams::new(n, h, k).unwrap())
            .with_shots(500)
            .with_seed(9);
        run_experiment(&cfg, mode).unwrap()
    }

    #[test]
    fn csv_rows_for_three_qubits() {
        let csv = to_csv(&[small(3, 2.0, 1.0, RunMode::Exact)]).unwrap();
        let quantities: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(3).unwrap()).collect();
        assert_eq!(
            quantities,
            ["H_tot", "H_sub_1", "H_sub_2", "E_o", "ΔE_1", "ΔE_2", "H_0", "H_1", "H_2"]
        );
        assert!(csv.starts_with("qubits,h,k,quantity,mode,mean,stderr,shots\n"));
    }

    #[test]
    fn rows_sorted_h_descending() {
        let reports = [small(3, 1.0, 1.0, RunMode::Exact), small(3, 2.0, 1.0, RunMode::Exact)];
        let rows = table_rows(&reports);
        assert_eq!(rows[0].h, 2.0);
        assert_eq!(rows.last().unwrap().h, 1.0);
    }

    #[test]
    fn json_round_trip() {
        let set = ReportSet {
            schema_version: SCHEMA_VERSION,
            artifact_version: ARTIFACT_VERSION.into(),
            master_seed: 9,
            experiments: vec![small(3, 1.0, 1.0, RunMode::Both)],
        };
        let json = set.to_json().unwrap();
        assert_eq!(report_set_from_json(&json).unwrap(), set);
        assert!(!json.contains("wall_time"));
    }

    #[test]
    fn incomplete_set_rejected() {
        let set = ReportSet {
            schema_version: SCHEMA_VERSION,
            artifact_version: ARTIFACT_VERSION.into(),
            master_seed: 0,
            experiments: vec![small(3, 1.0, 1.0, RunMode::Both)],
        };
        assert!(matches!(emit_tables(&set), Err(QetError::Report(_))));
    }

    #[test]
    fn exact_mode_has_zero_stderr() {
        let r = small(5, 2.0, 1.0, RunMode::Exact);
        assert!(r.sampled.is_none());
        assert!(r.exact.unwrap().all_estimates().all(|e| e.stderr == 0.0));
        assert!(r.symmetry.iter().all(|s| s.pass));
    }
}
