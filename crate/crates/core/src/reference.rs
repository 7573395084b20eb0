//! Bundled reference energies and the informational deviation report.
//!
//! `data/reference.csv` holds every row of the published 3-, 4- and 5-qubit
//! energy tables for both the noiseless simulator and the hardware device.
//! It is checked against [`REFERENCE_SHA256`] when loaded.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{QetError, Result};
use crate::observables::Estimate;
use crate::protocol::EnergyLedger;
use crate::report::ExperimentReport;
use crate::symmetry::EvalMode;

pub const REFERENCE_CSV: &str = include_str!("../data/reference.csv");
pub const REFERENCE_SHA256: &str = "6a528088da4fe2ac8a456d285b9e5852031fe4528482a7e8635146938b58dfc5";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    QasmSimulator,
    Device,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::QasmSimulator => "qasm-simulator",
            Source::Device => "device",
        }
    }
}

impl std::str::FromStr for Source {
    type Err = QetError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qasm-simulator" | "simulator" => Ok(Source::QasmSimulator),
            "device" => Ok(Source::Device),
            other => Err(QetError::Reference(format!("unknown source `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub qubits: usize,
    pub h: f64,
    pub k: f64,
    pub quantity: String,
    pub source: Source,
    pub value: f64,
    pub stderr: Option<f64>,
    /// Digits after the decimal point as printed.
    pub decimals: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceDataset {
    pub rows: Vec<ReferenceRow>,
}

fn decimals(text: &str) -> u32 {
    text.split_once('.').map_or(0, |(_, frac)| frac.len() as u32)
}

impl ReferenceDataset {
    /// The bundled tables, after verifying their checksum.
    pub fn bundled() -> Result<Self> {
        Self::parse(REFERENCE_CSV, Some(REFERENCE_SHA256))
    }

    pub fn parse(text: &str, expected_sha256: Option<&str>) -> Result<Self> {
        if let Some(want) = expected_sha256 {
            let got = hex::encode(Sha256::digest(text.as_bytes()));
            if got != want {
                return Err(QetError::Reference(format!(
                    "checksum mismatch: expected {want}, got {got}"
                )));
            }
        }
        let bad = |e: &dyn fmt::Display| QetError::Reference(e.to_string());
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| bad(&e))?;
            let field = |i: usize| {
                rec.get(i)
                    .ok_or_else(|| QetError::Reference(format!("short row: {rec:?}")))
            };
            let num = |i: usize| -> Result<f64> { field(i)?.parse::<f64>().map_err(|e| bad(&e)) };
            let stderr = match field(6)? {
                "" => None,
                s => Some(s.parse::<f64>().map_err(|e| bad(&e))?),
            };
            rows.push(ReferenceRow {
                qubits: field(0)?.parse().map_err(|e| bad(&e))?,
                h: num(1)?,
                k: num(2)?,
                quantity: field(3)?.to_owned(),
                source: field(4)?.parse()?,
                value: num(5)?,
                stderr,
                decimals: decimals(field(5)?),
            });
        }
        Ok(Self { rows })
    }

    pub fn select(&self, qubits: usize, h: f64, k: f64, source: Source) -> Vec<&ReferenceRow> {
        self.rows
            .iter()
            .filter(|r| r.qubits == qubits && r.h == h && r.k == k && r.source == source)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeviationStatus {
    Match,
    ReconstructionGap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationRow {
    pub quantity: String,
    pub artifact: Estimate,
    pub reference_value: f64,
    pub reference_stderr: Option<f64>,
    /// `|artifact − reference|` with the artifact truncated to the printed
    /// precision of the reference value.
    pub deviation: f64,
    pub raw_deviation: f64,
    /// Deviation over the combined standard error, when one is defined.
    pub sigma_ratio: Option<f64>,
    pub status: DeviationStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationTable {
    pub qubits: usize,
    pub h: f64,
    pub k: f64,
    pub source: Source,
    pub basis: EvalMode,
    pub rows: Vec<DeviationRow>,
}

fn truncate(x: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    // Nudge so values that print exactly are not pushed down a unit.
    (x * scale + 1e-9).trunc() / scale
}

/// Ledger value compared against a named table row.
///
/// The tables' per-qubit `H_n` rows equal `H_sub(n−1) − H_sub(n)` with
/// `H_sub(0) = H_tot`, so that difference is what they are compared to.
fn artifact_value(ledger: &EnergyLedger, quantity: &str) -> Option<Estimate> {
    if quantity == "H_tot" {
        return Some(ledger.h_total_post);
    }
    if quantity == "E_o" {
        return Some(Estimate::exact(ledger.e0));
    }
    if let Some(m) = quantity.strip_prefix("H_sub_") {
        let m: usize = m.parse().ok()?;
        return ledger.h_sub.get(m.checked_sub(1)?).copied();
    }
    let n: usize = quantity.strip_prefix("H_")?.parse().ok()?;
    match n {
        0 => None,
        1 => {
            let sub1 = ledger.h_sub.first()?;
            Some(Estimate {
                mean: ledger.h_total_post.mean - sub1.mean,
                stderr: ledger.local[0].stderr,
                shots: ledger.local[0].shots,
            })
        }
        n => ledger.harvested.get(n - 2).copied(),
    }
}

/// Builds the deviation table for one configuration. Purely informational:
/// only a missing reference or an unmapped quantity is an error.
pub fn compare_reference(
    report: &ExperimentReport,
    dataset: &ReferenceDataset,
    source: Source,
) -> Result<DeviationTable> {
    let p = report.config.params;
    let (ledger, basis) = match (&report.exact, &report.sampled) {
        (Some(l), _) => (l, EvalMode::Exact),
        (None, Some(l)) => (l, EvalMode::Sampled),
        (None, None) => return Err(QetError::Report("report has no ledger".into())),
    };
    let refs = dataset.select(p.n, p.h, p.k, source);
    if refs.is_empty() {
        return Err(QetError::Reference(format!(
            "no {} rows for N={}, h={}, k={}",
            source.as_str(),
            p.n,
            p.h,
            p.k
        )));
    }
    let rows = refs
        .into_iter()
        .map(|r| {
            let artifact = artifact_value(ledger, &r.quantity)
                .ok_or_else(|| QetError::Reference(format!("no ledger entry for `{}`", r.quantity)))?;
            let deviation = (truncate(artifact.mean, r.decimals) - r.value).abs();
            let combined = artifact.stderr.hypot(r.stderr.unwrap_or(0.0));
            Ok(DeviationRow {
                quantity: r.quantity.clone(),
                artifact,
                reference_value: r.value,
                reference_stderr: r.stderr,
                deviation,
                raw_deviation: (artifact.mean - r.value).abs(),
                sigma_ratio: (combined > 0.0).then(|| deviation / combined),
                status: if deviation <= 1e-9 {
                    DeviationStatus::Match
                } else {
                    DeviationStatus::ReconstructionGap
                },
            })
        })
        .collect::<Result<_>>()?;
    Ok(DeviationTable {
        qubits: p.n,
        h: p.h,
        k: p.k,
        source,
        basis,
        rows,
    })
}

impl fmt::Display for DeviationTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "N={} h={} k={} vs {} ({:?} ledger)",
            self.qubits,
            self.h,
            self.k,
            self.source.as_str(),
            self.basis
        )?;
        writeln!(
            f,
            "{:<10} {:>18} {:>18} {:>10} {:>8}  status",
            "quantity", "artifact", "reference", "deviation", "sigma"
        )?;
        for r in &self.rows {
            let reference = match r.reference_stderr {
                Some(s) => format!("{:.4} ± {:.4}", r.reference_value, s),
                None => format!("{:.4}", r.reference_value),
            };
            let sigma = r.sigma_ratio.map_or("-".to_owned(), |s| format!("{s:.1}"));
            let status = match r.status {
                DeviationStatus::Match => "match",
                DeviationStatus::ReconstructionGap => "reconstruction gap",
            };
            writeln!(
                f,
                "{:<10} {:>18} {:>18} {:>10.4} {:>8}  {status}",
                r.quantity,
                r.artifact.to_string(),
                reference,
                r.deviation,
                sigma
            )?;
        }
        Ok(())
    }
}
