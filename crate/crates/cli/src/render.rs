//! Aligned-column text output.

use std::fmt::Write;

use qet_core::report::{table_rows, TableRow};
use qet_core::{DeviationTable, EvalMode, ExperimentReport, SymmetryReport};

fn mode_name(m: EvalMode) -> &'static str {
    match m {
        EvalMode::Exact => "exact",
        EvalMode::Sampled => "sampled",
    }
}

pub fn rows(rows: &[TableRow]) -> String {
    let mut out = String::new();
    let mut last = None;
    for r in rows {
        let key = (r.qubits, r.h.to_bits(), r.k.to_bits());
        if last != Some(key) {
            if last.is_some() {
                out.push('\n');
            }
            let _ = writeln!(out, "N={} h={} k={}", r.qubits, r.h, r.k);
            let _ = writeln!(
                out,
                "{:<10} {:<8} {:>10} {:>10} {:>8}",
                "quantity", "mode", "mean", "stderr", "shots"
            );
            last = Some(key);
        }
        let _ = writeln!(
            out,
            "{:<10} {:<8} {:>10.4} {:>10.4} {:>8}",
            r.quantity,
            mode_name(r.mode),
            r.mean,
            r.stderr,
            r.shots
        );
    }
    out
}

pub fn symmetry(r: &SymmetryReport) -> String {
    let orders: Vec<String> = r
        .orders
        .iter()
        .map(|o| o.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(","))
        .collect();
    format!(
        "{:<13} {:<7} {}  max deviation {:.3e}  threshold {:.3e}  orders [{}]",
        format!("{:?}", r.kind).to_lowercase(),
        mode_name(r.mode),
        if r.pass { "PASS" } else { "FAIL" },
        r.max_deviation,
        r.threshold,
        orders.join(" | ")
    )
}

pub fn report(r: &ExperimentReport) -> String {
    let c = &r.config;
    let mut out = format!(
        "seed {}  shots {}  prep {:?}  order {:?}  E0 {:.6}\n",
        r.master_seed,
        c.shots,
        c.prep,
        c.receiver_order,
        qet_core::e0(c.params.h, c.params.k, c.e0_convention).unwrap_or(f64::NAN)
    );
    out.push_str(&rows(&table_rows(std::slice::from_ref(r))));
    if !r.symmetry.is_empty() {
        out.push('\n');
        for s in &r.symmetry {
            out.push_str(&symmetry(s));
            out.push('\n');
        }
    }
    out
}

/// Device deviation table with the simulator reference column alongside.
pub fn side_by_side(sim: &DeviationTable, dev: &DeviationTable) -> String {
    let mut out = format!(
        "N={} h={} k={} vs device ({:?} ledger)\n",
        dev.qubits, dev.h, dev.k, dev.basis
    );
    let _ = writeln!(
        out,
        "{:<10} {:>18} {:>18} {:>18} {:>10}",
        "quantity", "artifact", "simulator", "device", "deviation"
    );
    let cell = |v: f64, s: Option<f64>| match s {
        Some(s) => format!("{v:.4} ± {s:.4}"),
        None => format!("{v:.4}"),
    };
    for d in &dev.rows {
        let s = sim
            .rows
            .iter()
            .find(|s| s.quantity == d.quantity)
            .map_or("-".to_owned(), |s| cell(s.reference_value, s.reference_stderr));
        let _ = writeln!(
            out,
            "{:<10} {:>18} {:>18} {:>18} {:>10.4}",
            d.quantity,
            d.artifact.to_string(),
            s,
            cell(d.reference_value, d.reference_stderr),
            d.deviation
        );
    }
    out
}
