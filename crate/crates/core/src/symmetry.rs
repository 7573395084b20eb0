//! Receiver-symmetry checks over the sampler and the oracle.
//!
//! Translational: every receiver ends with the same local energy.
//! Exchange: permuting the measurement order leaves each receiver's reading
//! unchanged.

use serde::{Deserialize, Serialize};

use crate::error::{QetError, Result};
use crate::protocol::{check_receiver_order, run_protocol, run_protocol_exact, EnergyLedger, ProtocolConfig};
use crate::EXACT_TOL;

/// Sampled checks allow this many combined standard errors.
pub const SIGMA_THRESHOLD: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymmetryKind {
    Translational,
    Exchange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalMode {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub kind: SymmetryKind,
    pub mode: EvalMode,
    pub max_deviation: f64,
    pub threshold: f64,
    pub pass: bool,
    /// Receiver orders compared; a single entry for the translational test.
    pub orders: Vec<Vec<usize>>,
}

impl SymmetryReport {
    fn new(kind: SymmetryKind, mode: EvalMode, max_deviation: f64, threshold: f64, orders: Vec<Vec<usize>>) -> Self {
        Self {
            kind,
            mode,
            max_deviation,
            threshold,
            pass: max_deviation <= threshold,
            orders,
        }
    }
}

fn ledger(config: &ProtocolConfig, mode: EvalMode) -> Result<EnergyLedger> {
    match mode {
        EvalMode::Exact => run_protocol_exact(config),
        EvalMode::Sampled => run_protocol(config),
    }
}

/// Max pairwise spread of receiver local energies.
pub fn translational_test(config: &ProtocolConfig, mode: EvalMode) -> Result<SymmetryReport> {
    if config.num_qubits() < 3 {
        return Err(QetError::InvalidParameter(
            "translational test needs at least two receivers (N >= 3)".into(),
        ));
    }
    let l = ledger(config, mode)?;
    let receivers = &l.local[1..];
    let mut max_dev: f64 = 0.0;
    for (i, a) in receivers.iter().enumerate() {
        for b in &receivers[i + 1..] {
            max_dev = max_dev.max((a.mean - b.mean).abs());
        }
    }
    let threshold = match mode {
        EvalMode::Exact => EXACT_TOL,
        EvalMode::Sampled => {
            let worst = receivers.iter().map(|e| e.stderr).fold(0.0, f64::max);
            SIGMA_THRESHOLD * (2.0f64).sqrt() * worst
        }
    };
    Ok(SymmetryReport::new(
        SymmetryKind::Translational,
        mode,
        max_dev,
        threshold,
        vec![config.receiver_order.clone()],
    ))
}

/// Runs the protocol under two receiver orders and compares every
/// receiver-attributed quantity.
pub fn exchange_test(
    config: &ProtocolConfig,
    order_a: &[usize],
    order_b: &[usize],
    mode: EvalMode,
) -> Result<SymmetryReport> {
    let n = config.num_qubits();
    check_receiver_order(order_a, n)?;
    check_receiver_order(order_b, n)?;
    let la = ledger(&config.clone().with_order(order_a.to_vec()), mode)?;
    let lb = ledger(&config.clone().with_order(order_b.to_vec()), mode)?;

    let ha = la.harvested_by_receiver();
    let hb = lb.harvested_by_receiver();
    let pairs = std::iter::once((&la.h_total_post, &lb.h_total_post))
        .chain(std::iter::once((&la.h_sub[0], &lb.h_sub[0])))
        .chain(la.local.iter().zip(&lb.local))
        .chain(ha.values().zip(hb.values()));

    let mut max_dev: f64 = 0.0;
    let mut worst_se: f64 = 0.0;
    for (a, b) in pairs {
        max_dev = max_dev.max((a.mean - b.mean).abs());
        worst_se = worst_se.max(a.stderr.hypot(b.stderr));
    }
    let threshold = match mode {
        EvalMode::Exact => EXACT_TOL,
        EvalMode::Sampled => SIGMA_THRESHOLD * worst_se,
    };
    Ok(SymmetryReport::new(
        SymmetryKind::Exchange,
        mode,
        max_dev,
        threshold,
        vec![order_a.to_vec(), order_b.to_vec()],
    ))
}
