//! Entanglement-preparation circuits.
//!
//! Both W-distribution strategies move a single excitation that starts on
//! qubit 0 across a block of qubits with the same two-gate split: a
//! controlled-Ry on the receiving qubit followed by a CNOT back onto the
//! source. Routing `r` of `m` equal shares away from the source uses
//! `θ = 2·acos(√((m−r)/m))`, so the source keeps `(m−r)/m` of the weight.
//! The vacuum is never touched because every gate is controlled on a qubit
//! that is `|0⟩` there.

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{QetError, Result};
use crate::gate::GateOp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrepStrategy {
    /// Hand the excitation down the chain one qubit at a time; depth 2(n−1).
    LinearCascade,
    /// Halve the block at every level; depth 2⌈log₂ n⌉.
    #[default]
    LogDepthTree,
}

/// Splits the excitation held by `source` so that `moved/total` of its
/// weight ends up on `dest`.
fn split(circuit: &mut Circuit, source: usize, dest: usize, moved: usize, total: usize) -> Result<()> {
    let keep = (total - moved) as f64 / total as f64;
    let theta = 2.0 * keep.sqrt().acos();
    circuit.push(GateOp::cry(theta, source, dest))?;
    circuit.push(GateOp::cnot(dest, source))?;
    Ok(())
}

fn linear_cascade(circuit: &mut Circuit, n: usize) -> Result<()> {
    for i in 0..n.saturating_sub(1) {
        split(circuit, i, i + 1, n - i - 1, n - i)?;
    }
    Ok(())
}

fn log_tree(circuit: &mut Circuit, n: usize) -> Result<()> {
    // Breadth-first so each level's gates are adjacent in the op list.
    let mut blocks = vec![(0usize, n)];
    while blocks.iter().any(|&(_, size)| size > 1) {
        let mut next = Vec::with_capacity(blocks.len() * 2);
        for &(lo, size) in &blocks {
            if size == 1 {
                next.push((lo, size));
                continue;
            }
            let left = size.div_ceil(2);
            let right = size - left;
            split(circuit, lo, lo + left, right, size)?;
            next.push((lo, left));
            next.push((lo + left, right));
        }
        blocks = next;
    }
    Ok(())
}

/// Circuit mapping `|10…0⟩ ↦ |W_n⟩` and fixing `|0…0⟩`.
pub fn build_w_distribution(n: usize, strategy: PrepStrategy) -> Result<Circuit> {
    let mut circuit = Circuit::new(n)?;
    match strategy {
        PrepStrategy::LinearCascade => linear_cascade(&mut circuit, n)?,
        PrepStrategy::LogDepthTree => log_tree(&mut circuit, n)?,
    }
    Ok(circuit)
}

/// Prepares `(k|0…0⟩ + h|W_n⟩)/√(h²+k²)` from the vacuum.
pub fn build_initial_state(n: usize, h: f64, k: f64, strategy: PrepStrategy) -> Result<Circuit> {
    check_weights(h, k)?;
    let mut circuit = Circuit::new(n)?;
    circuit.push(GateOp::ry(2.0 * h.atan2(k), 0))?;
    circuit.extend(&build_w_distribution(n, strategy)?)?;
    Ok(circuit)
}

/// Same as [`build_initial_state`] but distributing only over the first
/// `n − 1` qubits, leaving the last one in `|0⟩`. Negative control for the
/// receiver-symmetry checks.
pub fn build_truncated_initial_state(n: usize, h: f64, k: f64, strategy: PrepStrategy) -> Result<Circuit> {
    check_weights(h, k)?;
    if n < 2 {
        return Err(QetError::InvalidParameter(
            "truncated preparation needs at least 2 qubits".into(),
        ));
    }
    let mut circuit = Circuit::new(n)?;
    circuit.push(GateOp::ry(2.0 * h.atan2(k), 0))?;
    match strategy {
        PrepStrategy::LinearCascade => linear_cascade(&mut circuit, n - 1)?,
        PrepStrategy::LogDepthTree => log_tree(&mut circuit, n - 1)?,
    }
    Ok(circuit)
}

/// `(|0…0⟩ + |1…1⟩)/√2`.
pub fn build_ghz(n: usize) -> Result<Circuit> {
    if n < 2 {
        return Err(QetError::InvalidParameter(format!(
            "GHZ state needs at least 2 qubits, got {n}"
        )));
    }
    let mut circuit = Circuit::new(n)?;
    circuit.push(GateOp::h(0))?;
    for q in 1..n {
        circuit.push(GateOp::cnot(q - 1, q))?;
    }
    Ok(circuit)
}

pub(crate) fn check_weights(h: f64, k: f64) -> Result<()> {
    if !(h.is_finite() && k.is_finite()) || h < 0.0 || k < 0.0 {
        return Err(QetError::InvalidParameter(format!(
            "weights must be finite and non-negative, got h={h}, k={k}"
        )));
    }
    if h == 0.0 && k == 0.0 {
        return Err(QetError::ZeroWeights);
    }
    Ok(())
}
