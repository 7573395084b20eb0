//! Exhaustive measurement-branch enumeration and reduced-state diagnostics.
//!
//! The oracle never samples: every `Measure` op splits the current branch
//! into its (at most two) Born-weighted outcomes, giving exact averages to
//! check sampled estimates against.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{QetError, Result};
use crate::gate::GateOp;
use crate::observables::{exact_expectation, ObservableSpec};
use crate::pauli::{Pauli, PauliString};
use crate::state::{ClassicalRecord, QuantumState};
use crate::{PROB_SUM_TOL, PRUNE_PROB};

pub const MAX_MEASUREMENTS: usize = 20;

/// Partial-transpose eigenvalues below this count as entangled.
pub const PPT_THRESHOLD: f64 = -1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    /// Outcome of each executed measurement, in program order.
    pub outcomes: Vec<u8>,
    pub record: ClassicalRecord,
    pub probability: f64,
    pub state: QuantumState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchDistribution {
    pub branches: Vec<Branch>,
}

impl BranchDistribution {
    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }

    /// Probability that classical bit `bit` reads `value`.
    pub fn bit_probability(&self, bit: usize, value: u8) -> f64 {
        self.branches
            .iter()
            .filter(|b| b.record.get(bit) == Some(value))
            .map(|b| b.probability)
            .sum()
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }
}

/// Enumerates every outcome branch of `circuit` started from the vacuum.
pub fn enumerate_branches(circuit: &Circuit) -> Result<BranchDistribution> {
    enumerate_branches_from(circuit, QuantumState::new(circuit.num_qubits())?)
}

pub fn enumerate_branches_from(circuit: &Circuit, initial: QuantumState) -> Result<BranchDistribution> {
    let measurements = circuit.measurement_count();
    if measurements > MAX_MEASUREMENTS {
        return Err(QetError::BranchCap(measurements));
    }
    if initial.num_qubits() != circuit.num_qubits() {
        return Err(QetError::InvalidParameter(format!(
            "{}-qubit circuit enumerated from a {}-qubit state",
            circuit.num_qubits(),
            initial.num_qubits()
        )));
    }
    let mut branches = Vec::new();
    let root = Branch {
        outcomes: Vec::new(),
        record: ClassicalRecord::new(),
        probability: 1.0,
        state: initial,
    };
    expand(circuit.ops(), root, &mut branches)?;
    let dist = BranchDistribution { branches };
    debug_assert!((dist.total_probability() - 1.0).abs() < PROB_SUM_TOL * 10.0);
    Ok(dist)
}

/// Resolves classical conditions, returning the op that actually executes.
fn resolve<'a>(op: &'a GateOp, record: &ClassicalRecord) -> Result<Option<&'a GateOp>> {
    match op {
        GateOp::Conditioned { bit, value, inner } => {
            let got = record.get(*bit).ok_or(QetError::UnsetBit(*bit))?;
            if got == *value {
                resolve(inner, record)
            } else {
                Ok(None)
            }
        }
        other => Ok(Some(other)),
    }
}

fn expand(ops: &[GateOp], mut branch: Branch, out: &mut Vec<Branch>) -> Result<()> {
    for (i, op) in ops.iter().enumerate() {
        let Some(op) = resolve(op, &branch.record)? else {
            continue;
        };
        if let GateOp::Measure { target, basis, bit } = op {
            for outcome in 0..2u8 {
                let p = branch.state.outcome_probability(*target, *basis, outcome)?;
                let joint = branch.probability * p;
                if joint < PRUNE_PROB {
                    continue;
                }
                let mut child = branch.clone();
                child.state.project(*target, *basis, outcome)?;
                child.probability = joint;
                child.outcomes.push(outcome);
                child.record.set(*bit, outcome);
                expand(&ops[i + 1..], child, out)?;
            }
            return Ok(());
        }
        branch.state.apply_unitary(op)?;
    }
    out.push(branch);
    Ok(())
}

/// `Σ_b p_b ⟨O⟩_b`, renormalized by the retained probability mass.
pub fn exact_averaged_expectation(dist: &BranchDistribution, obs: &ObservableSpec) -> Result<f64> {
    let mut acc = 0.0;
    for b in &dist.branches {
        acc += b.probability * exact_expectation(&b.state, obs)?;
    }
    Ok(acc / dist.total_probability())
}

/// Density matrix of a subset of qubits. Row/column index bit order follows
/// `kept`, first entry most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState {
    pub kept: Vec<usize>,
    pub matrix: DMatrix<Complex64>,
}

/// Partial trace of `|ψ⟩⟨ψ|` over every qubit not in `keep`.
pub fn reduced_state(state: &QuantumState, keep: &[usize]) -> Result<ReducedState> {
    let n = state.num_qubits();
    if keep.is_empty() {
        return Err(QetError::InvalidParameter("keep list is empty".into()));
    }
    for (i, &q) in keep.iter().enumerate() {
        if q >= n {
            return Err(QetError::QubitIndex {
                index: q,
                num_qubits: n,
            });
        }
        if keep[..i].contains(&q) {
            return Err(QetError::DuplicateQubit(q));
        }
    }
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let dk = 1usize << keep.len();
    let de = 1usize << traced.len();

    let compose = |sys: usize, env: usize| -> usize {
        let mut idx = 0;
        for (j, &q) in keep.iter().enumerate() {
            if sys & (1 << (keep.len() - 1 - j)) != 0 {
                idx |= state.mask(q);
            }
        }
        for (j, &q) in traced.iter().enumerate() {
            if env & (1 << (traced.len() - 1 - j)) != 0 {
                idx |= state.mask(q);
            }
        }
        idx
    };

    let amp = state.amplitudes();
    let mut matrix = DMatrix::from_element(dk, dk, Complex64::new(0.0, 0.0));
    for env in 0..de {
        let column: Vec<Complex64> = (0..dk).map(|s| amp[compose(s, env)]).collect();
        for a in 0..dk {
            if column[a].norm_sqr() == 0.0 {
                continue;
            }
            for b in 0..dk {
                matrix[(a, b)] += column[a] * column[b].conj();
            }
        }
    }
    Ok(ReducedState {
        kept: keep.to_vec(),
        matrix,
    })
}

fn pauli_matrix(p: Pauli) -> DMatrix<Complex64> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let v = match p {
        Pauli::I => [c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)],
        Pauli::X => [c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)],
        Pauli::Y => [c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)],
        Pauli::Z => [c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)],
    };
    DMatrix::from_row_slice(2, 2, &v)
}

impl ReducedState {
    pub fn num_qubits(&self) -> usize {
        self.kept.len()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.matrix.clone().symmetric_eigenvalues().iter().copied().collect()
    }

    /// `Tr(ρ P)` for a Pauli string whose qubit labels refer to the original
    /// register; every factor must act on a kept qubit.
    pub fn expectation(&self, pauli: &PauliString) -> Result<f64> {
        let mut op = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        for &q in &self.kept {
            let p = pauli
                .factors()
                .iter()
                .find(|&&(fq, _)| fq == q)
                .map_or(Pauli::I, |&(_, p)| p);
            op = op.kronecker(&pauli_matrix(p));
        }
        if let Some(&(q, _)) = pauli.factors().iter().find(|(q, _)| !self.kept.contains(q)) {
            return Err(QetError::InvalidParameter(format!("qubit {q} was traced out")));
        }
        Ok(pauli.coefficient * (&self.matrix * op).trace().re)
    }

    /// Partial transpose on the second kept qubit of a two-qubit state.
    pub fn partial_transpose(&self) -> Result<DMatrix<Complex64>> {
        if self.num_qubits() != 2 {
            return Err(QetError::WrongDimension(self.num_qubits()));
        }
        let mut pt = self.matrix.clone();
        for a in 0..4 {
            for b in 0..4 {
                let (a1, a2) = (a >> 1, a & 1);
                let (b1, b2) = (b >> 1, b & 1);
                pt[((a1 << 1) | b2, (b1 << 1) | a2)] = self.matrix[(a, b)];
            }
        }
        Ok(pt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub purity: f64,
    pub min_pt_eigenvalue: f64,
    pub entangled: bool,
}

/// Purity plus the partial-transpose test, which is exact for two qubits.
pub fn entanglement_witness(red: &ReducedState) -> Result<Witness> {
    let pt = red.partial_transpose()?;
    let min = pt.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Witness {
        purity: red.purity(),
        min_pt_eigenvalue: min,
        entangled: min < PPT_THRESHOLD,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::{build_ghz, build_w_distribution, PrepStrategy};
    use crate::gate::Basis;
    use approx::assert_abs_diff_eq;

    fn w_state(n: usize) -> QuantumState {
        let c = build_w_distribution(n, PrepStrategy::LogDepthTree).unwrap();
        let mut s = QuantumState::basis(n, 1 << (n - 1)).unwrap();
        c.apply_unitary_to(&mut s).unwrap();
        s
    }

    #[test]
    fn hadamard_then_measure_splits_evenly() {
        let mut c = Circuit::new(1).unwrap();
        c.push(GateOp::h(0)).unwrap();
        c.push(GateOp::measure(0, Basis::Z, 0)).unwrap();
        let d = enumerate_branches(&c).unwrap();
        assert_eq!(d.len(), 2);
        for b in &d.branches {
            assert_abs_diff_eq!(b.probability, 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn zero_probability_branches_pruned() {
        let mut c = Circuit::new(1).unwrap();
        c.push(GateOp::measure(0, Basis::Z, 0)).unwrap();
        c.push(GateOp::measure(0, Basis::Z, 1)).unwrap();
        let d = enumerate_branches(&c).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.branches[0].outcomes, vec![0, 0]);
    }

    #[test]
    fn branch_cap_enforced() {
        let mut c = Circuit::new(1).unwrap();
        for b in 0..=MAX_MEASUREMENTS {
            c.push(GateOp::measure(0, Basis::X, b)).unwrap();
        }
        assert_eq!(enumerate_branches(&c), Err(QetError::BranchCap(21)));
    }

    #[test]
    fn conditioned_ops_resolve_per_branch() {
        let mut c = Circuit::new(2).unwrap();
        c.push(GateOp::h(0)).unwrap();
        c.push(GateOp::measure(0, Basis::Z, 0)).unwrap();
        c.push(GateOp::conditioned(0, 1, GateOp::x(1))).unwrap();
        let d = enumerate_branches(&c).unwrap();
        for b in &d.branches {
            let bit = b.record.get(0).unwrap();
            let idx = if bit == 0 { 0b00 } else { 0b11 };
            assert_abs_diff_eq!(b.state.amplitude(idx).norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn w3_pair_reduced_state() {
        let r = reduced_state(&w_state(3), &[1, 2]).unwrap();
        assert_abs_diff_eq!(r.purity(), 5.0 / 9.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.matrix[(0, 0)].re, 1.0 / 3.0, epsilon = 1e-12);
        let single_block = r.matrix[(1, 1)].re + r.matrix[(2, 2)].re;
        assert_abs_diff_eq!(single_block, 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.trace().re, 1.0, epsilon = 1e-12);
        assert!(r.hermiticity_error() < 1e-12);
        assert!(r.eigenvalues().iter().all(|&e| e > -1e-12));
    }

    #[test]
    fn product_state_is_pure() {
        let mut s = QuantumState::new(3).unwrap();
        s.apply_unitary(&GateOp::h(0)).unwrap();
        s.apply_unitary(&GateOp::ry(0.7, 2)).unwrap();
        for keep in [vec![0], vec![1, 2], vec![2, 0], vec![0, 1, 2]] {
            assert_abs_diff_eq!(reduced_state(&s, &keep).unwrap().purity(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn ghz3_measured_pair_is_product() {
        let mut s = QuantumState::new(3).unwrap();
        build_ghz(3).unwrap().apply_unitary_to(&mut s).unwrap();
        for outcome in 0..2 {
            let mut t = s.clone();
            t.project(0, Basis::Z, outcome).unwrap();
            let r = reduced_state(&t, &[1, 2]).unwrap();
            assert_abs_diff_eq!(r.purity(), 1.0, epsilon = 1e-12);
            assert!(!entanglement_witness(&r).unwrap().entangled);
        }
    }

    #[test]
    fn witness_cases() {
        let mut bell = QuantumState::new(2).unwrap();
        build_ghz(2).unwrap().apply_unitary_to(&mut bell).unwrap();
        let w = entanglement_witness(&reduced_state(&bell, &[0, 1]).unwrap()).unwrap();
        assert_abs_diff_eq!(w.purity, 1.0, epsilon = 1e-12);
        assert!(w.entangled);
        assert_abs_diff_eq!(w.min_pt_eigenvalue, -0.5, epsilon = 1e-12);

        let mut w3 = w_state(3);
        w3.project(0, Basis::Z, 0).unwrap();
        let pair = reduced_state(&w3, &[1, 2]).unwrap();
        assert!(entanglement_witness(&pair).unwrap().entangled);

        let mixed = ReducedState {
            kept: vec![0, 1],
            matrix: DMatrix::identity(4, 4) * Complex64::new(0.25, 0.0),
        };
        let m = entanglement_witness(&mixed).unwrap();
        assert_abs_diff_eq!(m.purity, 0.25, epsilon = 1e-15);
        assert!(!m.entangled);

        let one = reduced_state(&w3, &[1]).unwrap();
        assert_eq!(entanglement_witness(&one), Err(QetError::WrongDimension(1)));
    }

    #[test]
    fn reduced_expectation_matches_full() {
        let s = w_state(4);
        let r = reduced_state(&s, &[3, 1]).unwrap();
        let zz = PauliString::new(1.0, vec![(1, Pauli::Z), (3, Pauli::Z)]).unwrap();
        assert_abs_diff_eq!(
            r.expectation(&zz).unwrap(),
            s.expectation_pauli(&zz).unwrap(),
            epsilon = 1e-12
        );
        let xx = PauliString::new(1.0, vec![(1, Pauli::X), (3, Pauli::X)]).unwrap();
        assert_abs_diff_eq!(
            r.expectation(&xx).unwrap(),
            s.expectation_pauli(&xx).unwrap(),
            epsilon = 1e-12
        );
        assert!(r.expectation(&PauliString::single(1.0, 0, Pauli::Z)).is_err());
    }

    #[test]
    fn invalid_keep_lists() {
        let s = w_state(3);
        assert!(reduced_state(&s, &[]).is_err());
        assert!(reduced_state(&s, &[3]).is_err());
        assert_eq!(reduced_state(&s, &[1, 1]), Err(QetError::DuplicateQubit(1)));
    }
}
