//! Dense statevector with projective measurement and a classical register.
//!
//! Basis-state index convention: qubit 0 is the most significant bit, so for
//! three qubits index `0b100` is the ket `|100⟩` with qubit 0 excited.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QetError, Result};
use crate::gate::{Basis, GateOp, Matrix2};
use crate::pauli::{Pauli, PauliString};
use crate::{MAX_QUBITS, PRUNE_PROB};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumState {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    /// The all-zero state `|0…0⟩`.
    pub fn new(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_width(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(QetError::InvalidParameter(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { num_qubits, amplitudes })
    }

    /// Builds a state from raw amplitudes, normalizing them.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(QetError::InvalidParameter(format!(
                "amplitude vector length {dim} is not a power of two >= 2"
            )));
        }
        let num_qubits = dim.trailing_zeros() as usize;
        check_width(num_qubits)?;
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(QetError::InvalidParameter(
                "amplitude vector has zero or non-finite norm".into(),
            ));
        }
        let amplitudes = amplitudes.into_iter().map(|a| a / norm).collect();
        Ok(Self { num_qubits, amplitudes })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    /// Amplitude of a ket written as a bitstring, qubit 0 first.
    pub fn amplitude_of(&self, ket: &str) -> Result<Complex64> {
        let index = parse_ket(ket, self.num_qubits)?;
        Ok(self.amplitudes[index])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Bit mask selecting `qubit` inside a basis-state index.
    pub fn mask(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    pub fn bit(&self, index: usize, qubit: usize) -> u8 {
        u8::from(index & self.mask(qubit) != 0)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(QetError::QubitIndex {
                index: qubit,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Largest amplitude difference after removing the best global phase.
    pub fn distance_up_to_phase(&self, other: &Self) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        let overlap = other.inner(self);
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b * phase).norm())
            .fold(0.0, f64::max)
    }

    pub(crate) fn apply_matrix(&mut self, matrix: &Matrix2, controls: &[usize], target: usize) {
        let t = self.mask(target);
        let cmask = controls.iter().fold(0, |m, &c| m | self.mask(c));
        let m = &matrix.0;
        for i in 0..self.amplitudes.len() {
            if i & t != 0 || i & cmask != cmask {
                continue;
            }
            let j = i | t;
            let (a0, a1) = (self.amplitudes[i], self.amplitudes[j]);
            self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
            self.amplitudes[j] = m[1][0] * a0 + m[1][1] * a1;
        }
    }

    /// Applies a unitary or controlled unitary after validating it.
    pub fn apply_unitary(&mut self, gate: &GateOp) -> Result<()> {
        gate.validate(self.num_qubits)?;
        match gate {
            GateOp::Unitary1Q { matrix, target, .. } => self.apply_matrix(matrix, &[], *target),
            GateOp::ControlledUnitary {
                controls,
                matrix,
                target,
                ..
            } => self.apply_matrix(matrix, controls, *target),
            _ => return Err(QetError::InvalidParameter(format!("`{gate}` is not a unitary op"))),
        }
        Ok(())
    }

    /// Born probability of `outcome` when measuring `qubit` in `basis`.
    /// For the X basis outcome 0 is the projector (1+X)/2.
    pub fn outcome_probability(&self, qubit: usize, basis: Basis, outcome: u8) -> Result<f64> {
        self.check_qubit(qubit)?;
        let t = self.mask(qubit);
        let mut p = 0.0;
        for i in (0..self.amplitudes.len()).filter(|i| i & t == 0) {
            let (a0, a1) = (self.amplitudes[i], self.amplitudes[i | t]);
            p += match (basis, outcome) {
                (Basis::Z, 0) => a0.norm_sqr(),
                (Basis::Z, _) => a1.norm_sqr(),
                (Basis::X, 0) => (a0 + a1).norm_sqr() / 2.0,
                (Basis::X, _) => (a0 - a1).norm_sqr() / 2.0,
            };
        }
        Ok(p)
    }

    /// Applies the projector for `outcome` and renormalizes. Returns the
    /// probability of that outcome before collapse.
    pub fn project(&mut self, qubit: usize, basis: Basis, outcome: u8) -> Result<f64> {
        let p = self.outcome_probability(qubit, basis, outcome)?;
        if p < PRUNE_PROB {
            return Err(QetError::ZeroProbabilityBranch);
        }
        let t = self.mask(qubit);
        let scale = 1.0 / p.sqrt();
        for i in (0..self.amplitudes.len()).filter(|i| i & t == 0) {
            let j = i | t;
            let (a0, a1) = (self.amplitudes[i], self.amplitudes[j]);
            let (n0, n1) = match (basis, outcome) {
                (Basis::Z, 0) => (a0, Complex64::new(0.0, 0.0)),
                (Basis::Z, _) => (Complex64::new(0.0, 0.0), a1),
                (Basis::X, 0) => {
                    let s = (a0 + a1) * 0.5;
                    (s, s)
                }
                (Basis::X, _) => {
                    let d = (a0 - a1) * 0.5;
                    (d, -d)
                }
            };
            self.amplitudes[i] = n0 * scale;
            self.amplitudes[j] = n1 * scale;
        }
        Ok(p)
    }

    /// Samples a projective measurement by the Born rule and collapses.
    pub fn measure<R: Rng + ?Sized>(&mut self, qubit: usize, basis: Basis, rng: &mut R) -> Result<u8> {
        let p0 = self.outcome_probability(qubit, basis, 0)?;
        let outcome = if p0 < PRUNE_PROB {
            1
        } else if 1.0 - p0 < PRUNE_PROB {
            0
        } else {
            u8::from(rng.random::<f64>() >= p0)
        };
        self.project(qubit, basis, outcome)?;
        Ok(outcome)
    }

    /// Executes one circuit op, reading and writing the classical record.
    pub fn apply_gate<R: Rng + ?Sized>(
        &mut self,
        gate: &GateOp,
        record: &mut ClassicalRecord,
        rng: &mut R,
    ) -> Result<()> {
        match gate {
            GateOp::Unitary1Q { .. } | GateOp::ControlledUnitary { .. } => self.apply_unitary(gate),
            GateOp::Measure { target, basis, bit } => {
                let outcome = self.measure(*target, *basis, rng)?;
                record.set(*bit, outcome);
                Ok(())
            }
            GateOp::Conditioned { bit, value, inner } => {
                gate.validate(self.num_qubits)?;
                let got = record.get(*bit).ok_or(QetError::UnsetBit(*bit))?;
                if got == *value {
                    self.apply_gate(inner, record, rng)?;
                }
                Ok(())
            }
        }
    }

    fn apply_pauli_factors(&mut self, pauli: &PauliString) {
        let i = Complex64::i();
        for &(q, p) in pauli.factors() {
            let m = match p {
                Pauli::I => continue,
                Pauli::X => Matrix2::x(),
                Pauli::Y => Matrix2::new([[0.0.into(), -i], [i, 0.0.into()]]),
                Pauli::Z => Matrix2::z(),
            };
            self.apply_matrix(&m, &[], q);
        }
    }

    /// `⟨ψ|P|ψ⟩`; real for the Hermitian strings used here.
    pub fn expectation_pauli(&self, pauli: &PauliString) -> Result<f64> {
        if let Some(q) = pauli.max_qubit() {
            self.check_qubit(q)?;
        }
        if pauli.is_diagonal() {
            let zmask = pauli.factors().iter().fold(0, |m, &(q, _)| m | self.mask(q));
            let v: f64 = self
                .amplitudes
                .iter()
                .enumerate()
                .map(|(idx, a)| parity_sign(idx & zmask) * a.norm_sqr())
                .sum();
            return Ok(pauli.coefficient * v);
        }
        let mut image = self.clone();
        image.apply_pauli_factors(pauli);
        Ok(pauli.coefficient * self.inner(&image).re)
    }

    /// Ket label of a basis index, qubit 0 first.
    pub fn label(&self, index: usize) -> String {
        format_ket(index, self.num_qubits)
    }
}

impl fmt::Display for QuantumState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, a) in self.amplitudes.iter().enumerate() {
            if a.norm_sqr() < PRUNE_PROB {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "({:.4}{:+.4}i)|{}⟩", a.re, a.im, self.label(i))?;
        }
        Ok(())
    }
}

fn parity_sign(bits: usize) -> f64 {
    if bits.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn check_width(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(QetError::QubitCount(num_qubits));
    }
    Ok(())
}

pub fn format_ket(index: usize, num_qubits: usize) -> String {
    (0..num_qubits)
        .map(|q| {
            if index & (1 << (num_qubits - 1 - q)) != 0 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

pub fn parse_ket(ket: &str, num_qubits: usize) -> Result<usize> {
    if ket.len() != num_qubits || !ket.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(QetError::InvalidParameter(format!(
            "`{ket}` is not a {num_qubits}-bit ket label"
        )));
    }
    Ok(usize::from_str_radix(ket, 2).expect("validated bitstring"))
}

/// Measurement outcome sign: μ = (−1)^bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_bit(bit: u8) -> Self {
        if bit == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// Classical bits written by measurements, keyed by bit id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalRecord {
    bits: BTreeMap<usize, u8>,
}

impl ClassicalRecord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, bit: usize) -> Option<u8> {
        self.bits.get(&bit).copied()
    }

    pub fn set(&mut self, bit: usize, outcome: u8) {
        self.bits.insert(bit, outcome);
    }

    pub fn sign(&self, bit: usize) -> Option<Sign> {
        self.get(bit).map(Sign::from_bit)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u8)> + '_ {
        self.bits.iter().map(|(&k, &v)| (k, v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn w3() -> QuantumState {
        let a = Complex64::new(1.0, 0.0);
        let z = Complex64::new(0.0, 0.0);
        QuantumState::from_amplitudes(vec![z, a, a, z, a, z, z, z]).unwrap()
    }

    #[test]
    fn hadamard_on_zero() {
        let mut s = QuantumState::new(1).unwrap();
        s.apply_unitary(&GateOp::h(0)).unwrap();
        assert_abs_diff_eq!(s.amplitude(0).re, FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(s.amplitude(1).re, FRAC_1_SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn qubit_zero_is_most_significant() {
        let mut s = QuantumState::new(3).unwrap();
        s.apply_unitary(&GateOp::x(0)).unwrap();
        assert_eq!(s.amplitude_of("100").unwrap().re, 1.0);
        assert_eq!(s.amplitude(0b100).re, 1.0);
    }

    #[test]
    fn x_measure_plus_is_deterministic() {
        let mut s = QuantumState::new(1).unwrap();
        s.apply_unitary(&GateOp::h(0)).unwrap();
        let before = s.clone();
        for i in 0..50 {
            let mut r = RngStream::new(1, i).rng();
            let mut t = s.clone();
            assert_eq!(t.measure(0, Basis::X, &mut r).unwrap(), 0);
            assert!(t.distance_up_to_phase(&before) < 1e-12);
        }
        s.project(0, Basis::X, 0).unwrap();
        assert_eq!(s.project(0, Basis::X, 1), Err(QetError::ZeroProbabilityBranch));
    }

    #[test]
    fn x_measure_zero_is_fair() {
        let s = QuantumState::new(1).unwrap();
        assert_abs_diff_eq!(s.outcome_probability(0, Basis::X, 0).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.outcome_probability(0, Basis::X, 1).unwrap(), 0.5, epsilon = 1e-15);
        let mut minus = s.clone();
        minus.project(0, Basis::X, 1).unwrap();
        assert_abs_diff_eq!(minus.amplitude(0).re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(minus.amplitude(1).re, -FRAC_1_SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn z_measure_w3_qubit1_outcome0() {
        let mut s = w3();
        let p = s.project(1, Basis::Z, 0).unwrap();
        assert_abs_diff_eq!(p, 2.0 / 3.0, epsilon = 1e-12);
        // |0⟩ on qubit 1 with (|10⟩+|01⟩)/√2 on qubits 0 and 2.
        let h = FRAC_1_SQRT_2;
        assert_abs_diff_eq!(s.amplitude_of("100").unwrap().re, h, epsilon = 1e-12);
        assert_abs_diff_eq!(s.amplitude_of("001").unwrap().re, h, epsilon = 1e-12);
        assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn z_frequency_matches_born_rule() {
        // Ry(θ) with sin²(θ/2) = 0.2.
        let theta = 2.0 * 0.2f64.sqrt().asin();
        let mut prepared = QuantumState::new(1).unwrap();
        prepared.apply_unitary(&GateOp::ry(theta, 0)).unwrap();
        let shots = 100_000;
        let ones: u32 = (0..shots)
            .map(|i| {
                let mut s = prepared.clone();
                let mut r = RngStream::new(99, i).rng();
                u32::from(s.measure(0, Basis::Z, &mut r).unwrap())
            })
            .sum();
        let freq = f64::from(ones) / shots as f64;
        assert!((freq - 0.2).abs() <= 0.004, "freq {freq}");
    }

    #[test]
    fn feedforward_copies_bit() {
        let ops = [
            GateOp::h(0),
            GateOp::measure(0, Basis::Z, 0),
            GateOp::conditioned(0, 1, GateOp::x(1)),
        ];
        for seed in 0..20 {
            let mut s = QuantumState::new(2).unwrap();
            let mut rec = ClassicalRecord::new();
            let mut r = RngStream::new(seed, 0).rng();
            for op in &ops {
                s.apply_gate(op, &mut rec, &mut r).unwrap();
            }
            let b = rec.get(0).unwrap();
            let idx = s.probabilities().iter().position(|&p| p > 0.5).unwrap();
            assert_eq!(s.bit(idx, 0), b);
            assert_eq!(s.bit(idx, 1), b);
        }
    }

    #[test]
    fn conditioned_on_unset_bit_errors() {
        let mut s = QuantumState::new(1).unwrap();
        let mut r = RngStream::new(0, 0).rng();
        let op = GateOp::conditioned(4, 1, GateOp::x(0));
        assert_eq!(
            s.apply_gate(&op, &mut ClassicalRecord::new(), &mut r),
            Err(QetError::UnsetBit(4))
        );
    }

    #[test]
    fn non_unitary_gate_rejected() {
        let mut s = QuantumState::new(1).unwrap();
        let bad = GateOp::single("bad", Matrix2::real(2.0, 0.0, 0.0, 1.0), 0);
        assert!(matches!(s.apply_unitary(&bad), Err(QetError::NotUnitary(_))));
        assert!(matches!(
            s.apply_unitary(&GateOp::x(1)),
            Err(QetError::QubitIndex { .. })
        ));
    }

    #[test]
    fn pauli_expectations() {
        let zero = QuantumState::new(1).unwrap();
        assert_eq!(
            zero.expectation_pauli(&PauliString::single(1.0, 0, Pauli::Z)).unwrap(),
            1.0
        );

        let w = w3();
        for q in 0..3 {
            let z = w.expectation_pauli(&PauliString::single(1.0, q, Pauli::Z)).unwrap();
            assert_abs_diff_eq!(z, 1.0 / 3.0, epsilon = 1e-12);
        }

        let mut bell = QuantumState::new(2).unwrap();
        bell.apply_unitary(&GateOp::h(0)).unwrap();
        bell.apply_unitary(&GateOp::cnot(0, 1)).unwrap();
        let xx = PauliString::new(1.0, vec![(0, Pauli::X), (1, Pauli::X)]).unwrap();
        assert_abs_diff_eq!(bell.expectation_pauli(&xx).unwrap(), 1.0, epsilon = 1e-12);
        let yy = PauliString::new(1.0, vec![(0, Pauli::Y), (1, Pauli::Y)]).unwrap();
        assert_abs_diff_eq!(bell.expectation_pauli(&yy).unwrap(), -1.0, epsilon = 1e-12);
        assert!(bell.expectation_pauli(&PauliString::single(1.0, 2, Pauli::Z)).is_err());
    }

    #[test]
    fn width_cap() {
        assert_eq!(QuantumState::new(0), Err(QetError::QubitCount(0)));
        assert_eq!(QuantumState::new(25), Err(QetError::QubitCount(25)));
    }
}
