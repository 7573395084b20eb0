//! Gate matrices and the circuit instruction set.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QetError, Result};
use crate::UNITARY_TOL;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major 2×2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Matrix2(pub [[Complex64; 2]; 2]);

impl Matrix2 {
    pub const fn new(m: [[Complex64; 2]; 2]) -> Self {
        Self(m)
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self([
            [Complex64::new(a, 0.0), Complex64::new(b, 0.0)],
            [Complex64::new(c, 0.0), Complex64::new(d, 0.0)],
        ])
    }

    pub fn identity() -> Self {
        Self([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn x() -> Self {
        Self::real(0.0, 1.0, 1.0, 0.0)
    }

    pub fn y() -> Self {
        let i = Complex64::i();
        Self([[ZERO, -i], [i, ZERO]])
    }

    pub fn z() -> Self {
        Self::real(1.0, 0.0, 0.0, -1.0)
    }

    pub fn h() -> Self {
        Self::real(FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, -FRAC_1_SQRT_2)
    }

    /// Rotation about Y: `|0⟩ ↦ cos(θ/2)|0⟩ + sin(θ/2)|1⟩`.
    pub fn ry(theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        Self::real(c, -s, s, c)
    }

    pub fn dagger(&self) -> Self {
        let m = &self.0;
        Self([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = (&self.0, &other.0);
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Self(out)
    }

    /// Largest entrywise deviation of `U†U` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let p = self.dagger().mul(self);
        let id = Self::identity();
        let mut worst: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((p.0[r][c] - id.0[r][c]).norm());
            }
        }
        worst
    }

    pub fn check_unitary(&self) -> Result<()> {
        let err = self.unitarity_error();
        if err > UNITARY_TOL {
            return Err(QetError::NotUnitary(err));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::Z => f.write_str("Z"),
            Basis::X => f.write_str("X"),
        }
    }
}

/// One instruction of a circuit program.
///
/// `name` fields are labels for the textual dump only; the simulator acts on
/// the matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GateOp {
    Unitary1Q {
        name: String,
        param: Option<f64>,
        matrix: Matrix2,
        target: usize,
    },
    ControlledUnitary {
        name: String,
        param: Option<f64>,
        controls: Vec<usize>,
        matrix: Matrix2,
        target: usize,
    },
    Measure {
        target: usize,
        basis: Basis,
        bit: usize,
    },
    Conditioned {
        bit: usize,
        value: u8,
        inner: Box<GateOp>,
    },
}

impl GateOp {
    pub fn single(name: &str, matrix: Matrix2, target: usize) -> Self {
        GateOp::Unitary1Q {
            name: name.to_owned(),
            param: None,
            matrix,
            target,
        }
    }

    pub fn controlled(name: &str, controls: Vec<usize>, matrix: Matrix2, target: usize) -> Self {
        GateOp::ControlledUnitary {
            name: name.to_owned(),
            param: None,
            controls,
            matrix,
            target,
        }
    }

    pub fn h(target: usize) -> Self {
        Self::single("h", Matrix2::h(), target)
    }

    pub fn x(target: usize) -> Self {
        Self::single("x", Matrix2::x(), target)
    }

    pub fn z(target: usize) -> Self {
        Self::single("z", Matrix2::z(), target)
    }

    pub fn ry(theta: f64, target: usize) -> Self {
        GateOp::Unitary1Q {
            name: "ry".to_owned(),
            param: Some(theta),
            matrix: Matrix2::ry(theta),
            target,
        }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self::controlled("x", vec![control], Matrix2::x(), target)
    }

    pub fn cry(theta: f64, control: usize, target: usize) -> Self {
        GateOp::ControlledUnitary {
            name: "ry".to_owned(),
            param: Some(theta),
            controls: vec![control],
            matrix: Matrix2::ry(theta),
            target,
        }
    }

    pub fn measure(target: usize, basis: Basis, bit: usize) -> Self {
        GateOp::Measure { target, basis, bit }
    }

    pub fn conditioned(bit: usize, value: u8, inner: GateOp) -> Self {
        GateOp::Conditioned {
            bit,
            value,
            inner: Box::new(inner),
        }
    }

    /// Qubits the op acts on, controls first.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            GateOp::Unitary1Q { target, .. } | GateOp::Measure { target, .. } => vec![*target],
            GateOp::ControlledUnitary { controls, target, .. } => {
                let mut q = controls.clone();
                q.push(*target);
                q
            }
            GateOp::Conditioned { inner, .. } => inner.qubits(),
        }
    }

    /// Classical bits read or written by the op.
    pub fn bits(&self) -> Vec<usize> {
        match self {
            GateOp::Measure { bit, .. } => vec![*bit],
            GateOp::Conditioned { bit, inner, .. } => {
                let mut b = vec![*bit];
                b.extend(inner.bits());
                b
            }
            _ => Vec::new(),
        }
    }

    pub fn is_multi_qubit(&self) -> bool {
        self.qubits().len() > 1
    }

    /// Checks index ranges, control/target overlap and unitarity.
    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        let check = |q: usize| {
            if q >= num_qubits {
                Err(QetError::QubitIndex { index: q, num_qubits })
            } else {
                Ok(())
            }
        };
        match self {
            GateOp::Unitary1Q { matrix, target, .. } => {
                check(*target)?;
                matrix.check_unitary()
            }
            GateOp::ControlledUnitary {
                controls,
                matrix,
                target,
                ..
            } => {
                check(*target)?;
                for (i, &c) in controls.iter().enumerate() {
                    check(c)?;
                    if c == *target {
                        return Err(QetError::TargetIsControl(c));
                    }
                    if controls[..i].contains(&c) {
                        return Err(QetError::DuplicateQubit(c));
                    }
                }
                matrix.check_unitary()
            }
            GateOp::Measure { target, .. } => check(*target),
            GateOp::Conditioned { value, inner, .. } => {
                if *value > 1 {
                    return Err(QetError::InvalidParameter(format!(
                        "conditioned value must be 0 or 1, got {value}"
                    )));
                }
                inner.validate(num_qubits)
            }
        }
    }
}

impl fmt::Display for GateOp {
    /// One op per line: `name targets params`. See `docs/circuit-text.md`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateOp::Unitary1Q {
                name, param, target, ..
            } => {
                write_name(f, name, *param)?;
                write!(f, " q{target}")
            }
            GateOp::ControlledUnitary {
                name,
                param,
                controls,
                target,
                ..
            } => {
                let c: Vec<String> = controls.iter().map(|c| format!("q{c}")).collect();
                f.write_str("c-")?;
                write_name(f, name, *param)?;
                write!(f, " {} -> q{target}", c.join(","))
            }
            GateOp::Measure { target, basis, bit } => {
                write!(f, "measure q{target} basis={basis} -> c{bit}")
            }
            GateOp::Conditioned { bit, value, inner } => write!(f, "if c{bit}=={value} {inner}"),
        }
    }
}

fn write_name(f: &mut fmt::Formatter<'_>, name: &str, param: Option<f64>) -> fmt::Result {
    match param {
        Some(p) => write!(f, "{name}({p})"),
        None => f.write_str(name),
    }
}
