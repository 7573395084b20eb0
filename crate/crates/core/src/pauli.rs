use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{QetError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn is_diagonal(self) -> bool {
        matches!(self, Pauli::I | Pauli::Z)
    }
}

/// A real coefficient times a tensor product of single-qubit Paulis.
/// Qubits not listed carry the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliString {
    pub coefficient: f64,
    factors: Vec<(usize, Pauli)>,
}

impl PauliString {
    pub fn new(coefficient: f64, factors: Vec<(usize, Pauli)>) -> Result<Self> {
        let mut factors = factors;
        factors.sort_by_key(|&(q, _)| q);
        if let Some(w) = factors.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(QetError::DuplicateQubit(w[0].0));
        }
        factors.retain(|&(_, p)| p != Pauli::I);
        Ok(Self { coefficient, factors })
    }

    pub fn identity(coefficient: f64) -> Self {
        Self {
            coefficient,
            factors: Vec::new(),
        }
    }

    pub fn single(coefficient: f64, qubit: usize, op: Pauli) -> Self {
        Self::new(coefficient, vec![(qubit, op)]).expect("single factor")
    }

    pub fn factors(&self) -> &[(usize, Pauli)] {
        &self.factors
    }

    pub fn is_diagonal(&self) -> bool {
        self.factors.iter().all(|&(_, p)| p.is_diagonal())
    }

    pub fn max_qubit(&self) -> Option<usize> {
        self.factors.last().map(|&(q, _)| q)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coefficient)?;
        if self.factors.is_empty() {
            return f.write_str("·I");
        }
        for (q, p) in &self.factors {
            write!(f, "·{p:?}{q}")?;
        }
        Ok(())
    }
}
