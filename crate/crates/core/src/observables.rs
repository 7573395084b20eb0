//! Local number-operator Hamiltonians, the injected-energy formula, and
//! estimators for both exact states and shot histograms.
//!
//! Every local term is `H_n = |1⟩⟨1|_n = ½(I − Z_n)`. The interaction term of
//! the total Hamiltonian is taken to be the zero operator, so
//! `H_total = Σ_n H_n`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::builder::check_weights;
use crate::error::{QetError, Result};
use crate::pauli::{Pauli, PauliString};
use crate::state::{parse_ket, QuantumState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub h: f64,
    pub k: f64,
}

impl ModelParams {
    pub fn new(n: usize, h: f64, k: f64) -> Result<Self> {
        if !(2..=crate::MAX_QUBITS).contains(&n) {
            return Err(QetError::InvalidParameter(format!(
                "model needs 2..={} qubits, got {n}",
                crate::MAX_QUBITS
            )));
        }
        check_weights(h, k)?;
        Ok(Self { n, h, k })
    }

    /// Probability that a given receiver holds the excitation:
    /// `h² / (N (h² + k²))`.
    pub fn excitation_share(&self) -> f64 {
        self.h * self.h / (self.n as f64 * (self.h * self.h + self.k * self.k))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum E0Convention {
    /// `h²/√(h²+k²)`, the value the tabulated E_o rows agree with.
    #[default]
    TableConsistent,
    /// `h²/(h²+k²)`.
    AsPrinted,
}

/// Expected energy injected by the sender's measurement.
pub fn e0(h: f64, k: f64, convention: E0Convention) -> Result<f64> {
    check_weights(h, k)?;
    let norm_sqr = h * h + k * k;
    Ok(match convention {
        E0Convention::TableConsistent => h * h / norm_sqr.sqrt(),
        E0Convention::AsPrinted => h * h / norm_sqr,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObservableKind {
    /// `H_n` on one qubit.
    Local(usize),
    /// `H_sub(m)`: the sum of `H_i` over `qubits`, which for the natural
    /// ordering are `m..N`.
    Subsystem {
        m: usize,
        qubits: Vec<usize>,
    },
    Total,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSpec {
    pub num_qubits: usize,
    pub kind: ObservableKind,
    pub terms: Vec<PauliString>,
}

fn number_terms(qubits: &[usize]) -> Vec<PauliString> {
    qubits
        .iter()
        .flat_map(|&q| [PauliString::identity(0.5), PauliString::single(-0.5, q, Pauli::Z)])
        .collect()
}

fn check_index(q: usize, num_qubits: usize) -> Result<()> {
    if q >= num_qubits {
        return Err(QetError::QubitIndex { index: q, num_qubits });
    }
    Ok(())
}

impl ObservableSpec {
    pub fn local(num_qubits: usize, qubit: usize) -> Result<Self> {
        check_index(qubit, num_qubits)?;
        Ok(Self {
            num_qubits,
            kind: ObservableKind::Local(qubit),
            terms: number_terms(&[qubit]),
        })
    }

    /// `H_sub(m) = Σ_{i=m}^{N−1} H_i`.
    pub fn h_sub(num_qubits: usize, m: usize) -> Result<Self> {
        if m > num_qubits {
            return Err(QetError::QubitIndex { index: m, num_qubits });
        }
        Self::subsystem(num_qubits, m, (m..num_qubits).collect())
    }

    /// Subsystem observable over an explicit qubit set, labelled as
    /// position `m` of a measurement order.
    pub fn subsystem(num_qubits: usize, m: usize, qubits: Vec<usize>) -> Result<Self> {
        for (i, &q) in qubits.iter().enumerate() {
            check_index(q, num_qubits)?;
            if qubits[..i].contains(&q) {
                return Err(QetError::DuplicateQubit(q));
            }
        }
        Ok(Self {
            num_qubits,
            terms: number_terms(&qubits),
            kind: ObservableKind::Subsystem { m, qubits },
        })
    }

    pub fn total(num_qubits: usize) -> Self {
        let all: Vec<usize> = (0..num_qubits).collect();
        Self {
            num_qubits,
            kind: ObservableKind::Total,
            terms: number_terms(&all),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.terms.iter().all(PauliString::is_diagonal)
    }

    /// Eigenvalue on a computational basis state. Only meaningful for
    /// diagonal observables.
    fn basis_value(&self, index: usize) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let flips = t
                    .factors()
                    .iter()
                    .filter(|&&(q, _)| index & (1 << (self.num_qubits - 1 - q)) != 0)
                    .count();
                if flips % 2 == 0 {
                    t.coefficient
                } else {
                    -t.coefficient
                }
            })
            .sum()
    }
}

impl fmt::Display for ObservableSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ObservableKind::Local(q) => write!(f, "H_{q}"),
            ObservableKind::Subsystem { m, .. } => write!(f, "H_sub_{m}"),
            ObservableKind::Total => f.write_str("H_tot"),
        }
    }
}

/// Exact `⟨ψ|O|ψ⟩`.
pub fn exact_expectation(state: &QuantumState, obs: &ObservableSpec) -> Result<f64> {
    if state.num_qubits() != obs.num_qubits {
        return Err(QetError::InvalidParameter(format!(
            "observable on {} qubits applied to a {}-qubit state",
            obs.num_qubits,
            state.num_qubits()
        )));
    }
    obs.terms.iter().map(|t| state.expectation_pauli(t)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// Sample standard deviation over `√shots`.
    pub stderr: f64,
    /// Zero for exact values.
    pub shots: u64,
}

impl Estimate {
    pub fn exact(mean: f64) -> Self {
        Self {
            mean,
            stderr: 0.0,
            shots: 0,
        }
    }

    /// Mean and standard error of a list of per-shot values.
    pub fn from_samples(values: &[f64]) -> Result<Self> {
        let n = values.len() as u64;
        if n < 2 {
            return Err(QetError::TooFewShots(n));
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let stderr = if values.iter().all(|&v| v == values[0]) {
            0.0
        } else {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt()
        };
        Ok(Self { mean, stderr, shots: n })
    }
}

impl fmt::Display for Estimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.shots == 0 {
            write!(f, "{:.4}", self.mean)
        } else {
            write!(f, "{:.4} ± {:.4}", self.mean, self.stderr)
        }
    }
}

/// Histogram of computational-basis outcomes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub num_qubits: usize,
    counts: BTreeMap<usize, u64>,
}

impl Counts {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            counts: BTreeMap::new(),
        }
    }

    pub fn from_labels<'a>(num_qubits: usize, entries: impl IntoIterator<Item = (&'a str, u64)>) -> Result<Self> {
        let mut c = Self::new(num_qubits);
        for (ket, n) in entries {
            c.add(parse_ket(ket, num_qubits)?, n);
        }
        Ok(c)
    }

    pub fn add(&mut self, index: usize, n: u64) {
        *self.counts.entry(index).or_insert(0) += n;
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts.iter().map(|(&k, &v)| (k, v))
    }
}

/// Mean and standard error of a Z-diagonal observable from shot counts.
pub fn estimate_from_counts(counts: &Counts, obs: &ObservableSpec) -> Result<Estimate> {
    if !obs.is_diagonal() {
        return Err(QetError::NonDiagonalObservable);
    }
    if counts.num_qubits != obs.num_qubits {
        return Err(QetError::InvalidParameter(format!(
            "{}-qubit counts for a {}-qubit observable",
            counts.num_qubits, obs.num_qubits
        )));
    }
    let shots = counts.total();
    if shots < 2 {
        return Err(QetError::TooFewShots(shots));
    }
    let values: Vec<(f64, u64)> = counts
        .iter()
        .filter(|&(_, c)| c > 0)
        .map(|(idx, c)| (obs.basis_value(idx), c))
        .collect();
    let n = shots as f64;
    let mean = values.iter().map(|&(v, c)| v * c as f64).sum::<f64>() / n;
    let stderr = if values.iter().all(|&(v, _)| v == values[0].0) {
        0.0
    } else {
        let ss: f64 = values.iter().map(|&(v, c)| c as f64 * (v - mean).powi(2)).sum();
        (ss / (n - 1.0)).sqrt() / n.sqrt()
    };
    Ok(Estimate { mean, stderr, shots })
}
