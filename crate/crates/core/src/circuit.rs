use std::collections::HashMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QetError, Result};
use crate::gate::GateOp;
use crate::state::{ClassicalRecord, QuantumState};

/// An ordered gate program over a fixed register width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    num_qubits: usize,
    ops: Vec<GateOp>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > crate::MAX_QUBITS {
            return Err(QetError::QubitCount(num_qubits));
        }
        Ok(Self {
            num_qubits,
            ops: Vec::new(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn push(&mut self, op: GateOp) -> Result<&mut Self> {
        op.validate(self.num_qubits)?;
        self.ops.push(op);
        Ok(self)
    }

    pub fn extend(&mut self, other: &Circuit) -> Result<&mut Self> {
        if other.num_qubits != self.num_qubits {
            return Err(QetError::InvalidParameter(format!(
                "cannot append a {}-qubit circuit to a {}-qubit circuit",
                other.num_qubits, self.num_qubits
            )));
        }
        self.ops.extend(other.ops.iter().cloned());
        Ok(self)
    }

    /// Longest dependency chain, where ops depend on each other through
    /// shared qubits or shared classical bits.
    pub fn depth(&self) -> usize {
        let mut qubit_level = vec![0usize; self.num_qubits];
        let mut bit_level: HashMap<usize, usize> = HashMap::new();
        let mut depth = 0;
        for op in &self.ops {
            let qubits = op.qubits();
            let bits = op.bits();
            let start = qubits
                .iter()
                .map(|&q| qubit_level[q])
                .chain(bits.iter().map(|b| bit_level.get(b).copied().unwrap_or(0)))
                .max()
                .unwrap_or(0);
            let level = start + 1;
            for q in qubits {
                qubit_level[q] = level;
            }
            for b in bits {
                bit_level.insert(b, level);
            }
            depth = depth.max(level);
        }
        depth
    }

    pub fn two_qubit_gate_count(&self) -> usize {
        self.ops.iter().filter(|op| op.is_multi_qubit()).count()
    }

    pub fn measurement_count(&self) -> usize {
        fn count(op: &GateOp) -> usize {
            match op {
                GateOp::Measure { .. } => 1,
                GateOp::Conditioned { inner, .. } => count(inner),
                _ => 0,
            }
        }
        self.ops.iter().map(count).sum()
    }

    /// Runs the program on `|0…0⟩`.
    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(QuantumState, ClassicalRecord)> {
        let state = QuantumState::new(self.num_qubits)?;
        self.run_from(state, rng)
    }

    pub fn run_from<R: Rng + ?Sized>(
        &self,
        mut state: QuantumState,
        rng: &mut R,
    ) -> Result<(QuantumState, ClassicalRecord)> {
        if state.num_qubits() != self.num_qubits {
            return Err(QetError::InvalidParameter(format!(
                "{}-qubit circuit run on a {}-qubit state",
                self.num_qubits,
                state.num_qubits()
            )));
        }
        let mut record = ClassicalRecord::new();
        for op in &self.ops {
            state.apply_gate(op, &mut record, rng)?;
        }
        Ok((state, record))
    }

    /// Applies a measurement-free circuit as a unitary to `state`.
    pub fn apply_unitary_to(&self, state: &mut QuantumState) -> Result<()> {
        for op in &self.ops {
            state.apply_unitary(op)?;
        }
        Ok(())
    }

    /// Line-oriented dump: a `qubits N` header, then one op per line.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "qubits {}", self.num_qubits)?;
        for op in &self.ops {
            writeln!(f, "{op}")?;
        }
        Ok(())
    }
}

/// Runs `circuit` from the vacuum with the given substream.
pub fn run_circuit(circuit: &Circuit, stream: crate::rng::RngStream) -> Result<(QuantumState, ClassicalRecord)> {
    circuit.run(&mut stream.rng())
}
