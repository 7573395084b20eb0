use thiserror::Error;

pub type Result<T, E = QetError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QetError {
    #[error("qubit count {0} outside supported range 1..={max}", max = crate::MAX_QUBITS)]
    QubitCount(usize),
    #[error("qubit index {index} out of range for {num_qubits}-qubit register")]
    QubitIndex { index: usize, num_qubits: usize },
    #[error("target qubit {0} also listed as a control")]
    TargetIsControl(usize),
    #[error("qubit {0} listed more than once")]
    DuplicateQubit(usize),
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("classical bit {0} read before it was written")]
    UnsetBit(usize),
    #[error("measurement selected a branch with zero probability")]
    ZeroProbabilityBranch,
    #[error("weights h and k are both zero")]
    ZeroWeights,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("observable is not diagonal in the computational basis")]
    NonDiagonalObservable,
    #[error("need at least 2 shots to estimate a standard error, got {0}")]
    TooFewShots(u64),
    #[error("circuit has {0} measurements; branch enumeration is capped at {max}", max = crate::oracle::MAX_MEASUREMENTS)]
    BranchCap(usize),
    #[error("expected a two-qubit reduced state, got {0} qubits")]
    WrongDimension(usize),
    #[error("receiver order is not a permutation of 1..{0}")]
    InvalidReceiverOrder(usize),
    #[error("reference data: {0}")]
    Reference(String),
    #[error("report: {0}")]
    Report(String),
}
