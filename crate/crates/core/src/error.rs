use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("{qubits} qubits exceeds the dense cap of {cap}")]
    CapExceeded { qubits: usize, cap: usize },

    #[error("duplicate or overlapping qubit index {0}")]
    DuplicateQubit(usize),

    #[error("qubit index {index} out of range for {qubits} qubits")]
    QubitOutOfRange { index: usize, qubits: usize },

    #[error("empty index subset")]
    EmptySubset,

    #[error("measurement family does not sum to identity (deviation {0:.3e})")]
    NotComplete(f64),

    #[error("bias target {0} out of range")]
    BiasOutOfRange(f64),

    #[error("n = {0} is too large for an exhaustive bias check")]
    BiasCheckTooLarge(usize),

    #[error("seed space of {bits} bits is too large to enumerate (limit {limit})")]
    SeedSpaceTooLarge { bits: usize, limit: usize },

    #[error("seed underflow: need {need} bits, got {got}")]
    SeedUnderflow { need: usize, got: usize },

    #[error("generator output of {got} bits is shorter than the required {need}")]
    OutputShortfall { need: usize, got: usize },

    #[error("hamiltonian has no nonzero coefficients")]
    ZeroHamiltonian,

    #[error("invalid hamiltonian term: {0}")]
    InvalidTerm(String),

    #[error("answer arity mismatch: expected {expected} bits, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("cells {0:?} do not form a row or column")]
    NotALine([u8; 3]),

    #[error("no table entry for question {0}")]
    IncompleteTable(String),

    #[error("key mismatch between encryption and decryption")]
    KeyMismatch,

    #[error("malformed ciphertext: {0}")]
    MalformedCiphertext(String),

    #[error("malformed frame: {0}")]
    MalformedFrame(String),

    #[error("circuit not supported by scheme {0}")]
    UnsupportedCircuit(String),

    #[error("malformed merkle path: expected {expected} siblings, got {got}")]
    MalformedPath { expected: usize, got: usize },

    #[error("decoding failed")]
    DecodeFailure,

    #[error("operator is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("state is not invariant under the family twirl (deviation {0:.3e})")]
    NonInvariantState(f64),

    #[error("outcome {0} violates the identity-forces-zero convention")]
    ConventionViolation(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("protocol error: {0}")]
    Protocol(String),
}
