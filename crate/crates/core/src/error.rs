use thiserror::Error;

use crate::matrix::C64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("data length {len} does not match {rows}x{cols}")]
    DataLength { rows: usize, cols: usize, len: usize },
    #[error("dimension product {rows}x{cols} overflows")]
    SizeOverflow { rows: usize, cols: usize },
    #[error("vector length {got} does not match matrix dimension {expected}")]
    VectorLength { expected: usize, got: usize },
    #[error("matrix is numerically singular (pivot {pivot})")]
    Singular { pivot: usize },
    #[error("non-finite entries in input")]
    NonFinite,
    #[error("eigen iteration did not converge after {iterations} iterations ({} eigenvalues converged)", converged.len())]
    NoConvergence {
        iterations: usize,
        /// Eigenvalues that had deflated before the iteration gave up.
        converged: Vec<C64>,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("trace is {trace} (residual {residual:.3e})")]
    Trace { trace: f64, residual: f64 },
    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    Hermiticity { residual: f64 },
    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:.6e})")]
    Positivity { eigenvalue: f64 },
    #[error("purity {purity} outside [1/{dim}, 1]")]
    Purity { purity: f64, dim: usize },
    #[error("factor dimensions {factors:?} do not multiply to {dim}")]
    FactorMismatch { factors: Vec<usize>, dim: usize },
    #[error("state has no declared bipartition (factor dims {factors:?})")]
    Unfactorized { factors: Vec<usize> },
    #[error("subsystem index {index} out of range for {count} factors")]
    SubsystemOutOfRange { index: usize, count: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("zero vector cannot be a state")]
    ZeroVector,
    #[error("vector norm {norm} is not 1")]
    NotNormalized { norm: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error("a channel needs at least one Kraus operator")]
    Empty,
    #[error("Kraus operator {index} has shape {shape:?}, expected {expected}x{expected}")]
    KrausShape {
        index: usize,
        shape: (usize, usize),
        expected: usize,
    },
    #[error("channel is not trace preserving (completeness residual {residual:.3e})")]
    NotTracePreserving { residual: f64 },
    #[error("Choi matrix has eigenvalue {eigenvalue:.6e}; map is not completely positive")]
    NegativeChoi { eigenvalue: f64 },
    #[error("Choi matrix dimension {dim} is not a perfect square")]
    ChoiDimension { dim: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("Hamiltonian is not Hermitian (residual {residual:.3e})")]
    NonHermitianHamiltonian { residual: f64 },
    #[error("jump {index} has invalid rate {rate}")]
    InvalidRate { index: usize, rate: f64 },
    #[error("jump {index} has shape {shape:?}, Hamiltonian is {dim}x{dim}")]
    JumpDimension {
        index: usize,
        shape: (usize, usize),
        dim: usize,
    },
    #[error("non-finite entries in model")]
    NonFinite,
    #[error("state dimension {got} does not match model dimension {expected}")]
    StateDimension { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvolutionError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("observable '{name}' has dimension {got}, model has {expected}")]
    ObservableDimension {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("state diverged at t={time}")]
    StepDivergence {
        time: f64,
        /// Everything recorded before the failing step.
        partial: Box<crate::evolution::Trajectory>,
    },
    #[error("Crank-Nicolson system is singular at dt={dt}; try a smaller step")]
    StepSolveError { dt: f64 },
    #[error("Liouvillian is not diagonalizable ({flagged} flagged eigenpairs, worst biorthogonality residual {worst:.3e})")]
    DefectiveLiouvillian { flagged: usize, worst: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PresetError {
    #[error("unknown preset '{0}' (expected driven_tls, decaying_driven_tls or thermal_tls)")]
    UnknownName(String),
    #[error("parameter {name} must be finite and non-negative, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}
