use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the operator, QCA, cohomology, anomaly and spectra layers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("window mismatch: {0}")]
    WindowMismatch(String),
    #[error("window cap exceeded: dimension {dim} over cap {cap}")]
    WindowCapExceeded { dim: usize, cap: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid site specification: {0}")]
    InvalidSiteSpec(String),
    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },
    #[error("invalid gate layer: {0}")]
    InvalidLayer(String),

    #[error("support algebra dimensions {right}/{left} are not the square of a rational")]
    NonSquareRatio { right: usize, left: usize },
    #[error("numeric GNVW index {numeric} disagrees with symbolic index {symbolic}")]
    IndexMismatch { numeric: String, symbolic: String },
    #[error("expression has nonzero GNVW index {0}")]
    NonZeroIndex(String),
    #[error("shifts cannot be paired into swap circuits: {0}")]
    UnpairableShifts(String),
    #[error("expression still contains register shifts")]
    ShiftsPresent,
    #[error("unsupported expression: {0}")]
    Unsupported(String),

    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("cochain degree {degree} exceeds cap {cap}")]
    DegreeCap { degree: usize, cap: usize },
    #[error("coboundary matrix {rows}x{cols} exceeds cap {cap} rows")]
    MatrixCap { rows: usize, cols: usize, cap: usize },
    #[error("cochain is not a cocycle")]
    NotACocycle,
    #[error("evaluator undefined at {0}")]
    EvaluatorDomain(String),

    #[error("action is not a homomorphism at ({g}, {h}): residual {residual:.3e}")]
    NotAHomomorphism { g: String, h: String, residual: f64 },
    #[error("automorphism is not inner on the window {0}")]
    NotInner(String),
    #[error("automorphism acts nontrivially outside the window {0}")]
    NotIdentityOutside(String),
    #[error("obstruction product is not scalar at {args} (deviation {deviation:.3e})")]
    NotScalar { args: String, deviation: f64 },
    #[error("phase {value} has no rational approximation with denominator <= {den_cap}")]
    SnapFailure { value: f64, den_cap: u64 },
    #[error("snapped 3-cochain violates the cocycle condition")]
    CocycleViolation,
    #[error("matrices do not form a projective representation at ({g}, {h})")]
    NotProjective { g: usize, h: usize },

    #[error("chain length {n} exceeds cap {cap}")]
    SizeCap { n: usize, cap: usize },
    #[error("eigensolver did not converge ({0})")]
    NoConvergence(String),
    #[error("invalid Hamiltonian specification: {0}")]
    InvalidHamiltonian(String),
}

/// Coarse classification of an [`Error`], used to pick process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input data (non-unitary matrices, inconsistent groups, ...).
    Input,
    /// A pipeline stage could not complete on valid input.
    Pipeline,
    /// An internal invariant was violated; always a bug.
    Internal,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::CocycleViolation | Error::IndexMismatch { .. } => ErrorKind::Internal,
            Error::InvalidSiteSpec(_)
            | Error::NotUnitary { .. }
            | Error::InvalidLayer(_)
            | Error::InvalidGroup(_)
            | Error::InvalidHamiltonian(_)
            | Error::DimensionMismatch(_) => ErrorKind::Input,
            _ => ErrorKind::Pipeline,
        }
    }
}
