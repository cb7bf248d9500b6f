use core::fmt;

/// Errors raised by the linear-algebra kernel, the iteration engine and the
/// certificate checkers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Input failed the Hermitian test: `residual` is `‖H − H*‖ / ‖H‖`.
    NonHermitianInput { residual: f64 },
    /// Smallest eigenvalue is below the PSD clamp threshold.
    IndefiniteInput { min_eigenvalue: f64 },
    DimensionMismatch { expected: usize, found: usize },
    ZeroVector,
    NotUnitVector { norm: f64 },
    NotOrthonormal { residual: f64 },
    /// The 2×2 square-root formula has a vanishing denominator.
    DegenerateInput,
    /// `‖u_E‖ > 1`.
    WeightTooLarge { norm: f64 },
    /// `‖u_E‖` outside the open interval `(0, 1)`.
    WeightOutOfRange { norm: f64 },
    NotStrictlyPositive { min_eigenvalue: f64 },
    EmptySupport,
    /// The direction still lies (numerically) in the support, so the next
    /// step drops rank and the support has not stabilized yet.
    NotStabilized { weight_norm: f64 },
    NumericalBreakdown { step: usize, detail: &'static str },
    NotConverged,
    NotDecoupled { coupling: f64 },
    InvalidStart,
    IncompatibleTraces(&'static str),
    InvalidConfig(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonHermitianInput { residual } => {
                write!(f, "matrix is not Hermitian (relative residual {residual:e})")
            }
            Error::IndefiniteInput { min_eigenvalue } => {
                write!(f, "matrix is indefinite (smallest eigenvalue {min_eigenvalue:e})")
            }
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::ZeroVector => f.write_str("vector is zero"),
            Error::NotUnitVector { norm } => write!(f, "vector is not unit (norm {norm})"),
            Error::NotOrthonormal { residual } => {
                write!(f, "columns are not orthonormal (residual {residual:e})")
            }
            Error::DegenerateInput => f.write_str("degenerate 2x2 input"),
            Error::WeightTooLarge { norm } => write!(f, "weight vector norm {norm} exceeds 1"),
            Error::WeightOutOfRange { norm } => {
                write!(f, "weight vector norm {norm} is outside (0, 1)")
            }
            Error::NotStrictlyPositive { min_eigenvalue } => {
                write!(f, "matrix is not strictly positive (smallest eigenvalue {min_eigenvalue:e})")
            }
            Error::EmptySupport => f.write_str("support is empty"),
            Error::NotStabilized { weight_norm } => write!(
                f,
                "support not stabilized: direction lies in the support (weight norm {weight_norm})"
            ),
            Error::NumericalBreakdown { step, detail } => {
                write!(f, "numerical breakdown at step {step}: {detail}")
            }
            Error::NotConverged => f.write_str("run has not converged"),
            Error::NotDecoupled { coupling } => {
                write!(f, "block is coupled (|b0| = {coupling:e})")
            }
            Error::InvalidStart => f.write_str("invalid starting values for scalar recursion"),
            Error::IncompatibleTraces(why) => write!(f, "incompatible traces: {why}"),
            Error::InvalidConfig(why) => write!(f, "invalid configuration: {why}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
