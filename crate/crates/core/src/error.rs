use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("degenerate boundary condition on {face}: alpha and beta both vanish")]
    DegenerateBoundary { face: &'static str },

    #[error("field has {got} entries, operator has {expected} degrees of freedom")]
    DofMismatch { expected: usize, got: usize },

    #[error("singular linear system (pivot {pivot} at row {row})")]
    SingularSystem { row: usize, pivot: f64 },

    #[error("linear solve residual {residual:e} exceeds tolerance {tolerance:e}")]
    SolverResidual { residual: f64, tolerance: f64 },

    #[error("stability function has a pole at z = {re} + {im}i")]
    Pole { re: f64, im: f64 },

    #[error("stability function {0} is not supported here (degree above 2 or inconsistent R(0))")]
    UnsupportedStabilityFunction(String),

    #[error("quadratic source flow blows up at dof {dof}: 1 - t*u = {margin:e}")]
    QuadraticBlowUp { dof: usize, margin: f64 },

    #[error("source term depends on the solution; a space-only source is required")]
    SourceDependsOnSolution,

    #[error("Krylov exponential did not converge (error estimate {estimate:e} after {substeps} substeps)")]
    KrylovNotConverged { estimate: f64, substeps: usize },

    #[error("fixed-point iteration did not converge (increment {increment:e})")]
    FixedPointNotConverged { increment: f64 },

    #[error("explicit RK4 reference is unstable: tau * rho(A) = {product:.4} exceeds {limit:.4}")]
    Rk4Unstable { product: f64, limit: f64 },

    #[error("step {step} failed: {source}")]
    StepFailed { step: usize, source: Box<Error> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("not enough usable rows to fit an order ({0})")]
    NotEnoughRows(usize),

    #[error("empty index range: t_min = {t_min} exceeds final time {t_final}")]
    EmptyRange { t_min: f64, t_final: f64 },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
