use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown phase `{0}` (expected one of elliptic, hyperbolic, fractional, perturbed)")]
    UnknownPhase(String),

    #[error("point {point:?} lies outside the domain of phase `{label}`")]
    OutsideDomain { label: String, point: Vec<f64> },

    #[error("degenerate Hessian: |det| = {det:.3e} at {point:?}")]
    DegenerateHessian { det: f64, point: Vec<f64> },

    #[error("normal-form reduction failed: residual {residual:.3e} exceeds {bound:.3e}")]
    NormalFormResidual { residual: f64, bound: f64 },

    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:.3e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error("resolution budget exceeded: {0}")]
    Resolution(String),

    #[error("box too small: boundary mass {ratio:.3e} exceeds {limit:.1e}")]
    BoundaryMass { ratio: f64, limit: f64 },

    #[error("aliasing detected: top-mode mass fraction {fraction:.3e}")]
    Aliasing { fraction: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("config error: {0}")]
    Schema(String),

    #[error("at ladder value {value}: {source}")]
    AtLadderPoint { value: f64, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Exit status used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::AtLadderPoint { source, .. } => source.exit_code(),
            Error::Config { .. } | Error::Schema(_) => 2,
            Error::Resolution(_) | Error::BoundaryMass { .. } | Error::Aliasing { .. } => 3,
            _ => 1,
        }
    }

    /// Attach the ladder value at which a sweep failed.
    pub fn at_ladder(self, value: f64) -> Self {
        match self {
            e @ Error::AtLadderPoint { .. } => e,
            e => Error::AtLadderPoint { value, source: Box::new(e) },
        }
    }
}
