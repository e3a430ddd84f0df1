use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("edge ({i}, {j}) has nonpositive weight {weight}")]
    NonPositiveWeight { i: usize, j: usize, weight: f64 },

    #[error("duplicate edge ({i}, {j})")]
    DuplicateEdge { i: usize, j: usize },

    #[error("self-loop at node {0}")]
    SelfLoop(usize),

    #[error("node index {index} out of range 1..={n}")]
    NodeOutOfRange { index: usize, n: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("model has no {0} block")]
    MissingBlock(&'static str),

    #[error("state matrix is not Hurwitz (max real eigenvalue {max_real:e})")]
    NotHurwitz { max_real: f64 },

    #[error("Lyapunov residual {residual:e} exceeds tolerance {tolerance:e}")]
    Convergence { residual: f64, tolerance: f64 },

    #[error("Schur decomposition did not converge")]
    SchurFailed,

    #[error("generalized Gramian inequality violated: max eigenvalue {max_eigenvalue:e}")]
    LmiViolated { max_eigenvalue: f64 },

    #[error("step size {dt} too large: max|eig(A)|*dt = {product:.3} (limit 0.1)")]
    StepSize { dt: f64, product: f64 },

    #[error("simulation diverged at step {step}")]
    Divergence { step: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{context}: {source}")]
    Context { context: String, source: Box<Error> },
}

impl Error {
    /// True for failures of the numerical machinery, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        if let Error::Context { source, .. } = self {
            return source.is_numerical();
        }
        matches!(
            self,
            Error::NotHurwitz { .. }
                | Error::Convergence { .. }
                | Error::SchurFailed
                | Error::LmiViolated { .. }
                | Error::StepSize { .. }
                | Error::Divergence { .. }
        )
    }

    /// Prefixes the message with `context`, keeping the error class.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Process exit code: 1 for validation errors, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        if self.is_numerical() {
            2
        } else {
            1
        }
    }
}
