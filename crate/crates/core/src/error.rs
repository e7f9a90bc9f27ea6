use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("quadrature not converged (component {component}): estimate {estimate:e}, error {error:e} > bound {bound:e}")]
    Quadrature {
        component: usize,
        estimate: f64,
        error: f64,
        bound: f64,
    },
    #[error("degenerate polynomial: leading coefficient {0:e}")]
    DegenerateDegree(f64),
    #[error("Newton polish not converged after {iters} iterations")]
    NotConverged { iters: usize },
    #[error("Newton iterate left the domain (beta = {beta}, t = {t})")]
    DivergedOutOfDomain { beta: f64, t: f64 },
    #[error("seed failed: {0}")]
    SeedFailed(String),
    #[error("t-jump search exhausted at n = {n}")]
    JumpNotFound { n: usize },
    #[error("checkpoint line {line}: {msg}")]
    Checkpoint { line: usize, msg: String },
    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Usage(_) => "usage",
            Error::Quadrature { .. } => "quadrature",
            Error::DegenerateDegree(_) => "degenerate_degree",
            Error::NotConverged { .. } => "not_converged",
            Error::DivergedOutOfDomain { .. } => "diverged_out_of_domain",
            Error::SeedFailed(_) => "seed_failed",
            Error::JumpNotFound { .. } => "jump_not_found",
            Error::Checkpoint { .. } => "checkpoint",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
