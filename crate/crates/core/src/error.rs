use thiserror::Error;

/// Errors raised by the map, operator and scan pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("branch {branch} inverse failed to converge for target {target}")]
    BranchSolveFailure { branch: usize, target: f64 },

    #[error("preimage tree needs {requested} nodes, budget is {budget}")]
    BudgetExceeded { requested: u128, budget: u128 },

    #[error("derivative is unbounded on the declared domain")]
    UnboundedDerivative,

    #[error("flatten radius {epsilon} exceeds the admissible bound {max}")]
    EpsilonTooLarge { epsilon: f64, max: f64 },

    #[error("interpolation basis is singular: {0}")]
    SingularBasis(String),

    #[error("eigen-iteration did not converge within {iterations} iterations")]
    NotConverged { iterations: usize },

    #[error("spectral gap collapsed (gap ratio {gap_ratio})")]
    GapCollapsed { gap_ratio: f64 },

    #[error("t = {t} lies inside a phase-transition candidate interval")]
    NonSmoothPoint { t: f64 },

    #[error("refinement curves disagree everywhere: {0}")]
    InsufficientRefinement(String),

    #[error("composed inverse branch for word {word:?} does not contract")]
    NotExpanding { word: Vec<usize> },

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
