use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("not a probability distribution: {0}")]
    Distribution(String),

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown game `{0}`")]
    UnknownGame(String),

    /// The exhaustive search would have to enumerate more strategies than allowed.
    #[error("search budget exceeded: {required} strategies required, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("not a ±1 observable: {0}")]
    NotObservable(String),

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("newton system numerically singular after {attempts} regularization attempts")]
    Singular { attempts: usize },

    #[error("certificate rejected: {0}")]
    Certificate(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
