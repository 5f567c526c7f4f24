use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("resource limit: requested weight {requested} exceeds the partition cap {cap}")]
    ResourceLimit { requested: usize, cap: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient truncation degree: need {required}, have {available}")]
    Degree { required: usize, available: usize },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("no corner matrix for label {0}")]
    MissingLabel(i32),

    #[error("scope error: {0}")]
    Scope(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("specialization plan error: {0}")]
    Plan(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by the input rather than by a numerical outcome.
    pub fn is_configuration(&self) -> bool {
        !matches!(self, Error::Evaluation(_))
    }
}
