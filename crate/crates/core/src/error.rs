use thiserror::Error;

use crate::expr::ExprError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("value `{value}` is not in the domain of `{variable}`")]
    UnknownValue { variable: String, value: String },

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("invalid graph: {0}")]
    Graph(String),

    #[error("variable sets must be disjoint: {0}")]
    NotDisjoint(String),

    /// No admissible adjustment set, or a context that breaks identification.
    #[error("not identifiable: {reason}")]
    NotIdentifiable { reason: String, path: Vec<String> },

    /// The conditioning event has zero mass and no smoothing is configured.
    #[error("conditioning on a zero-probability event: {event}")]
    ConditioningOnNull { event: String },

    #[error(transparent)]
    Expr(#[from] ExprError),

    #[error("data error at row {row}: {message}")]
    Row { row: usize, message: String },

    #[error("invalid dataset: {0}")]
    Dataset(String),

    #[error("invalid model: {0}")]
    Model(String),

    #[error("black-box failure at row {row}: {message}")]
    BlackBox { row: usize, message: String },

    #[error("invalid query: {0}")]
    Query(String),

    #[error("logistic fit did not converge after {iterations} iterations (gradient norm {gradient_norm:e})")]
    NonConvergence { iterations: usize, gradient_norm: f64 },

    #[error("degenerate outcome: {0}")]
    Degenerate(String),

    #[error("limit exceeded: {0}")]
    Limit(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Machine-readable code used by the service layer.
    pub fn code(&self) -> &'static str {
        match self {
            Error::ConditioningOnNull { .. } => "CONDITIONING_ON_NULL",
            Error::NotIdentifiable { .. } => "NOT_IDENTIFIABLE",
            Error::UnknownVariable(_) | Error::UnknownValue { .. } => "SCHEMA_MISMATCH",
            Error::Limit(_) => "LIMIT_EXCEEDED",
            Error::BlackBox { .. } => "BLACKBOX_FAILURE",
            _ => "VALIDATION",
        }
    }
}
