use causal_explain::RecoursePlan;
use serde_json::{json, Value};
use thiserror::Error;

pub type Result<T, E = ServiceError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Core(#[from] causal_explain::Error),

    /// Carries the plan so callers can still show the constraint.
    #[error("no action reaches sufficiency {}", .0.alpha)]
    Infeasible(Box<RecoursePlan>),

    #[error("unknown session `{0}`")]
    UnknownSession(String),

    #[error("invalid request: {0}")]
    BadRequest(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::Core(e) => e.code(),
            ServiceError::Infeasible(_) => "INFEASIBLE",
            ServiceError::UnknownSession(_) => "NOT_FOUND",
            ServiceError::BadRequest(_) => "VALIDATION",
            ServiceError::Io(_) => "IO",
        }
    }

    /// CLI exit status: 1 validation, 2 identifiability, 3 infeasible.
    pub fn exit_code(&self) -> i32 {
        match self.code() {
            "NOT_IDENTIFIABLE" => 2,
            "INFEASIBLE" => 3,
            _ => 1,
        }
    }

    pub fn http_status(&self) -> u16 {
        match self {
            ServiceError::UnknownSession(_) => 404,
            ServiceError::Io(_) => 500,
            _ if self.code() == "SCHEMA_MISMATCH" => 422,
            _ => 400,
        }
    }

    /// `{code, message}` plus the plan for infeasible recourse and the
    /// open path for identification failures.
    pub fn body(&self) -> Value {
        let mut body = json!({ "code": self.code(), "message": self.to_string() });
        match self {
            ServiceError::Infeasible(plan) => {
                body["plan"] = serde_json::to_value(plan).unwrap_or(Value::Null);
            }
            ServiceError::Core(causal_explain::Error::NotIdentifiable { path, .. }) if !path.is_empty() => {
                body["path"] = json!(path);
            }
            _ => {}
        }
        body
    }
}

impl From<serde_json::Error> for ServiceError {
    fn from(e: serde_json::Error) -> Self {
        ServiceError::BadRequest(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_map_to_statuses() {
        let e = ServiceError::Core(causal_explain::Error::UnknownVariable("Q".into()));
        assert_eq!((e.code(), e.http_status(), e.exit_code()), ("SCHEMA_MISMATCH", 422, 1));
        let e = ServiceError::Core(causal_explain::Error::NotIdentifiable {
            reason: "r".into(),
            path: vec!["X".into(), "O".into()],
        });
        assert_eq!((e.http_status(), e.exit_code()), (400, 2));
        assert_eq!(e.body()["path"], json!(["X", "O"]));
        assert_eq!(ServiceError::UnknownSession("s".into()).http_status(), 404);
    }
}
