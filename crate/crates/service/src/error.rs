use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use mcilp_core::Error;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("malformed request: {0}")]
    BadRequest(String),
    #[error("unknown problem `{0}`")]
    NotFound(String),
    #[error(transparent)]
    Engine(#[from] Error),
    #[error("worker failed: {0}")]
    Internal(String),
}

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
            ServiceError::Engine(e) => match e {
                Error::Parse(_) => StatusCode::BAD_REQUEST,
                Error::EmptyPolyhedron | Error::EmptySet => StatusCode::CONFLICT,
                Error::DimensionMismatch { .. }
                | Error::InvalidInput(_)
                | Error::UnboundedPolyhedron
                | Error::TooLarge(_)
                | Error::NegativeMoment => StatusCode::UNPROCESSABLE_ENTITY,
                _ => StatusCode::INTERNAL_SERVER_ERROR,
            },
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        (self.status(), Json(json!({ "error": self.to_string() }))).into_response()
    }
}

pub type Result<T, E = ServiceError> = std::result::Result<T, E>;
