use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::json;

/// An HTTP error with a stable machine-readable code.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> ApiError {
        ApiError { status, code, message: message.into() }
    }

    pub fn bad_request(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::BAD_REQUEST, "malformed-request", message)
    }

    pub fn not_found(id: &str) -> ApiError {
        ApiError::new(StatusCode::NOT_FOUND, "unknown-session", format!("no session `{id}`"))
    }

    pub fn conflict(code: &'static str, message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::CONFLICT, code, message)
    }

    pub fn internal(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl From<rcs_core::Error> for ApiError {
    fn from(e: rcs_core::Error) -> ApiError {
        use rcs_core::Error as E;
        let message = e.to_string();
        match e {
            E::OutOfRange(_) => ApiError::new(StatusCode::BAD_REQUEST, "invalid-site", message),
            E::InvalidArgument(_) | E::InvalidDomain(_) | E::DomainMismatch { .. } | E::Json(_) => {
                ApiError::bad_request(message)
            }
            E::StrategyPrecondition(_) | E::Precondition(_) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "strategy-precondition", message)
            }
            E::MassMismatch { .. } | E::Solver(_) | E::Io(_) | E::Csv(_) => ApiError::internal(message),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({"error": self.code, "message": self.message}))).into_response()
    }
}
