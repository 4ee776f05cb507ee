use serde::Serialize;
use ssamask_core::Error as CoreError;

/// Failure of a session operation. Each variant maps to one machine-readable code.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ServiceError {
    #[error("unknown session {0:?}")]
    UnknownSession(String),
    #[error(
        "unknown view {0:?} (expected spectrum, eigenvector, components, advisory or preview)"
    )]
    UnknownView(String),
    #[error("session is at revision {current}, change was based on {base}")]
    StaleRevision { current: u64, base: u64 },
    /// The session has not reached the stage the request needs.
    #[error("{0}")]
    State(String),
    #[error("could not load signal: {0}")]
    Load(String),
    #[error("invalid request: {0}")]
    BadRequest(String),
    #[error("snapshot: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

pub type ServiceResult<T> = Result<T, ServiceError>;

/// Error payload returned by every endpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownSession(_) => "unknown_session",
            ServiceError::UnknownView(_) => "unknown_view",
            ServiceError::StaleRevision { .. } => "stale_revision",
            ServiceError::State(_) => "state_error",
            ServiceError::Load(_) => "load_error",
            ServiceError::BadRequest(_) => "bad_request",
            ServiceError::Io(_) => "io_error",
            ServiceError::Core(e) => match e {
                CoreError::Parameter(_) => "parameter_error",
                CoreError::Grouping { .. } => "grouping_error",
                CoreError::Numerical { .. } => "numerical_error",
                CoreError::Ingestion { .. } => "ingestion_error",
                CoreError::Definition(_) => "definition_error",
                CoreError::Synthesis(_) => "synthesis_error",
                CoreError::Format(_) => "format_error",
                CoreError::Config(_) => "config_error",
            },
        }
    }

    pub fn status(&self) -> u16 {
        match self {
            ServiceError::UnknownSession(_) | ServiceError::UnknownView(_) => 404,
            ServiceError::StaleRevision { .. } | ServiceError::State(_) => 409,
            ServiceError::BadRequest(_) => 400,
            ServiceError::Io(_) | ServiceError::Core(CoreError::Numerical { .. }) => 500,
            ServiceError::Load(_) | ServiceError::Core(_) => 422,
        }
    }

    pub fn body(&self) -> ErrorBody {
        ErrorBody {
            code: self.code(),
            message: self.to_string(),
        }
    }
}
