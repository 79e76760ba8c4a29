use thiserror::Error;

use crate::geometry::Point;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    #[error("invalid environment: {0}")]
    InvalidEnvironment(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("arrival undefined at the radial center {0:?}")]
    UndefinedAngle(Point),

    #[error("general position violated at {points:?}: {reason}")]
    GeneralPosition { reason: String, points: Vec<Point> },

    #[error("sweep order violated near {at:?}: {reason}")]
    SweepOrder { reason: String, at: Point },

    #[error("sensing requirement infeasible: {0}")]
    Infeasible(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True for errors caused by the caller's geometry or schedule rather
    /// than by the sensing requirement.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidPolygon(_)
                | Error::InvalidEnvironment(_)
                | Error::InvalidSchedule(_)
                | Error::UndefinedAngle(_)
                | Error::GeneralPosition { .. }
                | Error::SweepOrder { .. }
                | Error::Json(_)
                | Error::Io(_)
        )
    }
}
