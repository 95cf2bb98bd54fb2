use thiserror::Error;

/// Errors raised by the numerical operations of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate set: {0}")]
    DegenerateSet(String),
    #[error("half-ball too close to the domain boundary at ({x}, {y}): {cells} cells available")]
    BoundaryProximity { x: f64, y: f64, cells: usize },
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("geometry conflict: {0}")]
    GeometryConflict(String),
    #[error("non-finite result: {0}")]
    NonFinite(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("eps must be positive and finite, got {eps}")))
    }
}
