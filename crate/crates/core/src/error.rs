//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by image I/O, counting, and fitting.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or truncated input data; `offset` is the byte position at
    /// which parsing failed.
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    /// An image violated a structural invariant (dimensions, pixel values).
    #[error("invalid image: {0}")]
    InvalidImage(String),

    /// A caller-supplied parameter was out of range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The image contains no object pixels, so no scale has a defined
    /// log-count.
    #[error("empty object: the image contains no object pixels")]
    EmptyObject,

    /// Fewer than two usable data points remain for regression.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The regression design matrix is rank-deficient (all regressor values
    /// coincide).
    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    /// Every scale was eliminated by the counting filters, e.g. a fully
    /// saturated image where no box contains a non-object pixel.
    #[error("all scales filtered: {0}")]
    AllScalesFiltered(String),

    /// Calibration could not derive a usable normalization factor.
    #[error("calibration failed: {0}")]
    Calibration(String),

    /// A class manifest was structurally invalid or unusable.
    #[error("manifest error: {0}")]
    Manifest(String),

    /// Filesystem access failed for the named path.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
