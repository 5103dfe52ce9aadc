use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A value lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("gamut too small: requested {requested} samples, only {achievable} fit")]
    GamutTooSmall { requested: usize, achievable: usize },

    #[error("ellipse fit failed: {0}")]
    Fit(String),

    #[error("dictionary error: {0}")]
    Dictionary(String),

    /// An operation was called in a state that does not permit it.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("image error: {0}")]
    Image(String),

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("image too large: {width}x{height} exceeds {max_width}x{max_height}")]
    TooLarge { width: u32, height: u32, max_width: u32, max_height: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
