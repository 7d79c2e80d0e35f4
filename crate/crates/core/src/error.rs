use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid box [{x_min}, {y_min}, {x_max}, {y_max}]: {reason}")]
    InvalidBox {
        x_min: f64,
        y_min: f64,
        x_max: f64,
        y_max: f64,
        reason: &'static str,
    },

    #[error("detection score {0} is not a finite value in [0, 1]")]
    InvalidScore(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: {left} boxes but {right} scores")]
    LengthMismatch { left: usize, right: usize },

    #[error("anchor must have positive width and height")]
    DegenerateAnchor,

    #[error("region of interest lies entirely outside the feature map")]
    RoiOutsideMap,

    #[error("region of interest covers no feature-map cell after snapping")]
    EmptyRoi,

    #[error("image {width}x{height} is smaller than the {tiles_x}x{tiles_y} tile grid")]
    ImageTooSmall {
        width: usize,
        height: usize,
        tiles_x: usize,
        tiles_y: usize,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("malformed PGM: {0}")]
    Pgm(String),

    #[error("malformed report: {0}")]
    Report(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
