//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: Vec<usize>,
        right: Vec<usize>,
    },

    #[error("mode {mode} out of range for order-{order} tensor")]
    ModeOutOfRange { mode: usize, order: usize },

    #[error("index {index} out of range for extent {extent}")]
    IndexOutOfRange { index: usize, extent: usize },

    #[error("expected an even-order tensor, got order {order}")]
    OddOrder { order: usize },

    #[error("tensor is not symmetric: relative deviation {deviation:.3e} exceeds {tolerance:.3e}")]
    NotSymmetric { deviation: f64, tolerance: f64 },

    #[error("tensor is not positive definite (min eigenvalue {min_eig:.6e}){hint}")]
    NotPositiveDefinite { min_eig: f64, hint: &'static str },

    #[error("degenerate denominator: trace {value:.6e} is not safely positive")]
    DegenerateDenominator { value: f64 },

    #[error("singular linear system{hint}")]
    SingularSystem { hint: &'static str },

    #[error("class {class} has no samples")]
    EmptyClass { class: usize },

    #[error("invalid labels: {0}")]
    InvalidLabels(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{routine} failed with LAPACK info {info}")]
    Backend { routine: &'static str, info: i32 },

    #[error("data format error: {0}")]
    Format(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn shape_mismatch(op: &'static str, left: &[usize], right: &[usize]) -> Self {
        Error::ShapeMismatch {
            op,
            left: left.to_vec(),
            right: right.to_vec(),
        }
    }
}
