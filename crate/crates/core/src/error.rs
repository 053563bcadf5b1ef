use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("image is empty")]
    EmptyImage,
    #[error("invalid block size {bx}x{by}")]
    InvalidBlockSpec { bx: usize, by: usize },
    #[error("image {width}x{height} is not divisible into {bx}x{by} blocks")]
    DimensionMismatch {
        width: usize,
        height: usize,
        bx: usize,
        by: usize,
    },
    #[error("rotation requires square blocks, got {bx}x{by}")]
    NonSquareBlock { bx: usize, by: usize },
    #[error("pixel buffer has {actual} bytes, expected {expected}")]
    BufferSize { expected: usize, actual: usize },
    #[error("assembly shapes differ: {0}")]
    ShapeMismatch(String),
    #[error("tile sizes differ: {0}")]
    SizeMismatch(String),
    #[error("expected {expected} pieces, got {actual}")]
    CountMismatch { expected: usize, actual: usize },
    #[error("corrupt stream: {0}")]
    CorruptStream(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
