use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported PRBS order {order} (supported: {min}..={max})")]
    UnsupportedOrder { order: u32, min: u32, max: u32 },

    #[error("invalid feedback polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("{what} = {value} is out of range ({expected})")]
    OutOfRange {
        what: &'static str,
        value: u64,
        expected: String,
    },

    #[error("invalid RO specification: {0}")]
    InvalidRoSpec(String),

    #[error("challenge ({i}, {j}) is invalid for {num_ros} ring oscillators")]
    InvalidChallenge { i: usize, j: usize, num_ros: usize },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}
