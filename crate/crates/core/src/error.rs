use thiserror::Error;

/// Errors raised anywhere in the exact core.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A shifted double factorial was asked for a negative argument.
    #[error("bracket domain error: argument {argument} gives a negative double factorial at n={n}")]
    Domain { argument: i64, n: i64 },

    #[error("enumeration of {requested} diagrams exceeds the cap of {cap}")]
    ResourceCap { requested: u128, cap: u128 },

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("type mismatch: {0}")]
    TypeMismatch(String),

    /// The Gram matrix G_{kn} is singular; closed forms or Monte Carlo must be used instead.
    #[error("gram-singular: G(k={k}, n={n}) has rank {rank} < {size}")]
    GramSingular {
        k: usize,
        n: u64,
        rank: usize,
        size: usize,
    },

    #[error("odd-length multi-index of length {0}")]
    OddLength(usize),

    #[error("no closed form applies to this matrix")]
    NoClosedForm,

    #[error("gamma-vanishes: the normalization constant is zero")]
    GammaVanishes,

    /// A model matrix row mixes rational and 1/sqrt(2)-scaled entries.
    #[error("irrational-coefficient in row {row}")]
    IrrationalCoefficient { row: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
