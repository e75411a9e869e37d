use thiserror::Error;

/// Errors surfaced by the mathematical layers.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("unsupported ring: {0}")]
    UnsupportedRing(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("ring mismatch: {0}")]
    RingMismatch(String),

    #[error("degree budget exceeded (budget {budget}, reached {reached})")]
    DegreeBudgetExceeded { budget: i64, reached: i64 },

    #[error("division by zero")]
    DivisionByZero,

    #[error("not a monomorphism")]
    NotAMonomorphism,

    #[error("not an epimorphism")]
    NotAnEpimorphism,

    #[error("sequence is not exact: {0}")]
    NotExact(String),

    #[error("gluing data is not an isomorphism: {0}")]
    BadGlue(String),

    #[error("cohomology window failed to stabilize within budget")]
    WindowNotStabilized,

    #[error("torsion length must be at least 1")]
    ZeroLength,

    #[error("polynomial is not irreducible: {0}")]
    NotIrreducible(String),

    #[error("not in the image of coherent sheaves")]
    NotCoherentImage,

    #[error("no isomorphism found within the deterministic search budget")]
    IsoSearchExhausted,

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
