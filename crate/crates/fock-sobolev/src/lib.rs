//! Toeplitz operators, semi-commutants and Berezin transforms on
//! Fock-Sobolev spaces of order m, realized as computable objects:
//! arbitrary-precision Gaussian moments, truncated matrices in the
//! orthonormal monomial basis, and cross-checked Berezin evaluators.

pub mod berezin;
pub mod identities;
pub mod moments;
pub mod numerics;
pub mod operators;
pub mod symbols;
pub mod verify;

pub use numerics::{Ctx, FactorialCache, PrecComplex};

/// Library-level error type. Numerical anomalies (non-convergence, violated
/// lemma hypotheses, degenerate inputs) are errors; ordinary small values are
/// not.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("power {power} exceeds the cap {cap}")]
    PowerCap { power: u64, cap: u32 },
    #[error("term count {count} exceeds the cap {cap}")]
    TermCap { count: usize, cap: usize },
    #[error("unsupported atom product: {0}")]
    UnsupportedProduct(String),
    #[error("series did not converge within {terms} terms")]
    NonConvergence { terms: usize },
    #[error("power iteration did not converge within {iterations} iterations")]
    IterationCap { iterations: usize },
    #[error("lemma hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("closed-form Berezin assembly is degenerate at z = 0")]
    DegenerateZ,
    #[error("defect factor {value:.3e} is negative beyond tolerance")]
    NegativeFactor { value: f64 },
    #[error("no nonsingular row set found within probe bound {bound}")]
    RowSearchFailed { bound: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
