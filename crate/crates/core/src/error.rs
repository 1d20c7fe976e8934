use thiserror::Error;

/// Errors surfaced by the engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("polyhedron is empty")]
    EmptyPolyhedron,
    #[error("polyhedron is unbounded")]
    UnboundedPolyhedron,
    #[error("cone is not simplicial")]
    NonSimplicialCone,
    #[error("monomial substitution sends a denominator to 1")]
    DegenerateSubstitution,
    #[error("direction is orthogonal to a denominator vector")]
    NonGenericLambda,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("generating function is not orientation-normalized")]
    NonNormalizedInput,
    #[error("sampled point {0:?} lies outside the declared universe")]
    UniverseViolation(Vec<i64>),
    #[error("term generators are dependent or span a non-saturated lattice")]
    NonSaturatedTerm,
    #[error("encoded set is empty")]
    EmptySet,
    #[error("moment sum is negative: objective is not non-negative on the set")]
    NegativeMoment,
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("integer overflow in exact arithmetic")]
    Overflow,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
