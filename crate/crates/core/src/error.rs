use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("group {group} has no strategies")]
    EmptyGroup { group: usize },
    #[error("signatures differ: {left:?} vs {right:?}")]
    SignatureMismatch { left: Vec<usize>, right: Vec<usize> },
    #[error("index set does not determine a face: {0}")]
    InvalidFace(String),
    #[error("point is not on the prism: {0}")]
    NotOnPrism(String),
    #[error("linear system has no solution")]
    NoSolution,
    #[error("point touches the boundary (coordinate {index} is {value})")]
    BoundaryPoint { index: usize, value: f64 },
    #[error("payoff matrix is not skew-symmetric (max |A + A^T| = {0:e})")]
    NotSkew(f64),
    #[error("scaling factor of group {group} vanishes")]
    ZeroScaling { group: usize },
    #[error("gradient is not finite at component {0}")]
    NonFiniteGradient(usize),
    #[error("logarithm of nonpositive coordinate {index} (value {value}) with nonzero weight")]
    DomainError { index: usize, value: f64 },
    #[error("skew model violates A0 + A0^T = 0")]
    SkewViolation,
    #[error("A0 q has unequal entries within group {group}")]
    BlockConstantViolation { group: usize },
    #[error("block sum of group {group} vanishes")]
    ZeroBlockSum { group: usize },
    #[error("trajectory left the prism at t = {t} (coordinate {index} = {value:e})")]
    BoundaryEscape { t: f64, index: usize, value: f64 },
    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64 },
    #[error("trajectory sample {index} touches the boundary")]
    BoundarySample { index: usize },
    #[error("point is not a vertex of the prism")]
    NotVertex,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
