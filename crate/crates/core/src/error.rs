use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix set must contain at least one matrix")]
    EmptySet,

    #[error("non-finite entry in matrix {index}")]
    NonFinite { index: usize },

    #[error("vector is not a common eigenvector: member {index} has residual {residual:e} (allowed {allowed:e})")]
    NotCommonEigenvector {
        index: usize,
        residual: f64,
        allowed: f64,
    },

    #[error("enumeration needs {required} matrix products, budget is {budget}")]
    WorkBudgetExceeded { required: u128, budget: u64 },

    #[error("members share a common eigenvector, so kappa is zero")]
    CommonEigenvectorExists,

    #[error("grid resolution {resolution} too coarse: certified kappa lower bound is {kappa_lower:e}")]
    ResolutionTooCoarse { resolution: f64, kappa_lower: f64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("member {index} is diagonalizable, not a Jordan block")]
    NotJordan { index: usize },

    #[error("member {index} has |det| = {det_modulus}, expected 1")]
    NotUnitDeterminant { index: usize, det_modulus: f64 },

    #[error("degenerate pair: {0}")]
    DegeneratePair(String),

    #[error("angle {angle} is not a root of unity of order {order} (distance {distance:e})")]
    NotRootsOfUnity {
        angle: f64,
        order: u32,
        distance: f64,
    },

    #[error("no admissible (m, n) found below search cap {cap}")]
    SearchCapExceeded { cap: u64 },

    #[error("derived pair (B1, B2) commutes within tolerance")]
    DerivedPairDegenerate,

    #[error("set is not marginally unstable: {0}")]
    NotMarginallyUnstable(String),

    #[error("index {index} out of range for a set of {len} matrices")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
