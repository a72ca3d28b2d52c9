use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point count N = {0} is too small (need N >= 4)")]
    TooFewPoints(usize),
    #[error("point count N = {0} is odd; Z/(N-1) needs an odd modulus")]
    OddPointCount(usize),
    #[error("point count N = {0} is not divisible by 4 (pass the non-4n override for negative tests)")]
    NotDivisibleByFour(usize),
    #[error("point count N = {0} exceeds the supported maximum of {max}", max = crate::indexset::MAX_POINTS)]
    TooManyPoints(usize),
    #[error("the subset U must be nonempty")]
    EmptySubset,
    #[error("parity function {phi:#b} is not a member of L({group})")]
    LabelMembership { group: String, phi: u64 },
    #[error("value {re} + {im}i is not on the unit circle")]
    NonUnitModulus { re: f64, im: f64 },
    #[error("x table is not symmetric at ({i}, {j}): deviation {deviation:e}")]
    SymmetryViolation { i: usize, j: usize, deviation: f64 },
    #[error("parameter set failed validation: {0}")]
    InvalidParameters(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("ambiguous overlap |<{a},{b}>| = {value:e} inside the guard band")]
    AmbiguousOverlap { a: usize, b: usize, value: f64 },
    #[error("dense path requested for N = {0}; dense rays are only built for N <= 8")]
    DenseTooLarge(usize),
    #[error("dense and factored paths disagree on pair ({a}, {b}): {dense:e} vs {factored:e}")]
    PathMismatch { a: usize, b: usize, dense: f64, factored: f64 },
    #[error("ray count mismatch: {0} vs {1}")]
    RayCountMismatch(usize, usize),
    #[error("exhaustive search over {0} assignments exceeds the 10^6 cap")]
    ExhaustiveTooLarge(u128),
    #[error("backtracking search exceeded the budget of {0} nodes")]
    SearchBudgetExceeded(u64),
    #[error("graph isomorphism search is limited to at most {max} rays (got {0})", max = crate::graph::ISOMORPHISM_MAX_RAYS)]
    IsomorphismTooLarge(usize),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
