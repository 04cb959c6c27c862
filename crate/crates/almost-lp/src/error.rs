use thiserror::Error;

/// Errors surfaced by the measure engine and the functional/convergence layers.
#[derive(Debug, Error)]
pub enum AlpError {
    #[error("no analytic rule for this tail weight/value combination: {0}")]
    UnsupportedFamilyCombination(String),

    #[error("tail bound cannot be driven below tolerance {tol} within {max_terms} terms")]
    ToleranceNotReached { tol: f64, max_terms: u64 },

    #[error("set has infinite measure where a finite-measure set is required")]
    InfiniteMeasureSet,

    #[error("sequence has no candidate limit")]
    MissingLimit,

    #[error("brute force requested on {cells} cells (limit {limit})")]
    BruteForceTooLarge { cells: usize, limit: usize },

    #[error("function is not a member of Lambda_p")]
    NotMember,

    #[error("domination sup_n |f_n| <= g fails on cell {cell}")]
    DominationViolated { cell: usize },

    #[error("grid too coarse: best achieved alpha-distance {achieved} > target {target}")]
    GridTooCoarse { achieved: f64, target: f64 },

    #[error("implication violated: {upstream} holds but {downstream} fails")]
    ImplicationViolation {
        upstream: String,
        downstream: String,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("unknown gallery entry: {0}")]
    UnknownEntry(String),

    #[error("gallery parameter out of domain: {0}")]
    ParamOutOfDomain(String),
}

pub type Result<T> = std::result::Result<T, AlpError>;
