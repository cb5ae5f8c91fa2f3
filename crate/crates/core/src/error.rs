use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QalError {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("derivation image has terms outside degree one (found degree {degree})")]
    NotCovariantImage { degree: i64 },

    #[error("inconsistent derivation data: {0}")]
    InconsistentData(String),

    #[error("beta vanishes at k = {k}")]
    ZeroBeta { k: i64 },

    #[error("alpha vanishes at k = {k}")]
    ZeroAlpha { k: i64 },

    #[error("weight vanishes at k = {k}")]
    ZeroWeight { k: i64 },

    #[error("weights are not normalized: total mass {total}")]
    WeightNotNormalized { total: String },

    #[error("formal kernel of component {n} is square summable on neither side")]
    NeitherOption { n: i64 },

    #[error("eigenvalue collision: beta({j}) equals the target beta({l})")]
    EigenvalueCollision { j: i64, l: i64 },

    #[error("eigenvector support lies outside the window: {0}")]
    TrivialSupport(String),

    #[error("exact evaluation is unavailable for this sequence model")]
    NotExact,
}

pub type Result<T> = std::result::Result<T, QalError>;
