use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate statistics: {0}")]
    DegenerateStats(String),

    #[error("node count {k} exceeds the supported limit of {limit}")]
    SizeLimit { k: usize, limit: usize },

    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::InvalidParameter {
            name,
            reason: format!("{value} is not a probability"),
        });
    }
    Ok(())
}
