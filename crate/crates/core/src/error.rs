use thiserror::Error;

use crate::mmcore::space::ValidationReport;

#[derive(Debug, Error)]
pub enum MmError {
    #[error("malformed space: {0}")]
    Structure(String),
    #[error("space violates the mm-space axioms: {0}")]
    Invalid(ValidationReport),
    #[error("non-finite float value {0}")]
    NonFinite(f64),
    #[error("cannot parse numeric value {0:?}")]
    Parse(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
    #[error("mixed exact/float modes ({0} vs {1}) without a tolerance")]
    ModeMismatch(String, String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("total masses differ: {0} vs {1}")]
    UnequalMass(String, String),
    #[error("enumeration of {needed} tuples exceeds the guardrail of {limit}; use the Monte Carlo estimator or raise the limit")]
    Guardrail { needed: f64, limit: f64 },
    #[error("search space of {n} points exceeds the checker limit of {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("concatenation precondition failed: {0}")]
    Concat(String),
    #[error("infeasible marginals: {0}")]
    Infeasible(String),
    #[error("kernel evaluation failed: {0}")]
    Kernel(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = MmError> = std::result::Result<T, E>;
