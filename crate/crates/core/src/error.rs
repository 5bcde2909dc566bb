use thiserror::Error;

pub type Result<T> = std::result::Result<T, ModelError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid {name} = {value}: expected {expected}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("rank deficient fit: need at least 3 distinct times, got {distinct}")]
    RankDeficient { distinct: usize },

    #[error("structural recovery infeasible: {0}")]
    Infeasible(String),
}

impl ModelError {
    pub(crate) fn param(name: &'static str, value: f64, expected: &'static str) -> Self {
        ModelError::InvalidParameter {
            name,
            value,
            expected,
        }
    }
}

/// Checks `pred(value)` and reports the parameter otherwise. NaN never passes.
pub(crate) fn check(
    name: &'static str,
    value: f64,
    expected: &'static str,
    pred: impl FnOnce(f64) -> bool,
) -> Result<f64> {
    if value.is_finite() && pred(value) {
        Ok(value)
    } else {
        Err(ModelError::param(name, value, expected))
    }
}
