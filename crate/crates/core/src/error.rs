use thiserror::Error;

/// Errors produced while building or evaluating codes and testers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("enumeration of {required} items exceeds the budget of {budget}")]
    Capacity { required: u128, budget: u64 },
    #[error("shape mismatch: {0}")]
    Mismatch(String),
    #[error("field mismatch: GF({0}) vs GF({1})")]
    FieldMismatch(u32, u32),
    #[error("unsupported field size {0}; expected a prime in 2..=13")]
    UnsupportedField(u32),
    #[error("alphabet is not a vector space")]
    NotVectorAlphabet,
    #[error("input vectors are linearly dependent")]
    DependentBasis,
    #[error("target dimension {target} is smaller than required {required}")]
    DimensionTooSmall { target: usize, required: usize },
    #[error("encoder is not injective: symbols {0} and {1} have the same image")]
    NonInjective(u32, u32),
    #[error("function family is not {{0,1}}-valued")]
    NonBinary,
    #[error("tester is not linear (check {0} accepts a non-subspace)")]
    Nonlinear(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("incomplete report: missing {0}")]
    IncompleteReport(&'static str),
    #[error("stage {stage} needs {required} evaluations, over the budget of {budget}; {hint}")]
    StageCapacity { stage: &'static str, required: u128, budget: u64, hint: String },
    #[error("schema error: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Enumeration budget shared by every exhaustive operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget(pub u64);

impl Budget {
    pub const DEFAULT: Budget = Budget(1 << 26);

    /// Fails with [`Error::Capacity`] when `base^exp` exceeds the budget.
    pub fn check_power(self, base: u64, exp: u64) -> Result<u64> {
        let required = checked_pow(base, exp);
        match required {
            Some(r) if r <= self.0 as u128 => Ok(r as u64),
            Some(r) => Err(Error::Capacity { required: r, budget: self.0 }),
            None => Err(Error::Capacity { required: u128::MAX, budget: self.0 }),
        }
    }

    pub fn check(self, required: u128) -> Result<()> {
        if required <= self.0 as u128 {
            Ok(())
        } else {
            Err(Error::Capacity { required, budget: self.0 })
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::DEFAULT
    }
}

pub(crate) fn checked_pow(base: u64, exp: u64) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base as u128)?;
    }
    Some(acc)
}
