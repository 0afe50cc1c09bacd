use crate::hashing::{encode_key, Code, CountKey};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CountMode {
    #[default]
    State,
    StateAction,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BonusConfig {
    beta: f64,
    count_mode: CountMode,
}

impl BonusConfig {
    pub fn new(beta: f64, count_mode: CountMode) -> Result<Self> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::config("beta", format!("must be finite and >= 0, got {beta}")));
        }
        Ok(Self { beta, count_mode })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn count_mode(&self) -> CountMode {
        self.count_mode
    }
}

/// `beta / sqrt(n)`. A zero count means the bonus was requested before the
/// state was counted, which is an ordering bug in the caller.
pub fn bonus(count: u64, cfg: &BonusConfig) -> Result<f64> {
    if count == 0 {
        return Err(Error::ZeroCount);
    }
    Ok(cfg.beta / (count as f64).sqrt())
}

/// Counting key for a code; the action participates only in state-action mode.
pub fn make_key(code: &Code, action: Option<u64>, cfg: &BonusConfig) -> Result<CountKey> {
    match cfg.count_mode {
        CountMode::State => encode_key(code, None),
        CountMode::StateAction => encode_key(code, Some(action.ok_or(Error::MissingAction)?)),
    }
}
