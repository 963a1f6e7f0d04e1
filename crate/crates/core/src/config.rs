//! Run configuration echoed into every report.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{q, Q};

pub const PRECISION_ENV: &str = "IDEALLAB_PRECISION_BITS";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Text,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub precision_bits: u32,
    pub horizon: u64,
    pub lp_domain_cap: usize,
    #[serde(with = "crate::rational")]
    pub tolerance: Q,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_start: Option<usize>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            precision_bits: 128,
            horizon: 1 << 16,
            lp_domain_cap: 12,
            tolerance: q(1, 100),
            tail_start: None,
            format: Format::Json,
        }
    }
}

impl RunConfig {
    /// Applies `IDEALLAB_PRECISION_BITS` when it is set.
    pub fn with_env(mut self) -> Result<Self> {
        if let Ok(v) = std::env::var(PRECISION_ENV) {
            self.precision_bits = v.trim().parse().map_err(|_| {
                Error::InvalidInput(format!(
                    "{PRECISION_ENV} must be a positive integer, got {v:?}"
                ))
            })?;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.precision_bits == 0 || self.horizon == 0 || self.lp_domain_cap == 0 {
            return Err(Error::InvalidInput(
                "precision_bits, horizon and lp_domain_cap must be positive".into(),
            ));
        }
        if self.lp_domain_cap > crate::submeasure::LP_HARD_CAP {
            return Err(Error::InvalidInput(format!(
                "lp_domain_cap {} exceeds {}",
                self.lp_domain_cap,
                crate::submeasure::LP_HARD_CAP
            )));
        }
        if self.tolerance < Q::default() {
            return Err(Error::InvalidInput("tolerance must be nonnegative".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_takes_defaults() {
        let c: RunConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, RunConfig::default());
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(
            s,
            r#"{"precision_bits":128,"horizon":65536,"lp_domain_cap":12,"tolerance":"1/100","format":"json"}"#
        );
    }

    #[test]
    fn rejects_bad_caps() {
        let c = RunConfig {
            lp_domain_cap: 0,
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus":1}"#).is_err());
    }
}
