use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// An ordered, non-empty list of parameter values.
///
/// Parsed from `lo:hi:step` (inclusive of `hi` up to rounding) or from a
/// single number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueRange {
    values: Vec<f64>,
}

impl ValueRange {
    pub fn stepped(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && step.is_finite()) {
            return Err(domain("range bounds must be finite"));
        }
        if hi < lo {
            return Err(domain(format!(
                "range upper bound {hi} is below lower bound {lo}"
            )));
        }
        if step <= 0.0 {
            return Err(domain(format!("range step must be positive, got {step}")));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        // Values are lo + k*step rather than an accumulated sum so the grid is exact per index.
        let values = (0..count).map(|k| lo + k as f64 * step).collect();
        Ok(Self { values })
    }

    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(domain("range must contain at least one value"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(domain("range values must be finite"));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl FromStr for ValueRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| -> Result<f64> {
            t.trim()
                .parse::<f64>()
                .map_err(|_| domain(format!("malformed range `{s}`: `{t}` is not a number")))
        };
        match parts.as_slice() {
            [v] => Self::explicit(vec![num(v)?]),
            [lo, hi, step] => Self::stepped(num(lo)?, num(hi)?, num(step)?),
            _ => Err(domain(format!(
                "malformed range `{s}`: expected lo:hi:step"
            ))),
        }
    }
}
