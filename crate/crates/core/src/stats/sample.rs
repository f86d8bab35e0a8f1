use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Where a sample came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub model: String,
    pub params: BTreeMap<String, f64>,
    pub n: usize,
    /// Iterations (or transactions) at which values were taken.
    pub times: Vec<u64>,
    pub seeds: Vec<u64>,
}

/// Pooled wealth values. Non-empty, finite and non-negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WealthSample {
    values: Vec<f64>,
    pub meta: SampleMeta,
}

impl WealthSample {
    pub fn new(values: Vec<f64>, meta: SampleMeta) -> Result<Self> {
        if values.is_empty() {
            return Err(domain("wealth sample must be non-empty"));
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(domain(format!(
                "wealth values must be finite and non-negative, got {bad}"
            )));
        }
        Ok(Self { values, meta })
    }

    /// Sample without provenance, mostly for tests and synthetic data.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        Self::new(values, SampleMeta::default())
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

    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }
}
