use serde::{Deserialize, Serialize};

use super::{fit_exponential, fit_pareto, quantile, FitResult, WealthSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    BoltzmannGibbs,
    Pareto,
    Collapsed,
    Unclassified,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::BoltzmannGibbs => "BOLTZMANN_GIBBS",
            Regime::Pareto => "PARETO",
            Regime::Collapsed => "COLLAPSED",
            Regime::Unclassified => "UNCLASSIFIED",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    /// Mean wealth below which a sample is collapsed.
    pub collapse_mean: f64,
    /// Both laws are fitted on values at or above this sample quantile.
    pub tail_quantile: f64,
    /// A law is acceptable only if its KS distance is below this.
    pub ks_accept: f64,
    /// Required KS advantage of the winning law.
    pub margin: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            collapse_mean: 1e-6,
            tail_quantile: 0.90,
            ks_accept: 0.08,
            margin: 0.01,
        }
    }
}

/// Label plus the two competing tail fits that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub label: Regime,
    pub xmin: Option<f64>,
    pub exponential: Option<FitResult>,
    pub pareto: Option<FitResult>,
}

pub fn classify(sample: &WealthSample, config: &ClassifierConfig) -> Classification {
    let values = sample.values();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if mean < config.collapse_mean {
        return Classification {
            label: Regime::Collapsed,
            xmin: None,
            exponential: None,
            pareto: None,
        };
    }
    let xmin = quantile(&sample.sorted(), config.tail_quantile);
    let exponential = fit_exponential(sample, xmin).ok();
    let pareto = fit_pareto(sample, xmin).ok();
    let ks = |f: &Option<FitResult>| f.as_ref().map_or(f64::INFINITY, |f| f.ks_distance);
    let (ke, kp) = (ks(&exponential), ks(&pareto));

    let label = if ke.min(kp) >= config.ks_accept || (ke - kp).abs() <= config.margin {
        Regime::Unclassified
    } else if ke < kp {
        Regime::BoltzmannGibbs
    } else {
        Regime::Pareto
    };
    Classification {
        label,
        xmin: Some(xmin),
        exponential,
        pareto,
    }
}

pub fn classify_regime(sample: &WealthSample, config: &ClassifierConfig) -> Regime {
    classify(sample, config).label
}
