//! Distributional statistics of wealth samples.

mod classify;
mod fit;
mod histogram;
mod inequality;
mod sample;

pub use classify::{classify, classify_regime, Classification, ClassifierConfig, Regime};
pub use fit::{
    fit_exponential, fit_exponential_histogram, fit_pareto, fit_pareto_histogram, quantile,
    FitKind, FitResult, HistogramFit, MIN_TAIL,
};
pub use histogram::{Binning, Histogram};
pub use inequality::{gini, mean_std};
pub use sample::{SampleMeta, WealthSample};
