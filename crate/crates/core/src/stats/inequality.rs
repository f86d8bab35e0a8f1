use super::WealthSample;
use crate::error::{Error, Result};

/// Arithmetic mean and population standard deviation.
pub fn mean_std(sample: &WealthSample) -> (f64, f64) {
    let v = sample.values();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Gini coefficient via the sorted-rank form
/// `G = 2 sum(i x_(i)) / (n sum x) - (n + 1) / n` with 1-based ranks.
pub fn gini(sample: &WealthSample) -> Result<f64> {
    let sorted = sample.sorted();
    let n = sorted.len() as f64;
    let total: f64 = sorted.iter().sum();
    if total <= 0.0 {
        return Err(Error::UndefinedGini);
    }
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, x)| (i + 1) as f64 * x)
        .sum();
    let g = 2.0 * weighted / (n * total) - (n + 1.0) / n;
    // Rounding can leave a perfectly equal sample a few ulps below zero.
    Ok(g.max(0.0))
}
