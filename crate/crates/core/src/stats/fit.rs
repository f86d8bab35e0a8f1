//! Maximum-likelihood tail fits with Kolmogorov-Smirnov diagnostics.
//!
//! Both fits act on the tail `x >= xmin`. The exponential law is shifted to
//! start at `xmin`, so its rate is the reciprocal mean excess. The Pareto
//! exponent is the Hill estimator of the density exponent.

use serde::{Deserialize, Serialize};

use super::{Histogram, WealthSample};
use crate::error::{domain, Error, Result};

/// Fewest tail points either fit will accept.
pub const MIN_TAIL: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FitKind {
    Exponential,
    Pareto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub kind: FitKind,
    /// Exponential rate.
    pub mu: Option<f64>,
    /// Temperature, `1 / mu`.
    pub h: Option<f64>,
    /// Pareto density exponent.
    pub alpha: Option<f64>,
    /// Cumulative exponent, `alpha - 1`.
    pub alpha_bar: Option<f64>,
    pub xmin: f64,
    pub ks_distance: f64,
    pub n_tail: usize,
}

/// Linear-interpolated quantile of an ascending slice.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty slice");
    let q = q.clamp(0.0, 1.0);
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

fn sorted_tail(sample: &WealthSample, xmin: f64) -> Result<Vec<f64>> {
    let mut tail: Vec<f64> = sample
        .values()
        .iter()
        .copied()
        .filter(|&x| x >= xmin)
        .collect();
    if tail.len() < MIN_TAIL {
        return Err(Error::InsufficientData {
            needed: MIN_TAIL,
            got: tail.len(),
        });
    }
    tail.sort_by(f64::total_cmp);
    Ok(tail)
}

/// Sup distance between the empirical CDF of `sorted` and `cdf`.
fn ks_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let above = (i + 1) as f64 / n - f;
            let below = f - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
}

pub fn fit_exponential(sample: &WealthSample, xmin: f64) -> Result<FitResult> {
    if !(xmin.is_finite() && xmin >= 0.0) {
        return Err(domain(format!(
            "xmin must be finite and non-negative, got {xmin}"
        )));
    }
    let tail = sorted_tail(sample, xmin)?;
    if tail[0] == tail[tail.len() - 1] {
        return Err(Error::DegenerateFit("exponential tail has zero variance"));
    }
    let excess = tail.iter().map(|x| x - xmin).sum::<f64>() / tail.len() as f64;
    let mu = 1.0 / excess;
    let ks = ks_distance(&tail, |x| -(-mu * (x - xmin)).exp_m1());
    Ok(FitResult {
        kind: FitKind::Exponential,
        mu: Some(mu),
        h: Some(1.0 / mu),
        alpha: None,
        alpha_bar: None,
        xmin,
        ks_distance: ks,
        n_tail: tail.len(),
    })
}

pub fn fit_pareto(sample: &WealthSample, xmin: f64) -> Result<FitResult> {
    if !(xmin.is_finite() && xmin > 0.0) {
        return Err(domain(format!("Pareto xmin must be positive, got {xmin}")));
    }
    let tail = sorted_tail(sample, xmin)?;
    let log_sum: f64 = tail.iter().map(|x| (x / xmin).ln()).sum();
    if log_sum <= 0.0 {
        return Err(Error::DegenerateFit("every tail sample equals xmin"));
    }
    let hill = tail.len() as f64 / log_sum;
    let alpha = 1.0 + hill;
    let ks = ks_distance(&tail, |x| -(-hill * (x / xmin).ln()).exp_m1());
    Ok(FitResult {
        kind: FitKind::Pareto,
        mu: None,
        h: None,
        alpha: Some(alpha),
        alpha_bar: Some(alpha - 1.0),
        xmin,
        ks_distance: ks,
        n_tail: tail.len(),
    })
}

/// Least-squares line through log-densities of a histogram. Diagnostic only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramFit {
    /// Negated slope: the rate `mu` (semi-log) or exponent `alpha` (log-log).
    pub exponent: f64,
    pub intercept: f64,
    pub bins_used: usize,
}

fn least_squares(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: points.len(),
        });
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit(
            "histogram regression has a single abscissa",
        ));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

fn log_density_points(hist: &Histogram, log_x: bool) -> Vec<(f64, f64)> {
    hist.centers()
        .into_iter()
        .zip(hist.densities())
        .zip(&hist.counts)
        .filter(|(_, &c)| c > 0)
        .map(|((x, d), _)| (if log_x { x.ln() } else { x }, d.ln()))
        .collect()
}

/// Slope of `ln P(x)` against `x` over non-empty bins.
pub fn fit_exponential_histogram(hist: &Histogram) -> Result<HistogramFit> {
    let pts = log_density_points(hist, false);
    let (slope, intercept) = least_squares(&pts)?;
    Ok(HistogramFit {
        exponent: -slope,
        intercept,
        bins_used: pts.len(),
    })
}

/// Slope of `ln P(x)` against `ln x` over non-empty bins.
pub fn fit_pareto_histogram(hist: &Histogram) -> Result<HistogramFit> {
    let pts = log_density_points(hist, true);
    let (slope, intercept) = least_squares(&pts)?;
    Ok(HistogramFit {
        exponent: -slope,
        intercept,
        bins_used: pts.len(),
    })
}
