use serde::{Deserialize, Serialize};

use super::WealthSample;
use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Binning {
    Linear,
    Log,
}

/// Counts over half-open bins `[edges[k], edges[k+1])`; the last bin is closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub binning: Binning,
    pub below: u64,
    pub above: u64,
}

impl Histogram {
    pub fn from_edges(sample: &WealthSample, edges: Vec<f64>, binning: Binning) -> Result<Self> {
        if edges.len() < 2 {
            return Err(domain("histogram needs at least two edges"));
        }
        if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(domain(
                "histogram edges must be finite and strictly increasing",
            ));
        }
        if binning == Binning::Log && edges[0] <= 0.0 {
            return Err(domain("log binning requires a positive lower edge"));
        }
        let bins = edges.len() - 1;
        let (lo, hi) = (edges[0], edges[bins]);
        let mut counts = vec![0u64; bins];
        let (mut below, mut above) = (0, 0);
        for &x in sample.values() {
            if x < lo {
                below += 1;
            } else if x > hi {
                above += 1;
            } else {
                let k = edges
                    .partition_point(|&e| e <= x)
                    .saturating_sub(1)
                    .min(bins - 1);
                counts[k] += 1;
            }
        }
        Ok(Self {
            edges,
            counts,
            binning,
            below,
            above,
        })
    }

    pub fn linear(sample: &WealthSample, lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins == 0 || !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(domain(format!(
                "invalid linear binning [{lo}, {hi}] x {bins}"
            )));
        }
        let w = (hi - lo) / bins as f64;
        let mut edges: Vec<f64> = (0..bins).map(|k| lo + k as f64 * w).collect();
        edges.push(hi);
        Self::from_edges(sample, edges, Binning::Linear)
    }

    pub fn log(sample: &WealthSample, lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if lo <= 0.0 {
            return Err(domain("log binning requires a positive lower edge"));
        }
        if bins == 0 || !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(domain(format!("invalid log binning [{lo}, {hi}] x {bins}")));
        }
        let (llo, lhi) = (lo.ln(), hi.ln());
        let w = (lhi - llo) / bins as f64;
        let mut edges: Vec<f64> = std::iter::once(lo)
            .chain((1..bins).map(|k| (llo + k as f64 * w).exp()))
            .collect();
        edges.push(hi);
        Self::from_edges(sample, edges, Binning::Log)
    }

    /// Linear bins spanning `[0, max]`.
    pub fn auto_linear(sample: &WealthSample, bins: usize) -> Result<Self> {
        let max = sample.values().iter().copied().fold(0.0, f64::max);
        let hi = if max > 0.0 { max } else { 1.0 };
        Self::linear(sample, 0.0, hi, bins)
    }

    /// Log bins spanning the positive values; zeros land in `below`.
    pub fn auto_log(sample: &WealthSample, bins: usize) -> Result<Self> {
        let pos = sample.values().iter().copied().filter(|&x| x > 0.0);
        let (min, max) = pos.fold((f64::INFINITY, 0.0f64), |(lo, hi), x| {
            (lo.min(x), hi.max(x))
        });
        if !(min.is_finite() && max > min) {
            return Err(domain(
                "log histogram needs at least two distinct positive values",
            ));
        }
        Self::log(sample, min, max, bins)
    }

    pub fn in_range(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.in_range() + self.below + self.above
    }

    /// Arithmetic centres for linear bins, geometric centres for log bins.
    pub fn centers(&self) -> Vec<f64> {
        self.edges
            .windows(2)
            .map(|w| match self.binning {
                Binning::Linear => 0.5 * (w[0] + w[1]),
                Binning::Log => (w[0] * w[1]).sqrt(),
            })
            .collect()
    }

    /// Counts divided by bin width.
    pub fn densities(&self) -> Vec<f64> {
        self.edges
            .windows(2)
            .zip(&self.counts)
            .map(|(w, &c)| c as f64 / (w[1] - w[0]))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(v: Vec<f64>) -> WealthSample {
        WealthSample::from_values(v).unwrap()
    }

    #[test]
    fn partition_and_single_bin() {
        let v: Vec<f64> = (0..100).map(|k| k as f64 * 0.37).collect();
        let h = Histogram::linear(&s(v), 0.0, 40.0, 7).unwrap();
        assert_eq!(h.in_range(), 100);
        let h = Histogram::linear(&s(vec![2.5; 30]), 0.0, 10.0, 4).unwrap();
        assert_eq!(h.counts, vec![0, 30, 0, 0]);
    }

    #[test]
    fn edges_and_log_validation() {
        let x = s(vec![1.0, 2.0]);
        assert!(Histogram::from_edges(&x, vec![0.0, 2.0, 1.0], Binning::Linear).is_err());
        assert!(Histogram::from_edges(&x, vec![0.0, 1.0, 1.0], Binning::Linear).is_err());
        assert!(Histogram::from_edges(&x, vec![0.0, 1.0, 10.0], Binning::Log).is_err());
        assert!(Histogram::log(&x, 0.0, 10.0, 5).is_err());
    }

    #[test]
    fn upper_edge_is_inclusive() {
        let h = Histogram::linear(&s(vec![0.0, 1.0, 2.0, 2.0000001]), 0.0, 2.0, 2).unwrap();
        assert_eq!(h.counts, vec![1, 2]);
        assert_eq!(h.above, 1);
    }

    #[test]
    fn auto_log_skips_zeros() {
        let h = Histogram::auto_log(&s(vec![0.0, 0.0, 1.0, 10.0, 100.0]), 4).unwrap();
        assert_eq!(h.below, 2);
        assert_eq!(h.in_range(), 3);
        assert_eq!(h.binning, Binning::Log);
    }

    proptest! {
        #[test]
        fn conservation(v in prop::collection::vec(0.0f64..50.0, 1..500), lo in 0.0f64..20.0, width in 0.5f64..40.0, bins in 1usize..40) {
            let h = Histogram::linear(&s(v.clone()), lo, lo + width, bins).unwrap();
            prop_assert_eq!(h.total(), v.len() as u64);
            if lo > 0.0 {
                let h = Histogram::log(&s(v.clone()), lo, lo + width, bins).unwrap();
                prop_assert_eq!(h.total(), v.len() as u64);
            }
        }
    }
}
