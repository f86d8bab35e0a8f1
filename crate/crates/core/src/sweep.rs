//! Measurement protocol and (a, r) grid sweeps.
//!
//! Each realization starts from its own random initial condition, is run
//! through a transient, and then contributes:
//!
//! * its snapshot at the end of the transient to the pooled sample used for
//!   distribution fits, and
//! * mean / std / Gini averaged over the measurement window, which are then
//!   averaged again across realizations.
//!
//! Realizations and cells are evaluated in parallel and gathered in index
//! order, so outputs do not depend on the number of worker threads.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::lattice::{self, ModelParams, SiteParam};
use crate::range::ValueRange;
use crate::seed;
use crate::stats::{
    self, classify, fit_exponential, fit_pareto, quantile, Classification, ClassifierConfig,
    FitResult, Regime, SampleMeta, WealthSample,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub n: usize,
    pub init_lo: f64,
    pub init_hi: f64,
    pub transient: u64,
    pub measure_iters: u64,
    pub realizations: u64,
    pub base_seed: u64,
    /// Measure scalars only at the end of the transient.
    pub snapshot_only: bool,
}

impl Default for ProtocolConfig {
    /// Desk-scale protocol: N = 10^4 and 10 realizations.
    fn default() -> Self {
        Self {
            n: 10_000,
            init_lo: 1.0,
            init_hi: 100.0,
            transient: 10_000,
            measure_iters: 100,
            realizations: 10,
            base_seed: 0,
            snapshot_only: false,
        }
    }
}

impl ProtocolConfig {
    /// N = 10^5 with 100 realizations.
    pub fn full_scale() -> Self {
        Self {
            n: 100_000,
            realizations: 100,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(domain(format!(
                "system size must be at least 2, got {}",
                self.n
            )));
        }
        if !(0.0 <= self.init_lo && self.init_lo < self.init_hi && self.init_hi.is_finite()) {
            return Err(domain(format!(
                "initial interval must satisfy 0 <= lo < hi, got ({}, {})",
                self.init_lo, self.init_hi
            )));
        }
        if self.measure_iters < 1 {
            return Err(domain("measure_iters must be at least 1"));
        }
        if self.realizations < 1 {
            return Err(domain("realizations must be at least 1"));
        }
        Ok(())
    }

    fn window(&self) -> u64 {
        if self.snapshot_only {
            1
        } else {
            self.measure_iters
        }
    }
}

/// Two-level averaged scalar statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarStats {
    pub mean: f64,
    pub std: f64,
    /// Absent when every measured state had zero mean wealth.
    pub gini: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolOutput {
    pub sample: WealthSample,
    pub scalars: ScalarStats,
}

struct Realization {
    snapshot: Vec<f64>,
    mean: f64,
    std: f64,
    gini: Option<f64>,
}

fn state_scalars(wealth: &[f64]) -> Result<(f64, f64, Option<f64>)> {
    let s = WealthSample::from_values(wealth.to_vec())?;
    let (mean, std) = stats::mean_std(&s);
    Ok((mean, std, stats::gini(&s).ok()))
}

fn average_gini(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let defined: Vec<f64> = values.flatten().collect();
    (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
}

fn run_realization(params: &ModelParams, config: &ProtocolConfig, k: u64) -> Result<Realization> {
    let seed = seed::realization_seed(config.base_seed, k);
    let mut state = lattice::init_random(config.n, config.init_lo, config.init_hi, seed)?;
    lattice::run_in_place(&mut state, params, config.transient)?;
    let snapshot = state.wealth().to_vec();

    let window = config.window();
    let mut per_iter = Vec::with_capacity(window as usize);
    for m in 0..window {
        if m > 0 {
            lattice::run_in_place(&mut state, params, 1)?;
        }
        per_iter.push(state_scalars(state.wealth())?);
    }
    let w = window as f64;
    Ok(Realization {
        snapshot,
        mean: per_iter.iter().map(|s| s.0).sum::<f64>() / w,
        std: per_iter.iter().map(|s| s.1).sum::<f64>() / w,
        gini: average_gini(per_iter.iter().map(|s| s.2)),
    })
}

fn param_meta(params: &ModelParams) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    if let SiteParam::Uniform(a) = params.a() {
        out.insert("a".to_string(), *a);
    }
    if let SiteParam::Uniform(r) = params.r() {
        out.insert("r".to_string(), *r);
    }
    out
}

/// Runs every realization of the protocol for one parameter set.
pub fn run_protocol(params: &ModelParams, config: &ProtocolConfig) -> Result<ProtocolOutput> {
    config.validate()?;
    let runs: Vec<Realization> = (0..config.realizations)
        .into_par_iter()
        .map(|k| run_realization(params, config, k))
        .collect::<Result<_>>()?;

    let r = runs.len() as f64;
    let scalars = ScalarStats {
        mean: runs.iter().map(|x| x.mean).sum::<f64>() / r,
        std: runs.iter().map(|x| x.std).sum::<f64>() / r,
        gini: average_gini(runs.iter().map(|x| x.gini)),
    };
    let meta = SampleMeta {
        model: "lattice".to_string(),
        params: param_meta(params),
        n: config.n,
        times: vec![config.transient],
        seeds: (0..config.realizations)
            .map(|k| seed::realization_seed(config.base_seed, k))
            .collect(),
    };
    let values = runs.into_iter().flat_map(|x| x.snapshot).collect();
    Ok(ProtocolOutput {
        sample: WealthSample::new(values, meta)?,
        scalars,
    })
}

/// How pooled samples are fitted and labelled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub classifier: ClassifierConfig,
    /// Lower bound of the exponential fit over the whole sample.
    pub exponential_xmin: f64,
    /// Quantile used as the Pareto `xmin`.
    pub pareto_quantile: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            classifier: ClassifierConfig::default(),
            exponential_xmin: 0.0,
            pareto_quantile: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub classification: Classification,
    pub exponential: Option<FitResult>,
    pub pareto: Option<FitResult>,
}

impl Analysis {
    pub fn label(&self) -> Regime {
        self.classification.label
    }

    /// The fit matching the label; for unclassified samples the one with the smaller KS distance.
    pub fn primary_fit(&self) -> Option<&FitResult> {
        match self.label() {
            Regime::BoltzmannGibbs => self.exponential.as_ref(),
            Regime::Pareto => self.pareto.as_ref(),
            Regime::Collapsed => None,
            Regime::Unclassified => [self.exponential.as_ref(), self.pareto.as_ref()]
                .into_iter()
                .flatten()
                .min_by(|a, b| a.ks_distance.total_cmp(&b.ks_distance)),
        }
    }
}

pub fn analyze(sample: &WealthSample, config: &AnalysisConfig) -> Analysis {
    let classification = classify(sample, &config.classifier);
    if classification.label == Regime::Collapsed {
        return Analysis {
            classification,
            exponential: None,
            pareto: None,
        };
    }
    let exponential = fit_exponential(sample, config.exponential_xmin).ok();
    let xmin = quantile(&sample.sorted(), config.pareto_quantile);
    let pareto = fit_pareto(sample, xmin).ok();
    Analysis {
        classification,
        exponential,
        pareto,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub a: f64,
    pub r: f64,
    pub label: Regime,
    pub mu: Option<f64>,
    pub h: Option<f64>,
    pub alpha: Option<f64>,
    pub gini: Option<f64>,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub n_pooled: usize,
    /// Failure that prevented the cell from being measured.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub a_values: Vec<f64>,
    pub r_values: Vec<f64>,
    /// Row-major in `a`: cell `(i, j)` lives at `i * r_values.len() + j`.
    pub cells: Vec<CellResult>,
    pub config: ProtocolConfig,
    pub analysis: AnalysisConfig,
}

impl PhaseDiagram {
    pub fn cell(&self, i: usize, j: usize) -> &CellResult {
        &self.cells[i * self.r_values.len() + j]
    }
}

/// Seed of the cell at `(a, r)`; depends only on the values, not their grid position.
pub fn cell_seed(base_seed: u64, a: f64, r: f64) -> u64 {
    seed::derive(base_seed, &[a.to_bits(), r.to_bits()])
}

/// Measures a single `(a, r)` cell exactly as [`sweep_grid`] would.
pub fn run_cell(a: f64, r: f64, config: &ProtocolConfig, analysis: &AnalysisConfig) -> CellResult {
    let failed = |e: String| CellResult {
        a,
        r,
        label: Regime::Unclassified,
        mu: None,
        h: None,
        alpha: None,
        gini: None,
        mean: None,
        std: None,
        n_pooled: 0,
        error: Some(e),
    };
    let params = match ModelParams::homogeneous(r, a) {
        Ok(p) => p,
        Err(e) => return failed(e.to_string()),
    };
    let cfg = ProtocolConfig {
        base_seed: cell_seed(config.base_seed, a, r),
        ..config.clone()
    };
    let out = match run_protocol(&params, &cfg) {
        Ok(o) => o,
        Err(e) => return failed(e.to_string()),
    };
    let an = analyze(&out.sample, analysis);
    CellResult {
        a,
        r,
        label: an.label(),
        mu: an.exponential.as_ref().and_then(|f| f.mu),
        h: an.exponential.as_ref().and_then(|f| f.h),
        alpha: an.pareto.as_ref().and_then(|f| f.alpha),
        gini: out.scalars.gini,
        mean: Some(out.scalars.mean),
        std: Some(out.scalars.std),
        n_pooled: out.sample.len(),
        error: None,
    }
}

pub fn sweep_grid(
    a_values: &ValueRange,
    r_values: &ValueRange,
    config: &ProtocolConfig,
    analysis: &AnalysisConfig,
) -> PhaseDiagram {
    let coords: Vec<(f64, f64)> = a_values
        .values()
        .iter()
        .flat_map(|&a| r_values.values().iter().map(move |&r| (a, r)))
        .collect();
    let cells = coords
        .par_iter()
        .map(|&(a, r)| run_cell(a, r, config, analysis))
        .collect();
    PhaseDiagram {
        a_values: a_values.values().to_vec(),
        r_values: r_values.values().to_vec(),
        cells,
        config: config.clone(),
        analysis: *analysis,
    }
}
