//! Ring of agents coupled through exponential maps.
//!
//! Each site updates as `x' = r x exp(-|x - a psi|)` where `psi` is the mean of
//! its two ring neighbours. All sites advance together from the same snapshot.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::seed;

/// Rings at least this large are stepped with parallel chunks.
const PAR_MIN_SITES: usize = 1 << 16;
const PAR_CHUNK: usize = 1 << 14;

/// Wealth of every agent on the ring at a given iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeState {
    wealth: Vec<f64>,
    time: u64,
}

impl LatticeState {
    pub fn new(wealth: Vec<f64>) -> Result<Self> {
        Self::with_time(wealth, 0)
    }

    pub fn with_time(wealth: Vec<f64>, time: u64) -> Result<Self> {
        if wealth.len() < 2 {
            return Err(domain(format!(
                "lattice needs N >= 2 sites, got {}",
                wealth.len()
            )));
        }
        check_wealth(&wealth)?;
        Ok(Self { wealth, time })
    }

    /// Uniform state with every site holding `value`.
    pub fn uniform(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn wealth(&self) -> &[f64] {
        &self.wealth
    }

    pub fn into_wealth(self) -> Vec<f64> {
        self.wealth
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn len(&self) -> usize {
        self.wealth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wealth.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.wealth.iter().sum::<f64>() / self.wealth.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.wealth.iter().copied().fold(0.0, f64::max)
    }
}

fn check_wealth(wealth: &[f64]) -> Result<()> {
    match wealth.iter().position(|x| !x.is_finite() || *x < 0.0) {
        Some(i) => Err(domain(format!(
            "wealth at site {i} must be finite and non-negative, got {}",
            wealth[i]
        ))),
        None => Ok(()),
    }
}

/// A per-site parameter: one value shared by all sites, or one value each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SiteParam {
    Uniform(f64),
    PerSite(Vec<f64>),
}

impl SiteParam {
    #[inline]
    fn at(&self, i: usize) -> f64 {
        match self {
            SiteParam::Uniform(v) => *v,
            SiteParam::PerSite(v) => v[i],
        }
    }

    fn values(&self) -> Box<dyn Iterator<Item = f64> + '_> {
        match self {
            SiteParam::Uniform(v) => Box::new(std::iter::once(*v)),
            SiteParam::PerSite(v) => Box::new(v.iter().copied()),
        }
    }

    fn site_count(&self) -> Option<usize> {
        match self {
            SiteParam::Uniform(_) => None,
            SiteParam::PerSite(v) => Some(v.len()),
        }
    }
}

impl From<f64> for SiteParam {
    fn from(v: f64) -> Self {
        SiteParam::Uniform(v)
    }
}

impl From<Vec<f64>> for SiteParam {
    fn from(v: Vec<f64>) -> Self {
        SiteParam::PerSite(v)
    }
}

/// Growth capacity `r` and environmental pressure `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    r: SiteParam,
    a: SiteParam,
}

impl ModelParams {
    pub fn new(r: impl Into<SiteParam>, a: impl Into<SiteParam>) -> Result<Self> {
        let (r, a) = (r.into(), a.into());
        if let Some(bad) = r.values().find(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(domain(format!(
                "growth capacity must be positive, got {bad}"
            )));
        }
        if let Some(bad) = a.values().find(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(domain(format!("pressure must be non-negative, got {bad}")));
        }
        if let (Some(nr), Some(na)) = (r.site_count(), a.site_count()) {
            if nr != na {
                return Err(domain(format!(
                    "per-site r has {nr} entries but a has {na}"
                )));
            }
        }
        Ok(Self { r, a })
    }

    /// Same `r` and `a` at every site.
    pub fn homogeneous(r: f64, a: f64) -> Result<Self> {
        Self::new(r, a)
    }

    pub fn r(&self) -> &SiteParam {
        &self.r
    }

    pub fn a(&self) -> &SiteParam {
        &self.a
    }

    fn check_len(&self, n: usize) -> Result<()> {
        for (name, p) in [("r", &self.r), ("a", &self.a)] {
            if let Some(m) = p.site_count() {
                if m != n {
                    return Err(domain(format!(
                        "per-site {name} has {m} entries for a lattice of {n} sites"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Mean wealth of the two ring neighbours of site `i`.
pub fn local_field(state: &LatticeState, i: usize) -> f64 {
    let x = &state.wealth;
    let n = x.len();
    let left = x[(i + n - 1) % n];
    let right = x[(i + 1) % n];
    0.5 * (left + right)
}

#[inline(always)]
fn site_update(x: f64, left: f64, right: f64, r: f64, a: f64) -> f64 {
    let psi = 0.5 * (left + right);
    r * x * (-(x - a * psi).abs()).exp()
}

/// Writes one synchronous update of `src` into `dst`.
fn step_into(src: &[f64], dst: &mut [f64], params: &ModelParams) {
    let n = src.len();
    let fill = |offset: usize, out: &mut [f64]| {
        for (k, slot) in out.iter_mut().enumerate() {
            let i = offset + k;
            let left = if i == 0 { src[n - 1] } else { src[i - 1] };
            let right = if i + 1 == n { src[0] } else { src[i + 1] };
            *slot = site_update(src[i], left, right, params.r.at(i), params.a.at(i));
        }
    };
    if n >= PAR_MIN_SITES {
        dst.par_chunks_mut(PAR_CHUNK)
            .enumerate()
            .for_each(|(c, out)| fill(c * PAR_CHUNK, out));
    } else {
        fill(0, dst);
    }
}

/// Advances every site by one iteration.
pub fn step(state: &LatticeState, params: &ModelParams) -> Result<LatticeState> {
    params.check_len(state.len())?;
    check_wealth(&state.wealth)?;
    let mut next = vec![0.0; state.len()];
    step_into(&state.wealth, &mut next, params);
    check_wealth(&next)?;
    Ok(LatticeState {
        wealth: next,
        time: state.time + 1,
    })
}

/// Applies [`step`] `steps` times, reusing two buffers.
pub fn run(state: &LatticeState, params: &ModelParams, steps: u64) -> Result<LatticeState> {
    let mut out = state.clone();
    run_in_place(&mut out, params, steps)?;
    Ok(out)
}

/// In-place variant of [`run`]; `state` is left untouched on error.
pub fn run_in_place(state: &mut LatticeState, params: &ModelParams, steps: u64) -> Result<()> {
    if steps == 0 {
        return Ok(());
    }
    params.check_len(state.len())?;
    check_wealth(&state.wealth)?;
    let mut cur = state.wealth.clone();
    let mut next = vec![0.0; cur.len()];
    for _ in 0..steps {
        step_into(&cur, &mut next, params);
        std::mem::swap(&mut cur, &mut next);
    }
    // A non-finite site never becomes finite again, so checking the final buffer is enough.
    check_wealth(&cur)?;
    state.wealth = cur;
    state.time += steps;
    Ok(())
}

/// `n` independent draws from the open interval `(lo, hi)`.
pub fn init_random(n: usize, lo: f64, hi: f64, seed: u64) -> Result<LatticeState> {
    if n < 2 {
        return Err(domain(format!("lattice needs N >= 2 sites, got {n}")));
    }
    if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi) {
        return Err(domain(format!(
            "initial interval must satisfy 0 <= lo < hi, got ({lo}, {hi})"
        )));
    }
    let mut rng = seed::rng_from_seed(seed);
    let wealth = (0..n)
        .map(|_| loop {
            let v = rng.gen_range(lo..hi);
            if v > lo {
                break v;
            }
        })
        .collect();
    LatticeState::new(wealth)
}
