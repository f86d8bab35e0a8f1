//! Scalar map obeyed by a uniform lattice: `x' = r x exp(-|1 - a| x)`.
//!
//! With `c = |1 - a|` and `y = c x` this is conjugate to the Ricker map
//! `y' = r y exp(-y)`. The positive fixed point `ln r / c` exists for `r > 1`
//! and has multiplier `1 - ln r`, so it loses stability through a flip at
//! `r = e^2`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::range::ValueRange;

pub const DEFAULT_TRANSIENT: usize = 1_000;
pub const DEFAULT_KEPT: usize = 256;
pub const MAX_PERIOD: usize = 64;
pub const PERIOD_RTOL: f64 = 1e-9;
/// Values below this are treated as zero when matching orbit samples.
pub const PERIOD_ATOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarMapParams {
    r: f64,
    a: f64,
}

impl ScalarMapParams {
    pub fn new(r: f64, a: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(domain(format!("growth capacity must be positive, got {r}")));
        }
        if !(a.is_finite() && a >= 0.0) {
            return Err(domain(format!("pressure must be non-negative, got {a}")));
        }
        Ok(Self { r, a })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Inhibition coefficient `|1 - a|`.
    pub fn c(&self) -> f64 {
        (1.0 - self.a).abs()
    }

    fn require_regular(&self) -> Result<()> {
        if self.a == 1.0 {
            Err(Error::SingularParameter)
        } else {
            Ok(())
        }
    }
}

fn check_x(x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(domain(format!(
            "wealth must be finite and non-negative, got {x}"
        )))
    }
}

pub fn uniform_map(x: f64, params: &ScalarMapParams) -> Result<f64> {
    check_x(x)?;
    Ok(params.r * x * (-params.c() * x).exp())
}

/// The Ricker map `r y exp(-y)`.
pub fn generic_map(y: f64, r: f64) -> Result<f64> {
    check_x(y)?;
    Ok(r * y * (-y).exp())
}

/// Change of variable `y = |1 - a| x`.
pub fn to_generic(x: f64, params: &ScalarMapParams) -> Result<f64> {
    params.require_regular()?;
    check_x(x)?;
    Ok(params.c() * x)
}

pub fn from_generic(y: f64, params: &ScalarMapParams) -> Result<f64> {
    params.require_regular()?;
    check_x(y)?;
    Ok(y / params.c())
}

fn require_growth(params: &ScalarMapParams) -> Result<()> {
    params.require_regular()?;
    if params.r <= 1.0 {
        return Err(Error::NoPositiveFixedPoint { r: params.r });
    }
    Ok(())
}

pub fn fixed_point(params: &ScalarMapParams) -> Result<f64> {
    require_growth(params)?;
    Ok(params.r.ln() / params.c())
}

/// Derivative of the map at the positive fixed point; independent of `a`.
pub fn multiplier(params: &ScalarMapParams) -> Result<f64> {
    require_growth(params)?;
    Ok(1.0 - params.r.ln())
}

/// Bisection on `|multiplier(r)| - 1` over `[lo, hi]` at pressure `a`.
///
/// Returns the growth capacity where the fixed point loses stability.
pub fn locate_flip(a: f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let excess =
        |r: f64| -> Result<f64> { Ok(multiplier(&ScalarMapParams::new(r, a)?)?.abs() - 1.0) };
    let (mut lo, mut hi) = (lo, hi);
    let (f_lo, f_hi) = (excess(lo)?, excess(hi)?);
    if f_lo.signum() == f_hi.signum() {
        return Err(domain(format!(
            "no stability change bracketed in [{lo}, {hi}]"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if excess(mid)?.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Iterates of the uniform map recorded after a transient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    pub samples: Vec<f64>,
    pub params: ScalarMapParams,
    pub transient: usize,
    pub kept: usize,
}

/// Periodicity verdict for an orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Periodicity {
    Period(usize),
    Aperiodic,
}

fn close(x: f64, y: f64) -> bool {
    let d = (x - y).abs();
    d <= PERIOD_ATOL || d <= PERIOD_RTOL * x.abs().max(y.abs())
}

impl Orbit {
    /// Smallest `p <= MAX_PERIOD` with `samples[i] ~ samples[i + p]` for every `i`.
    pub fn periodicity(&self) -> Periodicity {
        let s = &self.samples;
        (1..=MAX_PERIOD.min(s.len().saturating_sub(1)))
            .find(|&p| s.iter().zip(&s[p..]).all(|(&x, &y)| close(x, y)))
            .map_or(Periodicity::Aperiodic, Periodicity::Period)
    }

    /// Number of distinct values (under the periodicity tolerance) in the orbit.
    pub fn distinct_values(&self) -> usize {
        let mut reps: Vec<f64> = Vec::new();
        for &x in &self.samples {
            if !reps.iter().any(|&y| close(x, y)) {
                reps.push(x);
            }
        }
        reps.len()
    }
}

/// Default starting point: half the fixed point, or 0.5 when none exists.
pub fn default_x_init(params: &ScalarMapParams) -> f64 {
    fixed_point(params).map_or(0.5, |x0| 0.5 * x0)
}

pub fn orbit(
    params: ScalarMapParams,
    transient: usize,
    kept: usize,
    x_init: Option<f64>,
) -> Result<Orbit> {
    params.require_regular()?;
    let mut x = x_init.unwrap_or_else(|| default_x_init(&params));
    if !(x.is_finite() && x > 0.0) {
        return Err(domain(format!("initial value must be positive, got {x}")));
    }
    for _ in 0..transient {
        x = uniform_map(x, &params)?;
    }
    let mut samples = Vec::with_capacity(kept);
    for _ in 0..kept {
        x = uniform_map(x, &params)?;
        samples.push(x);
    }
    Ok(Orbit {
        samples,
        params,
        transient,
        kept,
    })
}

/// One orbit per growth capacity in `r_values`, in input order.
pub fn bifurcation_scan(
    r_values: &ValueRange,
    a: f64,
    transient: usize,
    kept: usize,
    x_init: Option<f64>,
) -> Result<Vec<Orbit>> {
    if a == 1.0 {
        return Err(Error::SingularParameter);
    }
    r_values
        .values()
        .par_iter()
        .map(|&r| orbit(ScalarMapParams::new(r, a)?, transient, kept, x_init))
        .collect()
}
