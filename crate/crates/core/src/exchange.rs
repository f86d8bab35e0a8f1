//! Stochastic pairwise money-exchange baselines.
//!
//! * random-split: the pair pools its money and splits it at a uniform random fraction.
//! * angle: the first agent loses a random fraction, at most `omega`, of its own money.
//! * heterogeneous angle: as above with a per-agent `omega`.
//!
//! Pairs are ordered, uniform over `i != j`, and drawn with replacement.

use std::collections::BTreeMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::seed::{self, Rng};
use crate::stats::{SampleMeta, WealthSample};

pub const INITIAL_ENDOWMENT: f64 = 1.0;
pub const HETEROGENEOUS_OMEGA_RANGE: (f64, f64) = (0.1, 0.9);
/// Seed-derivation key for per-agent omegas, kept apart from the transaction stream.
const OMEGA_STREAM: u64 = 1;

fn check_open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("{name} must lie in (0, 1), got {v}")))
    }
}

fn check_money(u: f64) -> Result<()> {
    if u.is_finite() && u >= 0.0 {
        Ok(())
    } else {
        Err(domain(format!(
            "money must be finite and non-negative, got {u}"
        )))
    }
}

/// Random split of the pooled money: `(eps s, (1 - eps) s)` with `s = ui + uj`.
///
/// The second share is computed as `s - eps s` so the pair total changes by
/// at most one rounding.
pub fn dy_exchange(ui: f64, uj: f64, eps: f64) -> Result<(f64, f64)> {
    check_money(ui)?;
    check_money(uj)?;
    check_open_unit("eps", eps)?;
    Ok(split(ui, uj, eps))
}

#[inline]
fn split(ui: f64, uj: f64, eps: f64) -> (f64, f64) {
    let s = ui + uj;
    let a = eps * s;
    (a, s - a)
}

/// Agent `i` hands `eps * omega * ui` to agent `j`.
pub fn angle_exchange(ui: f64, uj: f64, eps: f64, omega: f64) -> Result<(f64, f64)> {
    check_money(ui)?;
    check_money(uj)?;
    check_open_unit("eps", eps)?;
    check_open_unit("omega", omega)?;
    Ok(transfer(ui, uj, eps, omega))
}

#[inline]
fn transfer(ui: f64, uj: f64, eps: f64, omega: f64) -> (f64, f64) {
    let du = eps * omega * ui;
    (ui - du, uj + du)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExchangeRule {
    Dy,
    Angle { omega: f64 },
    AngleHeterogeneous { omega_per_agent: Vec<f64> },
}

impl ExchangeRule {
    pub fn angle(omega: f64) -> Result<Self> {
        check_open_unit("omega", omega)?;
        Ok(ExchangeRule::Angle { omega })
    }

    pub fn angle_heterogeneous(omega_per_agent: Vec<f64>) -> Result<Self> {
        for &w in &omega_per_agent {
            check_open_unit("omega", w)?;
        }
        Ok(ExchangeRule::AngleHeterogeneous { omega_per_agent })
    }

    /// Per-agent omegas drawn uniformly from [`HETEROGENEOUS_OMEGA_RANGE`].
    pub fn angle_heterogeneous_random(n: usize, seed: u64) -> Result<Self> {
        let mut rng = seed::rng_from_seed(seed::derive(seed, &[OMEGA_STREAM]));
        let (lo, hi) = HETEROGENEOUS_OMEGA_RANGE;
        Self::angle_heterogeneous((0..n).map(|_| rng.gen_range(lo..hi)).collect())
    }

    pub fn name(&self) -> &'static str {
        match self {
            ExchangeRule::Dy => "dy",
            ExchangeRule::Angle { .. } => "angle",
            ExchangeRule::AngleHeterogeneous { .. } => "angle-het",
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            ExchangeRule::Dy => Ok(()),
            ExchangeRule::Angle { omega } => check_open_unit("omega", *omega),
            ExchangeRule::AngleHeterogeneous { omega_per_agent } => {
                if omega_per_agent.len() != n {
                    return Err(domain(format!(
                        "heterogeneous rule has {} omegas for {n} agents",
                        omega_per_agent.len()
                    )));
                }
                omega_per_agent
                    .iter()
                    .try_for_each(|&w| check_open_unit("omega", w))
            }
        }
    }
}

/// One ordered transaction: `i` is the first agent of the pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transaction {
    pub i: usize,
    pub j: usize,
    pub eps: f64,
}

/// Draws an ordered pair `i != j` and a fresh `eps` in `(0, 1)`.
pub fn draw_transaction(rng: &mut Rng, n: usize) -> Transaction {
    let i = rng.gen_range(0..n);
    let mut j = rng.gen_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    let eps = loop {
        let e: f64 = rng.gen();
        if e > 0.0 {
            break e;
        }
    };
    Transaction { i, j, eps }
}

/// Money held by each agent plus the transaction stream driving it.
#[derive(Debug, Clone)]
pub struct ExchangeState {
    money: Vec<f64>,
    total: f64,
    rng_seed: u64,
    rng: Rng,
}

impl ExchangeState {
    /// `n` agents holding [`INITIAL_ENDOWMENT`] each.
    pub fn equal(n: usize, rng_seed: u64) -> Result<Self> {
        Self::new(vec![INITIAL_ENDOWMENT; n], rng_seed)
    }

    pub fn new(money: Vec<f64>, rng_seed: u64) -> Result<Self> {
        if money.len() < 2 {
            return Err(domain(format!(
                "exchange needs at least 2 agents, got {}",
                money.len()
            )));
        }
        money.iter().try_for_each(|&u| check_money(u))?;
        let total = money.iter().sum();
        Ok(Self {
            money,
            total,
            rng_seed,
            rng: seed::rng_from_seed(rng_seed),
        })
    }

    pub fn money(&self) -> &[f64] {
        &self.money
    }

    /// Total at construction; exchanges conserve it up to rounding.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn current_total(&self) -> f64 {
        self.money.iter().sum()
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    /// Applies one transaction under `rule`. The rule must match the agent count.
    pub fn apply(&mut self, rule: &ExchangeRule, t: Transaction) {
        let (ui, uj) = (self.money[t.i], self.money[t.j]);
        let (a, b) = match rule {
            ExchangeRule::Dy => split(ui, uj, t.eps),
            ExchangeRule::Angle { omega } => transfer(ui, uj, t.eps, *omega),
            ExchangeRule::AngleHeterogeneous { omega_per_agent } => {
                transfer(ui, uj, t.eps, omega_per_agent[t.i])
            }
        };
        self.money[t.i] = a;
        self.money[t.j] = b;
    }

    /// Performs the next `transactions` exchanges of this state's stream.
    pub fn run(&mut self, rule: &ExchangeRule, transactions: u64) -> Result<()> {
        rule.validate(self.money.len())?;
        let n = self.money.len();
        for _ in 0..transactions {
            let t = draw_transaction(&mut self.rng, n);
            self.apply(rule, t);
        }
        Ok(())
    }
}

/// Runs `transactions` exchanges from equal endowments and returns the final wealth.
pub fn run_exchange(
    n: usize,
    rule: &ExchangeRule,
    transactions: u64,
    seed: u64,
) -> Result<WealthSample> {
    let mut state = ExchangeState::equal(n, seed)?;
    state.run(rule, transactions)?;
    let mut params = BTreeMap::new();
    if let ExchangeRule::Angle { omega } = rule {
        params.insert("omega".to_string(), *omega);
    }
    let meta = SampleMeta {
        model: format!("exchange-{}", rule.name()),
        params,
        n,
        times: vec![transactions],
        seeds: vec![seed],
    };
    WealthSample::new(state.money, meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dy_examples() {
        assert_eq!(dy_exchange(2.0, 4.0, 0.5).unwrap(), (3.0, 3.0));
        assert_eq!(dy_exchange(4.0, 0.0, 0.25).unwrap(), (1.0, 3.0));
        assert!(dy_exchange(1.0, 1.0, 0.0).is_err());
        assert!(dy_exchange(1.0, 1.0, 1.0).is_err());
        assert!(dy_exchange(-1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn angle_examples() {
        assert_eq!(angle_exchange(4.0, 1.0, 0.5, 0.75).unwrap(), (2.5, 2.5));
        let (a, b) = angle_exchange(3.0, 2.0, 1e-300, 0.4).unwrap();
        assert_eq!((a, b), (3.0, 2.0));
        assert!(angle_exchange(1.0, 1.0, 0.5, 1.0).is_err());
        assert!(angle_exchange(1.0, 1.0, 0.5, 0.0).is_err());
        assert!(angle_exchange(1.0, 1.0, 1.5, 0.5).is_err());
    }

    #[test]
    fn rule_validation() {
        assert!(ExchangeRule::angle(0.75).is_ok());
        assert!(ExchangeRule::angle(1.2).is_err());
        assert!(ExchangeRule::angle_heterogeneous(vec![0.5, 1.0]).is_err());
        let het = ExchangeRule::angle_heterogeneous(vec![0.5; 3]).unwrap();
        assert!(run_exchange(4, &het, 10, 0).is_err());
        assert!(run_exchange(1, &ExchangeRule::Dy, 10, 0).is_err());
        let rnd = ExchangeRule::angle_heterogeneous_random(1000, 9).unwrap();
        match &rnd {
            ExchangeRule::AngleHeterogeneous { omega_per_agent } => {
                assert!(omega_per_agent.iter().all(|&w| (0.1..0.9).contains(&w)));
            }
            _ => unreachable!(),
        }
        assert_eq!(
            rnd,
            ExchangeRule::angle_heterogeneous_random(1000, 9).unwrap()
        );
    }

    #[test]
    fn zero_transactions_is_noop() {
        let s = run_exchange(50, &ExchangeRule::angle(0.75).unwrap(), 0, 1).unwrap();
        assert!(s.values().iter().all(|&u| u == 1.0));
    }

    #[test]
    fn split_runs_continue_the_stream() {
        let rule = ExchangeRule::Dy;
        let mut a = ExchangeState::equal(20, 5).unwrap();
        a.run(&rule, 300).unwrap();
        a.run(&rule, 700).unwrap();
        let mut b = ExchangeState::equal(20, 5).unwrap();
        b.run(&rule, 1000).unwrap();
        assert_eq!(a.money(), b.money());
    }

    #[test]
    fn pairs_never_self() {
        let mut rng = seed::rng_from_seed(3);
        for _ in 0..10_000 {
            let t = draw_transaction(&mut rng, 2);
            assert_ne!(t.i, t.j);
            assert!(t.eps > 0.0 && t.eps < 1.0);
        }
    }

    #[test]
    fn deterministic_runs() {
        let rule = ExchangeRule::Dy;
        let a = run_exchange(100, &rule, 100_000, 42).unwrap();
        let b = run_exchange(100, &rule, 100_000, 42).unwrap();
        assert_eq!(a.values(), b.values());
        let c = run_exchange(100, &rule, 100_000, 43).unwrap();
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn dy_permutation_symmetry() {
        let n = 37;
        // perm[k] is the new label of agent k.
        let perm: Vec<usize> = (0..n).map(|k| (k * 10 + 3) % n).collect();
        let initial: Vec<f64> = (0..n).map(|k| 0.5 + k as f64).collect();
        let mut relabelled = vec![0.0; n];
        for k in 0..n {
            relabelled[perm[k]] = initial[k];
        }
        let mut a = ExchangeState::new(initial, 0).unwrap();
        let mut b = ExchangeState::new(relabelled, 0).unwrap();
        let mut rng = seed::rng_from_seed(77);
        for _ in 0..50_000 {
            let t = draw_transaction(&mut rng, n);
            a.apply(&ExchangeRule::Dy, t);
            b.apply(
                &ExchangeRule::Dy,
                Transaction {
                    i: perm[t.i],
                    j: perm[t.j],
                    eps: t.eps,
                },
            );
        }
        for (k, &p) in perm.iter().enumerate() {
            assert_eq!(b.money()[p], a.money()[k]);
        }
    }

    proptest! {
        #[test]
        fn pair_rules_conserve(ui in 0.0f64..1e6, uj in 0.0f64..1e6, eps in 1e-12f64..1.0, omega in 1e-6f64..0.999_999) {
            prop_assume!(eps < 1.0);
            let s = ui + uj;
            let (a, b) = dy_exchange(ui, uj, eps).unwrap();
            prop_assert!(a >= 0.0 && b >= 0.0);
            prop_assert!((a + b - s).abs() <= f64::EPSILON * s);
            let (a, b) = angle_exchange(ui, uj, eps, omega).unwrap();
            prop_assert!(a >= 0.0 && b >= 0.0);
            prop_assert!((a + b - s).abs() <= 2.0 * f64::EPSILON * s);
        }

        #[test]
        fn runs_conserve_and_stay_non_negative(n in 2usize..60, tx in 0u64..20_000, seed in any::<u64>(), which in 0u8..3) {
            let rule = match which {
                0 => ExchangeRule::Dy,
                1 => ExchangeRule::angle(0.75).unwrap(),
                _ => ExchangeRule::angle_heterogeneous_random(n, seed).unwrap(),
            };
            let s = run_exchange(n, &rule, tx, seed).unwrap();
            let total: f64 = s.values().iter().sum();
            prop_assert!((total - n as f64).abs() <= n as f64 * 1e-12 * n as f64);
            prop_assert!(s.values().iter().all(|&u| u >= 0.0));
        }
    }
}
