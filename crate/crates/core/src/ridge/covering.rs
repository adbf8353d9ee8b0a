//! Covering test: for every round `k` from `2n` up to the horizon
//! `ceil(2n + n/(r-1))`, at least `k` thresholds are at most `k`, where
//! `r = sum_i 1/p_i`. Passing the first `2n + n/(r-1)` constraints implies
//! all of them hold.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use super::{ridge_periods, Mode, ThresholdSchedule};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum Verdict {
    Pass,
    Fail { k: u64 },
    /// No failure found, but no horizon certifies the remaining rounds:
    /// either `r <= 1` or the horizon exceeds the configured limit.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoveringVerdict {
    #[serde(flatten)]
    pub verdict: Verdict,
    /// `sum_i 1/p_i`.
    pub ratio: f64,
    /// Exact ratio when it was computed exactly.
    #[serde(serialize_with = "rational::ser_opt", skip_serializing_if = "Option::is_none")]
    pub ratio_exact: Option<Rational>,
    /// Last round checked.
    pub horizon: u64,
    /// Whether the certifying horizon `ceil(2n + n/(r-1))` was reached.
    pub certified: bool,
    pub ridge_feasible: bool,
}

impl CoveringVerdict {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoveringOptions {
    /// Rounds to check when no certifying horizon is available.
    pub fallback_horizon: Option<u64>,
    /// Largest horizon attempted.
    pub max_horizon: u64,
    /// Agent count up to which `r` is summed exactly.
    pub exact_ratio_limit: usize,
}

impl Default for CoveringOptions {
    fn default() -> Self {
        Self {
            fallback_horizon: None,
            max_horizon: 1 << 27,
            exact_ratio_limit: 512,
        }
    }
}

pub fn covering_test(sched: &ThresholdSchedule) -> Result<CoveringVerdict> {
    covering_test_with(sched, CoveringOptions::default())
}

pub fn covering_test_with(sched: &ThresholdSchedule, opts: CoveringOptions) -> Result<CoveringVerdict> {
    let n = sched.n as u64;
    let (ratio, ratio_exact, certifying) = certifying_horizon(sched, opts.exact_ratio_limit);
    let ridge_feasible = sched.ridge_feasible();
    let (horizon, certified) = match certifying {
        Some(h) if h <= opts.max_horizon => (h, true),
        _ => match opts.fallback_horizon {
            Some(h) => (h.min(opts.max_horizon), false),
            None => {
                return Ok(CoveringVerdict {
                    verdict: Verdict::Inconclusive,
                    ratio,
                    ratio_exact,
                    horizon: 0,
                    certified: false,
                    ridge_feasible,
                })
            }
        },
    };
    let verdict = match first_failure(sched, 2 * n, horizon) {
        Some(k) => Verdict::Fail { k },
        None if certified => Verdict::Pass,
        None => Verdict::Inconclusive,
    };
    Ok(CoveringVerdict {
        verdict,
        ratio,
        ratio_exact,
        horizon,
        certified,
        ridge_feasible,
    })
}

/// `(r as f64, exact r if computed, ceil(2n + n/(r-1)) when r > 1)`.
fn certifying_horizon(sched: &ThresholdSchedule, exact_limit: usize) -> (f64, Option<Rational>, Option<u64>) {
    let n = sched.n as f64;
    let exact_horizon = |r: &Rational| -> Option<u64> {
        if *r <= Rational::one() {
            return None;
        }
        let nn = rational::int(sched.n as i64);
        let h = rational::int(2) * &nn + &nn / (r - Rational::one());
        h.ceil().to_integer().to_u64()
    };
    if sched.n <= exact_limit {
        let r = sched.covering_ratio_exact();
        let h = exact_horizon(&r);
        return (rational::to_f64(&r), Some(r), h);
    }
    let r = sched.covering_ratio_f64();
    let excess = r - 1.0;
    let h = 2.0 * n + n / excess;
    // Near r = 1 or near an integer horizon, the float sum cannot decide the
    // ceiling; fall back to the exact sum.
    if excess < 1e-9 || (h - h.round()).abs() < 1e-6 * h.max(1.0) {
        let exact = sched.covering_ratio_exact();
        let h = exact_horizon(&exact);
        return (rational::to_f64(&exact), Some(exact), h);
    }
    if !h.is_finite() || h > u64::MAX as f64 / 2.0 {
        return (r, None, None);
    }
    (r, None, Some(h.ceil() as u64))
}

/// Smallest `k` in `from..=to` with fewer than `k` thresholds released,
/// counting threshold events once per agent.
pub(crate) fn first_failure(sched: &ThresholdSchedule, from: u64, to: u64) -> Option<u64> {
    if to < from {
        return None;
    }
    let mut events = vec![0u32; to as usize + 1];
    for a in &sched.agents {
        for t in a.upto(to) {
            events[t as usize] += 1;
        }
    }
    first_uncovered(&events, from)
}

/// Smallest `k >= from` whose prefix sum of `events[1..=k]` falls below `k`.
pub(crate) fn first_uncovered(events: &[u32], from: u64) -> Option<u64> {
    let mut released = 0u64;
    for (k, &e) in events.iter().enumerate().skip(1) {
        released += u64::from(e);
        let k = k as u64;
        if k >= from && released < k {
            return Some(k);
        }
    }
    None
}

/// Reference implementation: recounts every agent's thresholds at each `k`.
pub fn naive_first_failure(sched: &ThresholdSchedule, from: u64, to: u64) -> Option<u64> {
    (from..=to).find(|&k| sched.released(k) < k)
}

/// Smallest multiple of `tol` at which the covering test passes with a
/// feasible ridge, by bisection over the grid `tol * k`. Inconclusive probes
/// count as failures, so the result is an upper bound on the best ridge
/// ratio; it is exact on the grid when passing is monotone in the ratio.
pub fn best_ratio_search(n: usize, mode: Mode, tol: &Rational) -> Result<Rational> {
    if *tol <= Rational::from_integer(0.into()) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let passes = |k: &BigInt| -> Result<bool> {
        let rho = tol * Rational::from_integer(k.clone());
        let sched = ridge_periods(n, &rho, mode)?;
        let v = covering_test(&sched)?;
        Ok(v.passed() && v.ridge_feasible)
    };
    // Grid points at or below 1 never pass.
    let mut lo = tol.recip().floor().to_integer();
    let mut hi = &lo * BigInt::from(2);
    while !passes(&hi)? {
        lo = hi.clone();
        hi = &hi * BigInt::from(2);
        if tol * Rational::from_integer(hi.clone()) > rational::int(1 << 20) {
            return Err(Error::InvalidArgument(format!("no passing ratio found for n = {n}")));
        }
    }
    while &hi - &lo > BigInt::one() {
        let mid: BigInt = (&lo + &hi) / BigInt::from(2);
        if passes(&mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(tol * Rational::from_integer(hi))
}
