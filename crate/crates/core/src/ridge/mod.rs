//! Ridge picking orders for equal entitlements.
//!
//! A ridge order gives `e_1..e_n` to agents `1..n` and `e_{n+1}..e_{2n}` to
//! agents `n..1`. Afterwards each agent is paced by release thresholds: her
//! `t`-th chore may not be allocated before round `t_i^t`. Thresholds come
//! from a per-agent class and rational period chosen for a target ratio
//! `rho`; an order exists once enough thresholds are released by every round
//! (the covering constraints).

mod covering;
mod doubling;
mod orders;

pub use covering::{
    best_ratio_search, covering_test, covering_test_with, naive_first_failure, CoveringOptions, CoveringVerdict,
    Verdict,
};
pub use doubling::{halve_thresholds, halve_thresholds_strict, HalvedSchedule};
pub use orders::{fixed_order, synthesize_order, verify_order, OrderViolation, FIXED_ORDER_NAMES};

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Period convention.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Individual agents.
    Agent,
    /// Super-agents standing for blocks of agents; periods are counted
    /// from the first member of the block.
    Super,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "agent" => Ok(Mode::Agent),
            "super" => Ok(Mode::Super),
            _ => Err(Error::InvalidArgument(format!("unknown mode {s:?}, expected agent or super"))),
        }
    }
}

/// Thresholds of one agent: a few fixed rounds, then `base + ceil(k p)` for
/// `k = 1, 2, ...`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AgentThresholds {
    /// 0 for intermediate agents, 1 for early agents, 2 for late agents.
    pub class: u8,
    #[serde(serialize_with = "rational::ser")]
    pub period: Rational,
    pub fixed: Vec<u64>,
    pub base: u64,
    #[serde(skip)]
    period_num: i128,
    #[serde(skip)]
    period_den: i128,
}

impl AgentThresholds {
    pub fn new(class: u8, period: Rational, fixed: Vec<u64>, base: u64) -> Result<Self> {
        if !period.is_positive() {
            return Err(Error::InvalidArgument(format!("period {period} must be positive")));
        }
        let (period_num, period_den) = rational::to_i128_pair(&period)?;
        Ok(Self {
            class,
            period,
            fixed,
            base,
            period_num,
            period_den,
        })
    }

    /// Number of thresholds at most `k`.
    pub fn count_upto(&self, k: u64) -> u64 {
        let fixed = self.fixed.iter().filter(|&&t| t <= k).count() as u64;
        if k < self.base {
            return fixed;
        }
        let steps = (k - self.base) as i128 * self.period_den / self.period_num;
        fixed + steps as u64
    }

    /// Thresholds in increasing order, up to and including `limit`.
    pub fn upto(&self, limit: u64) -> Vec<u64> {
        let mut out: Vec<u64> = self.fixed.iter().copied().filter(|&t| t <= limit).collect();
        let mut k: i128 = 1;
        loop {
            let t = self.base as i128 + ceil_div(k * self.period_num, self.period_den);
            if t > limit as i128 {
                break;
            }
            out.push(t as u64);
            k += 1;
        }
        out
    }

    /// The first `count` thresholds.
    pub fn first(&self, count: usize) -> Vec<u64> {
        let mut out: Vec<u64> = self.fixed.iter().copied().take(count).collect();
        let mut k: i128 = 1;
        while out.len() < count {
            out.push((self.base as i128 + ceil_div(k * self.period_num, self.period_den)) as u64);
            k += 1;
        }
        out
    }

    pub(crate) fn period_pair(&self) -> (i128, i128) {
        (self.period_num, self.period_den)
    }
}

/// Sums by halves, keeping intermediate denominators small.
fn pairwise_sum(terms: &[Rational]) -> Rational {
    match terms.len() {
        0 => Rational::zero(),
        1 => terms[0].clone(),
        len => pairwise_sum(&terms[..len / 2]) + pairwise_sum(&terms[len / 2..]),
    }
}

pub(crate) fn ceil_div(a: i128, b: i128) -> i128 {
    debug_assert!(b > 0);
    -((-a).div_euclid(b))
}

/// Classes, periods and thresholds of all agents for a target ratio `rho`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThresholdSchedule {
    pub n: usize,
    #[serde(serialize_with = "rational::ser")]
    pub rho: Rational,
    pub mode: Mode,
    pub agents: Vec<AgentThresholds>,
}

/// Classes and periods for `n` agents at ratio `rho > 1`.
///
/// Agent mode: class 1 iff `i < n/rho` with period `(n-i)/(rho-1)`, class 0
/// iff `n/rho <= i <= 2n+1-2n/rho` with period `n/rho`, class 2 otherwise
/// with period `(i-1)/(2(rho-1))`.
///
/// Super mode: candidate periods `(n-i+1)/(rho-1)`, `n/rho` and
/// `i/(2(rho-1))`; the agent takes the class whose period is largest, with
/// ties going to class 0.
pub fn ridge_periods(n: usize, rho: &Rational, mode: Mode) -> Result<ThresholdSchedule> {
    if *rho <= Rational::one() {
        return Err(Error::InvalidArgument(format!("ratio {rho} must exceed 1")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("at least one agent is required".into()));
    }
    let nn = rational::int(n as i64);
    let excess = rho - Rational::one();
    let middle = &nn / rho;
    let upper = rational::int(2 * n as i64 + 1) - rational::int(2) * &middle;
    let mut agents = Vec::with_capacity(n);
    for i in 1..=n {
        let ii = rational::int(i as i64);
        let (class, period) = match mode {
            Mode::Agent => {
                if ii < middle {
                    (1, (&nn - &ii) / &excess)
                } else if ii <= upper {
                    (0, middle.clone())
                } else {
                    (2, (&ii - Rational::one()) / (rational::int(2) * &excess))
                }
            }
            Mode::Super => {
                let early = (&nn - &ii + Rational::one()) / &excess;
                let late = &ii / (rational::int(2) * &excess);
                if early > middle && early >= late {
                    (1, early)
                } else if late > middle {
                    (2, late)
                } else {
                    (0, middle.clone())
                }
            }
        };
        agents.push(class_thresholds(n, i, class, period)?);
    }
    Ok(ThresholdSchedule {
        n,
        rho: rho.clone(),
        mode,
        agents,
    })
}

fn class_thresholds(n: usize, i: usize, class: u8, period: Rational) -> Result<AgentThresholds> {
    let (i, n) = (i as u64, n as u64);
    match class {
        0 => AgentThresholds::new(0, period, vec![], 0),
        1 => AgentThresholds::new(1, period, vec![i], i),
        _ => AgentThresholds::new(2, period, vec![i, 2 * n - i + 1], 2 * n - i + 1),
    }
}

impl ThresholdSchedule {
    /// Builds a schedule from explicit per-agent thresholds.
    pub fn from_agents(n: usize, rho: Rational, mode: Mode, agents: Vec<AgentThresholds>) -> Self {
        Self { n, rho, mode, agents }
    }

    pub fn periods(&self) -> Vec<Rational> {
        self.agents.iter().map(|a| a.period.clone()).collect()
    }

    pub fn classes(&self) -> Vec<u8> {
        self.agents.iter().map(|a| a.class).collect()
    }

    /// Total thresholds at most `k`.
    pub fn released(&self, k: u64) -> u64 {
        self.agents.iter().map(|a| a.count_upto(k)).sum()
    }

    /// True iff agent `i` (1-based) may take `e_i` and `e_{2n-i+1}`.
    pub fn ridge_feasible(&self) -> bool {
        self.ridge_violation().is_none()
    }

    /// First agent (1-based) whose thresholds forbid her ridge rounds.
    pub fn ridge_violation(&self) -> Option<usize> {
        let n = self.n as u64;
        (1..=self.n).find(|&i| {
            let t = self.agents[i - 1].first(2);
            let i = i as u64;
            t[0] > i || t[1] > 2 * n - i + 1
        })
    }

    /// `sum_i 1/p_i`, exactly.
    pub fn covering_ratio_exact(&self) -> Rational {
        let terms: Vec<Rational> = self.agents.iter().map(|a| a.period.recip()).collect();
        pairwise_sum(&terms)
    }

    /// `sum_i 1/p_i` in floating point.
    pub fn covering_ratio_f64(&self) -> f64 {
        let mut sum = 0.0;
        let mut carry = 0.0;
        for a in &self.agents {
            let (p, q) = a.period_pair();
            let y = q as f64 / p as f64 - carry;
            let t = sum + y;
            carry = (t - sum) - y;
            sum = t;
        }
        sum
    }
}
