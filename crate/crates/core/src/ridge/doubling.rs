//! Halving a `2n`-agent schedule into an `n`-agent one: agents `2i-1` and
//! `2i` merge into agent `i` with thresholds `ceil(min(t_{2i-1}^j, t_{2i}^j) / 2)`.

use serde::Serialize;

use super::covering::first_uncovered;
use super::ThresholdSchedule;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HalvedSchedule {
    pub n: usize,
    /// Thresholds of each merged agent up to `horizon`.
    pub thresholds: Vec<Vec<u64>>,
    pub horizon: u64,
    /// Smallest uncovered round in `2n..=horizon`.
    pub first_failure: Option<u64>,
    pub ridge_feasible: bool,
    /// Merged agents (1-based) whose two sources cross: neither source's
    /// thresholds dominate the other's from the third onward.
    pub domination_violations: Vec<usize>,
}

impl HalvedSchedule {
    pub fn covers(&self) -> bool {
        self.first_failure.is_none()
    }
}

/// Merges consecutive agent pairs and checks covering of the result through
/// `horizon`. Domination failures are reported, not rejected.
pub fn halve_thresholds(sched: &ThresholdSchedule, horizon: u64) -> Result<HalvedSchedule> {
    let total = sched.agents.len();
    if total == 0 || !total.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "halving needs an even, positive agent count, got {total}"
        )));
    }
    let n = total / 2;
    let mut thresholds = Vec::with_capacity(n);
    let mut domination_violations = Vec::new();
    for i in 0..n {
        let odd = sched.agents[2 * i].upto(2 * horizon);
        let even = sched.agents[2 * i + 1].upto(2 * horizon);
        let len = odd.len().max(even.len());
        let merged: Vec<u64> = (0..len)
            .map(|j| {
                let a = odd.get(j).copied().unwrap_or(u64::MAX);
                let b = even.get(j).copied().unwrap_or(u64::MAX);
                a.min(b).div_ceil(2)
            })
            .filter(|&t| t <= horizon)
            .collect();
        let common = odd.len().min(even.len());
        let odd_above = (2..common).all(|j| odd[j] >= even[j]);
        let even_above = (2..common).all(|j| odd[j] <= even[j]);
        if !odd_above && !even_above {
            domination_violations.push(i + 1);
        }
        thresholds.push(merged);
    }

    let mut events = vec![0u32; horizon as usize + 1];
    for list in &thresholds {
        for &t in list {
            events[t as usize] += 1;
        }
    }
    let first_failure = first_uncovered(&events, 2 * n as u64);
    let ridge_feasible = thresholds.iter().enumerate().all(|(idx, list)| {
        let i = idx as u64 + 1;
        list.len() >= 2 && list[0] <= i && list[1] <= 2 * n as u64 - i + 1
    });
    Ok(HalvedSchedule {
        n,
        thresholds,
        horizon,
        first_failure,
        ridge_feasible,
        domination_violations,
    })
}

/// As [`halve_thresholds`], but a domination failure is an error.
pub fn halve_thresholds_strict(sched: &ThresholdSchedule, horizon: u64) -> Result<HalvedSchedule> {
    let out = halve_thresholds(sched, horizon)?;
    if !out.domination_violations.is_empty() {
        return Err(Error::Domination {
            pairs: out.domination_violations,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use crate::ridge::{covering_test, ridge_periods, AgentThresholds, Mode};

    #[test]
    fn exact_halving_of_even_thresholds() {
        let a = AgentThresholds::new(0, int(4), vec![2], 2).unwrap();
        let sched = ThresholdSchedule::from_agents(2, int(2), Mode::Agent, vec![a.clone(), a]);
        let out = halve_thresholds(&sched, 9).unwrap();
        assert_eq!(out.thresholds[0], vec![1, 3, 5, 7, 9]);
        assert!(out.domination_violations.is_empty());
    }

    #[test]
    fn halves_eight_agents_at_8_5() {
        let sched = ridge_periods(8, &rat(8, 5), Mode::Agent).unwrap();
        let v = covering_test(&sched).unwrap();
        assert!(v.passed(), "{v:?}");
        let out = halve_thresholds(&sched, v.horizon).unwrap();
        assert!(out.covers(), "{out:?}");
        assert!(out.ridge_feasible);
    }

    #[test]
    fn halves_sixteen_agents_at_8_5() {
        let sched = ridge_periods(16, &rat(8, 5), Mode::Agent).unwrap();
        let v = covering_test(&sched).unwrap();
        assert!(v.passed());
        let out = halve_thresholds(&sched, v.horizon).unwrap();
        assert!(out.covers());
        assert!(out.ridge_feasible);
    }

    #[test]
    fn odd_count_rejected() {
        let sched = ridge_periods(3, &rat(8, 5), Mode::Agent).unwrap();
        assert!(halve_thresholds(&sched, 10).is_err());
    }
}
