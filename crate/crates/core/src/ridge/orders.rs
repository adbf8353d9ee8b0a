//! Explicit periodic orders, order synthesis from thresholds, and a
//! threshold verifier.

use serde::Serialize;

use super::ThresholdSchedule;
use crate::error::{Error, Result};
use crate::model::{PeriodicOrder, PickingOrder};

pub const FIXED_ORDER_NAMES: [&str; 4] = ["n2", "n3", "n4", "super8"];

/// The known ridge orders: `n2` (ratio 4/3), `n3` (7/5), `n4` (13/9) and
/// `super8`, an order for eight super-agents with ratio 8/5.
pub fn fixed_order(name: &str) -> Result<PeriodicOrder> {
    let text = match name {
        "n2" => "1221(221)*",
        "n3" => "123321(23321)*",
        "n4" => "12344321(4324331 4324321)*",
        "super8" => "abcdefghhg(fedcbahgfe dfghcebfag dhfecgfhbd egafchefgh)*",
        _ => return Err(Error::UnknownOrder(name.to_string())),
    };
    PeriodicOrder::parse(text)
}

/// Follows the ridge for rounds `1..=2n`, then gives each round to the agent
/// with the most released but unused thresholds (lowest index on ties).
pub fn synthesize_order(sched: &ThresholdSchedule, m: usize) -> Result<PickingOrder> {
    let n = sched.n;
    if let Some(agent) = sched.ridge_violation() {
        return Err(Error::RidgeViolation { agent });
    }
    let mut rounds = Vec::with_capacity(m);
    let mut used = vec![0u64; n];
    for r in 1..=m {
        let agent = if r <= n {
            r - 1
        } else if r <= 2 * n {
            2 * n - r
        } else {
            let k = r as u64;
            (0..n)
                .map(|i| (i, sched.agents[i].count_upto(k).saturating_sub(used[i])))
                .filter(|&(_, free)| free > 0)
                .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
                .map(|(i, _)| i)
                .ok_or(Error::StuckRound { round: k })?
        };
        used[agent] += 1;
        rounds.push(agent);
    }
    Ok(PickingOrder(rounds))
}

/// An agent receiving her `pick`-th chore before its threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OrderViolation {
    pub round: usize,
    pub agent: usize,
    pub pick: usize,
    pub threshold: u64,
}

/// Checks that no agent's `t`-th allocation happens before her `t`-th
/// threshold.
pub fn verify_order(order: &PickingOrder, sched: &ThresholdSchedule) -> Result<Option<OrderViolation>> {
    order.validate(sched.n)?;
    let mut limits: Vec<Vec<u64>> = sched
        .agents
        .iter()
        .map(|a| a.upto(order.len() as u64))
        .collect();
    for l in &mut limits {
        l.reverse();
    }
    let mut used = vec![0usize; sched.n];
    for (idx, &agent) in order.rounds().iter().enumerate() {
        let round = idx + 1;
        used[agent] += 1;
        match limits[agent].pop() {
            Some(t) if t <= round as u64 => {}
            other => {
                return Ok(Some(OrderViolation {
                    round,
                    agent: agent + 1,
                    pick: used[agent],
                    threshold: other.unwrap_or(u64::MAX),
                }))
            }
        }
    }
    Ok(None)
}
