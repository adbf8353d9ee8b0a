//! Envy-cycle allocation of chores, costliest first.
//!
//! Each chore goes to an agent who envies nobody; when every agent envies
//! someone, bundles rotate backwards along an envy cycle until some agent is
//! envy-free again. Agent `i` envies `j` when `c_i(B_j) < c_i(B_i)`.

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{to_ido, Allocation, ChoreInstance, PickingOrder};
use crate::rational::{self, rat, Rational};
use crate::shares::{self, OracleLimits};
use crate::simulate::greedy_play;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundTrace {
    /// 1-based chore in processing order.
    pub chore: usize,
    /// 1-based recipient.
    pub recipient: usize,
    /// Cycles rotated before the chore was assigned, as 1-based agents; each
    /// agent takes the bundle of the next one.
    pub rotations: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AlgChoresRun {
    pub allocation: Allocation,
    pub rounds: Vec<RoundTrace>,
    /// Whether the input was reduced to a common cost order first.
    pub reduced: bool,
}

/// Lowest-index agent envied by `i`.
fn first_envied(inst: &ChoreInstance, bundles: &[Vec<usize>], costs: &[Rational], i: usize) -> Option<usize> {
    (0..bundles.len()).find(|&j| j != i && inst.bundle_cost(i, &bundles[j]) < costs[i])
}

/// Finds an envy cycle by walking envy edges from agent 0 (every agent
/// envies someone when this is called).
fn find_cycle(inst: &ChoreInstance, bundles: &[Vec<usize>], costs: &[Rational]) -> Vec<usize> {
    let n = bundles.len();
    let mut seen_at = vec![usize::MAX; n];
    let mut path = Vec::new();
    let mut cur = 0;
    while seen_at[cur] == usize::MAX {
        seen_at[cur] = path.len();
        path.push(cur);
        cur = first_envied(inst, bundles, costs, cur).expect("every agent envies someone");
    }
    path.split_off(seen_at[cur])
}

fn run_ido(inst: &ChoreInstance) -> (Allocation, Vec<RoundTrace>) {
    let n = inst.agents();
    let mut bundles: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut costs = vec![Rational::zero(); n];
    let mut rounds = Vec::with_capacity(inst.chores());
    for r in 0..inst.chores() {
        let mut rotations = Vec::new();
        loop {
            if (0..n).any(|i| first_envied(inst, &bundles, &costs, i).is_none()) {
                break;
            }
            let cycle = find_cycle(inst, &bundles, &costs);
            let before: Rational = rational::sum(&costs);
            let first = bundles[cycle[0]].clone();
            for w in 0..cycle.len() {
                let next = if w + 1 < cycle.len() { bundles[cycle[w + 1]].clone() } else { first.clone() };
                bundles[cycle[w]] = next;
            }
            for (i, c) in costs.iter_mut().enumerate() {
                *c = inst.bundle_cost(i, &bundles[i]);
            }
            assert!(rational::sum(&costs) < before, "rotation did not reduce total cost");
            rotations.push(cycle.iter().map(|&i| i + 1).collect());
        }
        let recipient = (0..n)
            .find(|&i| first_envied(inst, &bundles, &costs, i).is_none())
            .expect("an envy-free agent exists after rotations");
        let allocated: Rational = (0..n).map(|j| inst.bundle_cost(recipient, &bundles[j])).sum();
        assert!(
            &costs[recipient] * rational::int(n as i64) <= allocated,
            "envy-free recipient holds more than her share of the allocated chores"
        );
        bundles[recipient].push(r);
        costs[recipient] = inst.bundle_cost(recipient, &bundles[recipient]);
        rounds.push(RoundTrace {
            chore: r + 1,
            recipient: recipient + 1,
            rotations,
        });
    }
    for b in &mut bundles {
        b.sort_unstable();
    }
    (Allocation { bundles }, rounds)
}

/// Runs the envy-cycle algorithm. Instances without a common cost order are
/// solved on their sorted surrogate; the surrogate allocation, read as a
/// picking order, is then played greedily on the real costs.
pub fn alg_chores(inst: &ChoreInstance) -> Result<AlgChoresRun> {
    if !inst.has_equal_entitlements() {
        return Err(Error::InvalidArgument("the envy-cycle algorithm needs equal entitlements".into()));
    }
    if inst.is_ido() {
        let (allocation, rounds) = run_ido(inst);
        return Ok(AlgChoresRun {
            allocation,
            rounds,
            reduced: false,
        });
    }
    let reduction = to_ido(inst);
    let surrogate = &reduction.instance;
    let (surrogate_alloc, rounds) = run_ido(surrogate);
    let mut owner = vec![0; inst.chores()];
    for (i, bundle) in surrogate_alloc.bundles.iter().enumerate() {
        for &j in bundle {
            owner[j] = i;
        }
    }
    let order = PickingOrder(owner);
    let allocation = greedy_play(&order.to_sequence(), inst)?;
    for i in 0..inst.agents() {
        assert!(
            inst.bundle_cost(i, &allocation.bundles[i]) <= surrogate.bundle_cost(i, &surrogate_alloc.bundles[i]),
            "real bundle of agent {} costs more than her surrogate bundle",
            i + 1
        );
    }
    Ok(AlgChoresRun {
        allocation,
        rounds,
        reduced: true,
    })
}

/// `(4n - 1) / (3n)`.
pub fn aps_bound(n: usize) -> Rational {
    rat(4 * n as i64 - 1, 3 * n as i64)
}

/// Three chores of cost 1 and, for `j = 1..n-1`, two chores of cost
/// `1 + j/n`, sorted nonincreasing. The maximin share is 3 while the
/// algorithm leaves some agent with `4 - 1/n`.
pub fn tight_example(n: usize) -> Result<ChoreInstance> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("tight example needs n >= 2, got {n}")));
    }
    let mut row = vec![rational::int(1); 3];
    for j in 1..n {
        let c = rational::int(1) + rat(j as i64, n as i64);
        row.push(c.clone());
        row.push(c);
    }
    row.sort_by(|a, b| b.cmp(a));
    ChoreInstance::identical(n, row)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AgentRatio {
    pub agent: usize,
    #[serde(serialize_with = "rational::ser")]
    pub cost: Rational,
    #[serde(serialize_with = "rational::ser_opt", skip_serializing_if = "Option::is_none")]
    pub aps: Option<Rational>,
    #[serde(serialize_with = "rational::ser_opt", skip_serializing_if = "Option::is_none")]
    pub mms: Option<Rational>,
    #[serde(serialize_with = "rational::ser_opt", skip_serializing_if = "Option::is_none")]
    pub ratio_to_aps: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RatioReport {
    #[serde(serialize_with = "rational::ser")]
    pub bound: Rational,
    pub agents: Vec<AgentRatio>,
    pub within_bound: bool,
}

/// Compares each agent's bundle with her anyprice and maximin shares.
pub fn ratio_report(inst: &ChoreInstance, alloc: &Allocation, limits: OracleLimits) -> Result<RatioReport> {
    let n = inst.agents();
    let bound = aps_bound(n);
    let mut agents = Vec::with_capacity(n);
    let mut within = true;
    for i in 0..n {
        let cost = inst.bundle_cost(i, &alloc.bundles[i]);
        let aps = shares::aps_oracle_with(inst.row(i), inst.entitlement(i), limits)?;
        let mms = shares::mms_oracle_with(inst.row(i), n, limits)?;
        within &= cost <= &bound * &aps;
        let ratio_to_aps = (!aps.is_zero()).then(|| &cost / &aps);
        agents.push(AgentRatio {
            agent: i + 1,
            cost,
            aps: Some(aps),
            mms: Some(mms),
            ratio_to_aps,
        });
    }
    Ok(RatioReport {
        bound,
        agents,
        within_bound: within,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn tight_n2() {
        let inst = tight_example(2).unwrap();
        assert_eq!(inst.row(0), &[rat(3, 2), rat(3, 2), int(1), int(1), int(1)]);
        let run = alg_chores(&inst).unwrap();
        let mut costs = run.allocation.costs(&inst);
        costs.sort();
        assert_eq!(costs, vec![rat(5, 2), rat(7, 2)]);
        assert!(run.allocation.is_partition(5));
    }

    #[test]
    fn tight_n3_max_bundle() {
        let inst = tight_example(3).unwrap();
        let run = alg_chores(&inst).unwrap();
        let max = rational::max_of(&run.allocation.costs(&inst));
        assert_eq!(max, rat(11, 3));
    }

    #[test]
    fn empty_instance() {
        let inst = ChoreInstance::identical(3, vec![]).unwrap();
        let run = alg_chores(&inst).unwrap();
        assert!(run.allocation.bundles.iter().all(Vec::is_empty));
    }

    #[test]
    fn rotation_recorded() {
        // After three rounds agent 1 holds e_1 and agent 2 holds e_2, e_3;
        // each prefers the other's bundle.
        let inst = ChoreInstance::equal_entitlements(vec![
            vec![int(3), int(1), int(1), int(0)],
            vec![int(3), int(2), int(2), int(0)],
        ])
        .unwrap();
        let run = alg_chores(&inst).unwrap();
        assert!(!run.reduced);
        assert_eq!(run.rounds[3].rotations, vec![vec![1, 2]]);
        assert_eq!(run.allocation.bundles, vec![vec![1, 2, 3], vec![0]]);
    }

    #[test]
    fn crossed_rows_use_surrogate() {
        let inst = ChoreInstance::equal_entitlements(vec![
            vec![int(5), int(1), int(0)],
            vec![int(1), int(5), int(0)],
        ])
        .unwrap();
        let run = alg_chores(&inst).unwrap();
        assert!(run.reduced);
        assert!(run.allocation.is_partition(3));
        assert_eq!(run.allocation.costs(&inst), vec![int(1), int(1)]);
    }

    #[test]
    fn rejects_unequal_entitlements() {
        let inst = ChoreInstance::new(vec![rat(1, 3), rat(2, 3)], vec![vec![int(1)], vec![int(1)]]).unwrap();
        assert!(alg_chores(&inst).is_err());
        assert!(tight_example(1).is_err());
    }
}
