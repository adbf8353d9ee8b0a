//! Greedy play of picking sequences, worst-case ratios of picking orders
//! against the chore share, and lower-bound witnesses for non-ridge orders.

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Allocation, ChoreInstance, PickingOrder, PickingSequence};
use crate::rational::{self, rat, Rational};

/// Each round, the scheduled picker takes her cheapest remaining chore
/// (lowest index on ties).
pub fn greedy_play(seq: &PickingSequence, inst: &ChoreInstance) -> Result<Allocation> {
    let m = inst.chores();
    if seq.len() != m {
        return Err(Error::InvalidArgument(format!(
            "sequence has {} rounds for {m} chores",
            seq.len()
        )));
    }
    seq.validate(inst.agents())?;
    let mut taken = vec![false; m];
    let mut alloc = Allocation::empty(inst.agents());
    for &picker in seq.picks() {
        let row = inst.row(picker);
        let pick = (0..m)
            .filter(|&j| !taken[j])
            .min_by(|&a, &b| row[a].cmp(&row[b]).then(a.cmp(&b)))
            .expect("one chore remains per round");
        taken[pick] = true;
        alloc.bundles[picker].push(pick);
    }
    for bundle in &mut alloc.bundles {
        bundle.sort_unstable();
    }
    Ok(alloc)
}

/// Worst-case cost of a risk-averse agent owning the given 1-based picking
/// rounds: the costs sorted nondecreasing, summed at those ranks.
pub fn guaranteed_disvalue(row: &[Rational], rounds: &[usize]) -> Rational {
    let mut sorted = row.to_vec();
    sorted.sort();
    rounds
        .iter()
        .map(|&r| {
            assert!(r >= 1 && r <= sorted.len(), "round {r} outside 1..={}", sorted.len());
            &sorted[r - 1]
        })
        .sum()
}

/// Optimum of the worst-case program with its maximizing valuation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WorstCase {
    #[serde(serialize_with = "rational::ser")]
    pub ratio: Rational,
    #[serde(serialize_with = "rational::ser_vec")]
    pub valuation: Vec<Rational>,
}

/// Exact fraction over i128 used inside the vertex enumeration.
#[derive(Clone, Copy, Debug)]
struct Frac {
    num: i128,
    den: i128,
}

impl Frac {
    fn greater(self, other: Frac) -> bool {
        self.num * other.den > other.num * self.den
    }
}

/// Parameters of the worst-case program: valuations `v` on `m` positions,
/// nonincreasing, `v_1 <= 1`, `v_half <= 1/2`, `sum v <= budget`.
#[derive(Clone, Debug)]
pub struct Normalization {
    pub half: usize,
    pub budget: Rational,
}

impl Normalization {
    /// Equal entitlements among `n` agents: chore share one.
    pub fn equal(n: usize) -> Self {
        Self {
            half: n + 1,
            budget: Rational::from_integer((n as i64).into()),
        }
    }

    /// Entitlement `b`: the chore share bounds `v_1`, the pair at
    /// `floor(1/b)`, and the proportional share `b * total`.
    pub fn entitlement(b: &Rational) -> Self {
        let inv = b.recip();
        let k = inv.floor().to_integer();
        Self {
            half: usize::try_from(k).expect("entitlement too small") + 1,
            budget: inv,
        }
    }
}

/// Worst-case disvalue relative to a chore share of one for an agent that
/// receives the chores at 1-based `positions` out of `m`, with `n` agents of
/// equal entitlement.
pub fn worst_case_ratio_cs(positions: &[usize], n: usize, m: usize) -> WorstCase {
    worst_case(positions, m, &Normalization::equal(n)).expect("small integer budgets fit")
}

/// Maximizes `sum_{j in positions} v_j` over the normalization polytope.
///
/// Every vertex is a step function with at most one level not fixed at
/// `1`, `1/2` or `0`; the free level is set by the budget. Two shapes cover
/// all of them: `1 | 1/2 | c | 0` with `c <= 1/2`, and `1 | c | 1/2 | 0`
/// with `c` in `[1/2, 1]` and the `c` block ending before `half`.
pub fn worst_case(positions: &[usize], m: usize, norm: &Normalization) -> Result<WorstCase> {
    let (bp, bq) = rational::to_i128_pair(&norm.budget)?;
    if bp < 0 {
        return Err(Error::InvalidArgument("negative budget".into()));
    }
    let mut member = vec![false; m + 1];
    for &p in positions {
        if p == 0 || p > m {
            return Err(Error::InvalidArgument(format!("position {p} outside 1..={m}")));
        }
        member[p] = true;
    }
    let mut cnt = vec![0i128; m + 1];
    for x in 1..=m {
        cnt[x] = cnt[x - 1] + i128::from(member[x]);
    }
    let top_limit = (norm.half - 1).min(m);

    // Best value so far and the shape that produced it.
    let mut best = Frac { num: 0, den: 1 };
    let mut best_shape: Option<(u8, usize, usize, usize)> = None;
    let mut offer = |value: Frac, shape: (u8, usize, usize, usize)| {
        if value.greater(best) {
            best = value;
            best_shape = Some(shape);
        }
    };

    for a in 0..=top_limit {
        for b in a..=m {
            // Shape A: 1 on 1..a, 1/2 on a+1..b, c <= 1/2 on b+1..d.
            // Remaining budget 2Q * (P/Q - a - (b - a)/2) = 2P - Q(a + b).
            let slack = 2 * bp - bq * (a + b) as i128;
            if slack >= 0 {
                let base = 2 * cnt[a] + (cnt[b] - cnt[a]);
                offer(Frac { num: base, den: 2 }, (0, a, b, b));
                for d in b + 1..=m {
                    let len = (d - b) as i128;
                    let gain = cnt[d] - cnt[b];
                    // c = min(1/2, slack / (2Q len)).
                    let value = if slack >= bq * len {
                        Frac { num: base + gain, den: 2 }
                    } else {
                        Frac {
                            num: base * bq * len + gain * slack,
                            den: 2 * bq * len,
                        }
                    };
                    offer(value, (0, a, b, d));
                }
            }
            // Shape B: 1 on 1..a, c in [1/2, 1] on a+1..b, 1/2 on b+1..d.
            if b > a && b <= top_limit {
                let len = (b - a) as i128;
                let gain = cnt[b] - cnt[a];
                for d in b..=m {
                    // 2Q(P/Q - a - (d - b)/2) = 2P - Q(2a + d - b).
                    let rest = 2 * bp - bq * (2 * a + d - b) as i128;
                    // Need c = rest / (2Q len) >= 1/2.
                    if rest < bq * len {
                        break;
                    }
                    let tail = cnt[d] - cnt[b];
                    let value = if rest >= 2 * bq * len {
                        Frac { num: 2 * (cnt[b]) + tail, den: 2 }
                    } else {
                        Frac {
                            num: (2 * cnt[a] + tail) * bq * len + gain * rest,
                            den: 2 * bq * len,
                        }
                    };
                    offer(value, (1, a, b, d));
                }
            }
        }
    }

    let ratio = Rational::new(best.num.into(), best.den.into());
    let valuation = match best_shape {
        None => vec![Rational::zero(); m],
        Some(shape) => shape_valuation(shape, m, norm),
    };
    Ok(WorstCase { ratio, valuation })
}

fn shape_valuation((kind, a, b, d): (u8, usize, usize, usize), m: usize, norm: &Normalization) -> Vec<Rational> {
    let one = rat(1, 1);
    let half = rat(1, 2);
    let mut v = vec![Rational::zero(); m];
    v[..a].fill(one.clone());
    if kind == 0 {
        v[a..b].fill(half.clone());
        if d > b {
            let used = rational::int(a as i64) + &half * rational::int((b - a) as i64);
            let c = ((&norm.budget - used) / rational::int((d - b) as i64)).min(half);
            v[b..d].fill(c);
        }
    } else {
        let used = rational::int(a as i64) + &half * rational::int((d - b) as i64);
        let c = ((&norm.budget - used) / rational::int((b - a) as i64)).min(one);
        v[a..b].fill(c);
        v[b..d].fill(half);
    }
    v
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AgentEvaluation {
    pub agent: usize,
    pub positions: Vec<usize>,
    #[serde(flatten)]
    pub worst: WorstCase,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrderEvaluation {
    #[serde(serialize_with = "rational::ser")]
    pub ratio: Rational,
    pub m: usize,
    pub agents: Vec<AgentEvaluation>,
}

/// Largest worst-case ratio against the chore share over all agents, for
/// equal entitlements.
pub fn evaluate_order(order: &PickingOrder, n: usize, m: usize) -> Result<OrderEvaluation> {
    if order.len() < m {
        return Err(Error::InvalidArgument(format!(
            "order has {} rounds, {m} requested",
            order.len()
        )));
    }
    let order = PickingOrder(order.rounds()[..m].to_vec());
    order.validate(n)?;
    let agents: Vec<AgentEvaluation> = (0..n)
        .map(|i| {
            let positions = order.positions(i);
            let worst = worst_case_ratio_cs(&positions, n, m);
            AgentEvaluation {
                agent: i + 1,
                positions,
                worst,
            }
        })
        .collect();
    let ratio = rational::max_of(agents.iter().map(|a| &a.worst.ratio));
    Ok(OrderEvaluation { ratio, m, agents })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessCase {
    /// Two allocations among the first `n` chores.
    TwoAmongFirstN,
    /// Three allocations among the first `2n` chores.
    ThreeAmongFirst2N,
    /// The owner of `e_i` receives her second chore before `e_{2n-i+1}`.
    EarlySecondPick,
}

/// Identical cost row under which some agent's bundle is at least 3/2 of
/// the maximin share (which is 1 for these rows).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub case: WitnessCase,
    /// 1-based.
    pub agent: usize,
    #[serde(serialize_with = "rational::ser_vec")]
    pub costs: Vec<Rational>,
    #[serde(serialize_with = "rational::ser")]
    pub bundle_cost: Rational,
}

/// `None` when the order starts with a ridge (the owner of `e_i` also owns
/// `e_{2n-i+1}` for every `i <= n`); otherwise a witness valuation.
pub fn nonridge_witness(order: &PickingOrder, n: usize) -> Result<Option<Witness>> {
    let m = order.len();
    if m < 2 * n {
        return Err(Error::InvalidArgument(format!(
            "order of length {m} is shorter than 2n = {}",
            2 * n
        )));
    }
    order.validate(n)?;
    let rounds = order.rounds();
    let count_in = |agent: usize, upto: usize| rounds[..upto].iter().filter(|&&a| a == agent).count();
    let witness = |case, agent: usize, costs: Vec<Rational>| {
        let bundle_cost = order.positions(agent).iter().map(|&p| &costs[p - 1]).sum();
        Some(Witness {
            case,
            agent: agent + 1,
            costs,
            bundle_cost,
        })
    };

    if let Some(agent) = (0..n).find(|&a| count_in(a, n) >= 2) {
        let mut costs = vec![Rational::zero(); m];
        costs[..n].fill(rat(1, 1));
        return Ok(witness(WitnessCase::TwoAmongFirstN, agent, costs));
    }
    if let Some(agent) = (0..n).find(|&a| count_in(a, 2 * n) >= 3) {
        let mut costs = vec![Rational::zero(); m];
        costs[..2 * n].fill(rat(1, 2));
        return Ok(witness(WitnessCase::ThreeAmongFirst2N, agent, costs));
    }
    for i in 1..=n {
        let agent = rounds[i - 1];
        let second = rounds[n..2 * n]
            .iter()
            .position(|&a| a == agent)
            .map(|k| n + k + 1)
            .expect("every agent owns two of the first 2n chores");
        if second < 2 * n - i + 1 {
            let mut costs = vec![Rational::zero(); m];
            costs[..i].fill(rat(1, 1));
            costs[i..2 * n - i].fill(rat(1, 2));
            return Ok(witness(WitnessCase::EarlySecondPick, agent, costs));
        }
    }
    Ok(None)
}
