//! Envy between pickers of a picking sequence, and preliminary stages that
//! assign the sequence's labels to agents.
//!
//! Agents are risk averse: an agent values a label by the guaranteed
//! disvalue of its picking rounds.

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ChoreInstance, PickingSequence};
use crate::rational::{self, rat, Rational};
use crate::shares::{self, OracleLimits};
use crate::simulate::guaranteed_disvalue;

/// Largest agent count for which audits enumerate every stage outcome.
pub const AUDIT_MAX_AGENTS: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuffixCheck {
    pub holds: bool,
    /// Length of the shortest suffix in which `i` picks more often than `j`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suffix_len: Option<usize>,
    /// Nonincreasing costs under which `i` envies `j`: cost 1 on the chores
    /// picked during the violating suffix, 0 elsewhere.
    #[serde(serialize_with = "rational::ser_opt_vec", skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<Rational>>,
    #[serde(serialize_with = "rational::ser_opt", skip_serializing_if = "Option::is_none")]
    pub guarantee_i: Option<Rational>,
    #[serde(serialize_with = "rational::ser_opt", skip_serializing_if = "Option::is_none")]
    pub guarantee_j: Option<Rational>,
}

/// Checks that in every suffix of `seq`, picker `j` picks at least as often
/// as picker `i` (0-based pickers).
pub fn suffix_envy_condition(seq: &PickingSequence, i: usize, j: usize) -> Result<SuffixCheck> {
    if i == j {
        return Err(Error::InvalidArgument(format!("pickers must differ, got {} twice", i + 1)));
    }
    let m = seq.len();
    let mut balance: i64 = 0;
    for (len, &p) in seq.picks().iter().rev().enumerate() {
        if p == i {
            balance += 1;
        } else if p == j {
            balance -= 1;
        }
        if balance > 0 {
            let len = len + 1;
            let witness: Vec<Rational> = (0..m).map(|r| if r < len { Rational::one() } else { Rational::zero() }).collect();
            let gi = guaranteed_disvalue(&witness, &seq.rounds_of(i));
            let gj = guaranteed_disvalue(&witness, &seq.rounds_of(j));
            return Ok(SuffixCheck {
                holds: false,
                suffix_len: Some(len),
                witness: Some(witness),
                guarantee_i: Some(gi),
                guarantee_j: Some(gj),
            });
        }
    }
    Ok(SuffixCheck {
        holds: true,
        suffix_len: None,
        witness: None,
        guarantee_i: None,
        guarantee_j: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StageMode {
    /// Uniformly random bijection from agents to labels.
    RandomBijection,
    /// Uniformly random agent order; each agent takes her best remaining label.
    LabelPick,
    /// Agents ordered by ascending responsibility, ties shuffled; each takes
    /// her best remaining label.
    Prsd,
}

impl std::str::FromStr for StageMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random_bijection" | "random-bijection" => Ok(StageMode::RandomBijection),
            "label_pick" | "label-pick" => Ok(StageMode::LabelPick),
            "prsd" => Ok(StageMode::Prsd),
            _ => Err(Error::InvalidArgument(format!(
                "unknown stage mode {s:?}, expected random_bijection, label_pick or prsd"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StageOutcome {
    /// Agents in the order they chose (0-based); empty for a random bijection.
    pub order: Vec<usize>,
    /// Label (0-based picker of the sequence) of each agent.
    pub labels: Vec<usize>,
}

/// Guaranteed disvalue of every label for every agent.
pub fn label_guarantees(seq: &PickingSequence, rows: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>> {
    let n = rows.len();
    seq.validate(n)?;
    if let Some(row) = rows.iter().find(|r| r.len() != seq.len()) {
        return Err(Error::InvalidArgument(format!(
            "cost row has {} chores, sequence has {} rounds",
            row.len(),
            seq.len()
        )));
    }
    let rounds: Vec<Vec<usize>> = (0..n).map(|l| seq.rounds_of(l)).collect();
    Ok(rows
        .iter()
        .map(|row| rounds.iter().map(|r| guaranteed_disvalue(row, r)).collect())
        .collect())
}

/// Agents choose in `order`, each taking the remaining label of least
/// guaranteed disvalue, lowest label on ties.
pub fn pick_labels(guarantees: &[Vec<Rational>], order: &[usize]) -> Vec<usize> {
    let n = guarantees.len();
    let mut free = vec![true; n];
    let mut labels = vec![usize::MAX; n];
    for &a in order {
        let best = (0..n)
            .filter(|&l| free[l])
            .min_by(|&x, &y| guarantees[a][x].cmp(&guarantees[a][y]).then(x.cmp(&y)))
            .expect("a label remains for every agent");
        free[best] = false;
        labels[a] = best;
    }
    labels
}

fn check_responsibilities(b: &[Rational], n: usize) -> Result<()> {
    if b.len() != n {
        return Err(Error::InvalidArgument(format!("{} responsibilities for {n} agents", b.len())));
    }
    Ok(())
}

/// Agents sorted by ascending responsibility, stable within ties.
fn ascending(b: &[Rational], mut agents: Vec<usize>) -> Vec<usize> {
    agents.sort_by(|&x, &y| b[x].cmp(&b[y]));
    agents
}

/// Runs one preliminary stage with the given seed.
pub fn preliminary_stage(
    mode: StageMode,
    seq: &PickingSequence,
    rows: &[Vec<Rational>],
    b: &[Rational],
    seed: u64,
) -> Result<StageOutcome> {
    let n = rows.len();
    check_responsibilities(b, n)?;
    let guarantees = label_guarantees(seq, rows)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agents: Vec<usize> = (0..n).collect();
    agents.shuffle(&mut rng);
    match mode {
        StageMode::RandomBijection => Ok(StageOutcome {
            order: Vec::new(),
            labels: agents,
        }),
        StageMode::LabelPick => Ok(StageOutcome {
            labels: pick_labels(&guarantees, &agents),
            order: agents,
        }),
        StageMode::Prsd => {
            let order = ascending(b, agents);
            Ok(StageOutcome {
                labels: pick_labels(&guarantees, &order),
                order,
            })
        }
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (k, &first) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(k);
        for mut tail in permutations(&rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

/// Every agent order a stage can draw, each equally likely.
fn stage_orders(mode: StageMode, b: &[Rational]) -> Vec<Vec<usize>> {
    let n = b.len();
    let all: Vec<usize> = (0..n).collect();
    match mode {
        StageMode::RandomBijection | StageMode::LabelPick => permutations(&all),
        StageMode::Prsd => {
            let sorted = ascending(b, all);
            let mut orders = vec![Vec::new()];
            let mut start = 0;
            while start < n {
                let end = (start..n).find(|&k| b[sorted[k]] != b[sorted[start]]).unwrap_or(n);
                let blocks = permutations(&sorted[start..end]);
                orders = orders
                    .iter()
                    .flat_map(|prefix| {
                        blocks.iter().map(move |blk| {
                            let mut o = prefix.clone();
                            o.extend_from_slice(blk);
                            o
                        })
                    })
                    .collect();
                start = end;
            }
            orders
        }
    }
}

fn stage_labels(mode: StageMode, guarantees: &[Vec<Rational>], order: &[usize]) -> Vec<usize> {
    match mode {
        StageMode::RandomBijection => order.to_vec(),
        _ => pick_labels(guarantees, order),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AgentAudit {
    pub agent: usize,
    #[serde(serialize_with = "rational::ser_vec")]
    pub label_guarantees: Vec<Rational>,
    #[serde(serialize_with = "rational::ser")]
    pub label_mean: Rational,
    #[serde(serialize_with = "rational::ser")]
    pub proportional_share: Rational,
    pub mean_equals_share: bool,
    /// Probability of receiving each label.
    #[serde(serialize_with = "rational::ser_vec")]
    pub label_distribution: Vec<Rational>,
    /// For every `j`, one of the agent's `j` preferred labels arrives with
    /// probability at least `j/n`.
    pub dominates_uniform: bool,
    #[serde(serialize_with = "rational::ser")]
    pub expected_guarantee: Rational,
    /// Largest guaranteed disvalue over all stage outcomes.
    #[serde(serialize_with = "rational::ser")]
    pub worst_guarantee: Rational,
}

/// Ex-ante comparison of `agent` with an agent of at least her
/// responsibility: her expected guarantee against what she would expect
/// after trading places with `other` in the stage.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EnvyCheck {
    pub agent: usize,
    pub other: usize,
    #[serde(serialize_with = "rational::ser")]
    pub own: Rational,
    #[serde(serialize_with = "rational::ser")]
    pub in_place_of_other: Rational,
    /// Her expected guarantee for the label `other` receives.
    #[serde(serialize_with = "rational::ser")]
    pub other_label: Rational,
    pub envies: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub mode: StageMode,
    pub outcomes: usize,
    pub agents: Vec<AgentAudit>,
    pub envy: Vec<EnvyCheck>,
    pub holds: bool,
}

/// Enumerates every outcome of the preliminary stage and audits it:
/// label means against proportional shares, stochastic dominance of the
/// received label over a uniform one, and ex-ante envy towards agents of
/// weakly higher responsibility.
pub fn ef_ra_audit(seq: &PickingSequence, mode: StageMode, rows: &[Vec<Rational>], b: &[Rational]) -> Result<AuditReport> {
    let n = rows.len();
    if n > AUDIT_MAX_AGENTS {
        return Err(Error::SizeGuard {
            what: "agent count for stage enumeration",
            actual: n,
            limit: AUDIT_MAX_AGENTS,
        });
    }
    check_responsibilities(b, n)?;
    let guarantees = label_guarantees(seq, rows)?;
    let orders = stage_orders(mode, b);
    let outcomes: Vec<Vec<usize>> = orders.iter().map(|o| stage_labels(mode, &guarantees, o)).collect();
    let weight = rat(1, outcomes.len() as i64);
    let nn = rational::int(n as i64);
    let equal = b.iter().all(|x| *x == b[0]);

    let mut agents = Vec::with_capacity(n);
    let mut holds = true;
    for a in 0..n {
        let g = &guarantees[a];
        let total: Rational = rows[a].iter().sum();
        let label_mean = rational::sum(g) / &nn;
        let proportional_share = shares::proportional_share(&rows[a], &b[a]);
        let mean_equals_share = label_mean == proportional_share;
        let mut dist = vec![Rational::zero(); n];
        for labels in &outcomes {
            dist[labels[a]] += &weight;
        }
        let mut preference: Vec<usize> = (0..n).collect();
        preference.sort_by(|&x, &y| g[x].cmp(&g[y]).then(x.cmp(&y)));
        let mut cumulative = Rational::zero();
        let mut dominates_uniform = true;
        for (j, &l) in preference.iter().enumerate() {
            cumulative += &dist[l];
            dominates_uniform &= cumulative >= rat(j as i64 + 1, n as i64);
        }
        let expected_guarantee: Rational = (0..n).map(|l| &dist[l] * &g[l]).sum();
        let worst_guarantee = rational::max_of(outcomes.iter().map(|labels| &g[labels[a]]));
        debug_assert_eq!(rational::sum(g), total);
        if equal {
            holds &= mean_equals_share;
        }
        if mode != StageMode::Prsd {
            holds &= dominates_uniform && expected_guarantee <= proportional_share;
        }
        agents.push(AgentAudit {
            agent: a + 1,
            label_guarantees: g.clone(),
            label_mean,
            proportional_share,
            mean_equals_share,
            label_distribution: dist,
            dominates_uniform,
            expected_guarantee,
            worst_guarantee,
        });
    }

    let mut envy = Vec::new();
    for p in 0..n {
        for q in (0..n).filter(|&q| q != p && b[q] >= b[p]) {
            let mut in_place = Rational::zero();
            let mut other_label = Rational::zero();
            let mut swapped = guarantees.clone();
            swapped.swap(p, q);
            for (order, labels) in orders.iter().zip(&outcomes) {
                // Agent p's preferences now act from q's slot.
                let relabeled = stage_labels(mode, &swapped, order);
                in_place += &weight * &guarantees[p][relabeled[q]];
                other_label += &weight * &guarantees[p][labels[q]];
            }
            let own = agents[p].expected_guarantee.clone();
            let envies = own > in_place;
            holds &= !envies;
            envy.push(EnvyCheck {
                agent: p + 1,
                other: q + 1,
                own,
                in_place_of_other: in_place,
                other_label,
                envies,
            });
        }
    }
    Ok(AuditReport {
        mode,
        outcomes: outcomes.len(),
        agents,
        envy,
        holds,
    })
}

/// `n+1` chores: `n-1` of cost 3 for everyone, then two chores of cost 2
/// for agents `1..n-1` and cost 1 for agent `n`. Label 1 picks twice, every
/// other label once. Under label picking every agent ends strictly below
/// her proportional share.
pub fn label_pick_example(n: usize) -> Result<(ChoreInstance, PickingSequence)> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("the label example needs n >= 2, got {n}")));
    }
    let rows = (0..n)
        .map(|a| {
            let tail = if a + 1 == n { 1 } else { 2 };
            let mut row = vec![rational::int(3); n - 1];
            row.extend([rational::int(tail), rational::int(tail)]);
            row
        })
        .collect();
    let inst = ChoreInstance::equal_entitlements(rows)?;
    let mut seq = vec![0, 0];
    seq.extend(1..n);
    Ok((inst, PickingSequence(seq)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TensionExample {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    #[serde(serialize_with = "rational::ser_vec")]
    pub entitlements: Vec<Rational>,
    /// Costs of agent 1: `k` for the first chore, 1 for the others.
    #[serde(serialize_with = "rational::ser_vec")]
    pub valuation: Vec<Rational>,
    /// `k + 2`, an upper bound on agent 1's anyprice share.
    #[serde(serialize_with = "rational::ser")]
    pub aps_upper: Rational,
    /// Whether the exact oracle confirmed the bound (None when too large).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aps_confirmed: Option<bool>,
    /// `2k / (k+2) = 2 - 4/n`.
    #[serde(serialize_with = "rational::ser")]
    pub ratio_bound: Rational,
}

impl TensionExample {
    /// Every agent holds agent 1's costs.
    pub fn instance(&self) -> Result<ChoreInstance> {
        ChoreInstance::new(self.entitlements.clone(), vec![self.valuation.clone(); self.n])
    }
}

/// Responsibilities `((k+1)/m, k/m, ..., k/m)` with `k = n-2` and
/// `m = kn + 1`, where no sequence both avoids envy towards agent 1 and
/// keeps her below `2 - 4/n` times her anyprice share.
pub fn envy_tension_example(n: usize) -> Result<TensionExample> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!("the tension example needs n >= 4, got {n}")));
    }
    let k = n - 2;
    let m = k * n + 1;
    let mut entitlements = vec![rat(k as i64 + 1, m as i64)];
    entitlements.extend(std::iter::repeat_n(rat(k as i64, m as i64), n - 1));
    let mut valuation = vec![rational::int(k as i64)];
    valuation.extend(std::iter::repeat_n(Rational::one(), m - 1));
    let aps_upper = rational::int(k as i64 + 2);
    let limits = OracleLimits::unlimited();
    // Costs are integers, so the anyprice share is an integer.
    let aps_confirmed = (m <= limits.max_chores)
        .then(|| {
            shares::aps_at_least(&valuation, &entitlements[0], &(&aps_upper + Rational::one()), limits).map(|above| !above)
        })
        .transpose()?;
    Ok(TensionExample {
        n,
        k,
        m,
        entitlements,
        valuation,
        ratio_bound: rat(2 * k as i64, k as i64 + 2),
        aps_upper,
        aps_confirmed,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TensionAnalysis {
    /// No other agent can envy agent 1 under the suffix condition.
    pub envy_free_towards_first: bool,
    #[serde(serialize_with = "rational::ser")]
    pub first_guarantee: Rational,
    /// Agent 1's guarantee over `k + 2`.
    #[serde(serialize_with = "rational::ser")]
    pub ratio_to_aps_bound: Rational,
}

pub fn tension_analysis(example: &TensionExample, seq: &PickingSequence) -> Result<TensionAnalysis> {
    if seq.len() != example.m {
        return Err(Error::InvalidArgument(format!(
            "sequence has {} rounds, the example has {} chores",
            seq.len(),
            example.m
        )));
    }
    seq.validate(example.n)?;
    let mut free = true;
    for other in 1..example.n {
        free &= suffix_envy_condition(seq, other, 0)?.holds;
    }
    let first_guarantee = guaranteed_disvalue(&example.valuation, &seq.rounds_of(0));
    Ok(TensionAnalysis {
        envy_free_towards_first: free,
        ratio_to_aps_bound: &first_guarantee / &example.aps_upper,
        first_guarantee,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn seq(text: &str) -> PickingSequence {
        PickingSequence::parse(text).unwrap()
    }

    #[test]
    fn suffix_examples() {
        assert!(suffix_envy_condition(&seq("1212"), 0, 1).unwrap().holds);
        let c = suffix_envy_condition(&seq("112"), 0, 1).unwrap();
        assert!(!c.holds);
        assert_eq!(c.suffix_len, Some(3));
        assert_eq!(c.witness, Some(vec![int(1); 3]));
        assert_eq!((c.guarantee_i, c.guarantee_j), (Some(int(2)), Some(int(1))));
        assert!(suffix_envy_condition(&seq("12"), 1, 1).is_err());
    }

    #[test]
    fn label_pick_small_example() {
        let rows = vec![vec![int(6), int(4), int(4)], vec![int(6), int(2), int(2)]];
        let b = vec![rat(1, 2), rat(1, 2)];
        let g = label_guarantees(&seq("112"), &rows).unwrap();
        for order in [[0, 1], [1, 0]] {
            let labels = pick_labels(&g, &order);
            assert_eq!(labels, vec![1, 0]);
            assert_eq!((&g[0][labels[0]], &g[1][labels[1]]), (&int(6), &int(4)));
        }
        for seed in 0..5 {
            let out = preliminary_stage(StageMode::LabelPick, &seq("112"), &rows, &b, seed).unwrap();
            assert_eq!(out.labels, vec![1, 0]);
        }
    }

    #[test]
    fn prsd_order_is_ascending() {
        let rows = vec![vec![int(1); 3]; 3];
        let b = vec![rat(1, 5), rat(3, 10), rat(1, 2)];
        for seed in 0..5 {
            let out = preliminary_stage(StageMode::Prsd, &seq("123"), &rows, &b, seed).unwrap();
            assert_eq!(out.order, vec![0, 1, 2]);
        }
    }

    #[test]
    fn random_bijection_is_reproducible() {
        let rows = vec![vec![int(1), int(2)]; 2];
        let b = vec![rat(1, 2), rat(1, 2)];
        let a = preliminary_stage(StageMode::RandomBijection, &seq("12"), &rows, &b, 7).unwrap();
        let c = preliminary_stage(StageMode::RandomBijection, &seq("12"), &rows, &b, 7).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn label_example_below_share_ex_post() {
        for n in 2..=5 {
            let (inst, s) = label_pick_example(n).unwrap();
            let b = inst.entitlements().to_vec();
            let report = ef_ra_audit(&s, StageMode::LabelPick, inst.costs(), &b).unwrap();
            assert!(report.holds, "{report:?}");
            for a in &report.agents {
                assert!(a.worst_guarantee < a.proportional_share, "n={n} {a:?}");
            }
        }
    }

    #[test]
    fn prsd_audit_unequal() {
        let rows = vec![vec![int(5), int(3), int(2), int(2), int(1)]; 3];
        let b = vec![rat(1, 5), rat(2, 5), rat(2, 5)];
        let report = ef_ra_audit(&seq("12332"), StageMode::Prsd, &rows, &b).unwrap();
        assert_eq!(report.outcomes, 2);
        assert!(report.envy.iter().all(|e| !e.envies), "{report:?}");
    }

    #[test]
    fn tension_n4() {
        let ex = envy_tension_example(4).unwrap();
        assert_eq!((ex.k, ex.m), (2, 9));
        assert_eq!(ex.entitlements, vec![rat(3, 9), rat(2, 9), rat(2, 9), rat(2, 9)]);
        assert_eq!(ex.valuation[0], int(2));
        assert!(ex.valuation[1..].iter().all(|c| *c == int(1)));
        assert_eq!(ex.aps_confirmed, Some(true));
        assert_eq!(ex.ratio_bound, int(1));
        assert!(envy_tension_example(3).is_err());
    }

    #[test]
    fn tension_analysis_suffix_free_sequence() {
        let ex = envy_tension_example(4).unwrap();
        // Agent 1 picks last and twice before.
        let s = seq("123412341");
        let a = tension_analysis(&ex, &s).unwrap();
        assert!(a.envy_free_towards_first);
        assert_eq!(a.first_guarantee, int(4));
    }
}
