//! Arbitrary entitlements: a fractional allocation built from the
//! entitlements alone, rounded to a picking order.
//!
//! Stages, with agents sorted by nondecreasing entitlement and
//! `B_i = b_1 + ... + b_i`:
//!
//! 1. proportional: agent `i` holds `b_i` of every chore;
//! 2. agent `i` receives `e_i` whole and gives up a total mass of one of her
//!    proportional fractions, starting from `e_1`;
//! 3. surplus mass on `e_1..e_n` moves to the later chores left short;
//! 4. for chores after `e_n`, agent `i`'s fractions are scaled by `s(B_i)`;
//! 5. surpluses are trimmed back to one.
//!
//! Rounding gives chore `e_t` to an agent whose fractional mass on
//! `e_1..e_t` exceeds the number of chores she already holds. Each agent
//! then pays at most `c(e_f) + sum_j a_j c(e_j)`, where `e_f` is the first
//! chore she holds a strict fraction of.

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ChoreInstance, PickingOrder};
use crate::rational::{self, rat, Rational};
use crate::shares;
use crate::simulate::{self, Normalization};

/// Scaling applied to an agent's fractions in stage 4, as a function of her
/// cumulative entitlement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Scaling {
    /// `(t-1)/(1-x)` for `x <= 1/t`, `t` above.
    Threshold { t: Rational },
    /// `intercept + x`.
    Affine { intercept: Rational },
}

impl Scaling {
    /// The threshold family at the smallest grid value of `t` (step 1e-6)
    /// whose integral is at least one.
    pub fn default_threshold() -> Self {
        Scaling::Threshold { t: default_t() }
    }

    /// `1/2 + x`.
    pub fn half_plus_x() -> Self {
        Scaling::Affine { intercept: rat(1, 2) }
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        match self {
            Scaling::Threshold { t } => {
                if *x <= t.recip() {
                    (t - Rational::one()) / (Rational::one() - x)
                } else {
                    t.clone()
                }
            }
            Scaling::Affine { intercept } => intercept + x,
        }
    }

    /// `s(1)`; the guarantee is `1 + s(1)/2`.
    pub fn at_one(&self) -> Rational {
        self.eval(&Rational::one())
    }

    pub fn guarantee(&self) -> Rational {
        Rational::one() + self.at_one() / rational::int(2)
    }

    /// Integral over `[0, 1]`.
    pub fn integral(&self) -> f64 {
        match self {
            Scaling::Threshold { t } => {
                let t = rational::to_f64(t);
                crate::roots::scaling_integral_excess(t) + 1.0
            }
            Scaling::Affine { intercept } => rational::to_f64(intercept) + 0.5,
        }
    }
}

/// `solve_t` rounded up to a multiple of 1e-6.
pub fn default_t() -> Rational {
    rational::round_up_to_grid(crate::roots::solve_t(), 1_000_000)
}

/// Fraction owner order when moving surplus mass in stage 3.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RoutePolicy {
    /// Fractions of the highest-index agents move first.
    #[default]
    HighestIndexFirst,
    /// Fractions of the lowest-index agents move first.
    LowestIndexFirst,
}

/// How stage 5 removes surpluses.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum TrimPolicy {
    /// Reduce the highest-index agents first.
    #[default]
    HighestIndexFirst,
    /// Reduce each agent (in sorted order) down to her cap first, then fall
    /// back to highest index first.
    Caps(Vec<Rational>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipelineOptions {
    pub scaling: Scaling,
    pub route: RoutePolicy,
    pub trim: TrimPolicy,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            scaling: Scaling::default_threshold(),
            route: RoutePolicy::default(),
            trim: TrimPolicy::default(),
        }
    }
}

/// Rows are agents in sorted order, columns are chores `e_1, e_2, ...`.
pub type Matrix = Vec<Vec<Rational>>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FractionalAllocation {
    /// Entitlements in sorted (nondecreasing) order.
    #[serde(serialize_with = "rational::ser_vec")]
    pub entitlements: Vec<Rational>,
    /// `agents[k]` is the original (0-based) agent at sorted position `k`.
    pub agents: Vec<usize>,
    #[serde(serialize_with = "rational::ser_matrix")]
    pub fractions: Matrix,
    /// Per sorted agent, the 1-based first chore held strictly fractionally.
    pub first_fractional: Vec<usize>,
    /// Whether a zero-cost chore was appended so every agent has one.
    pub sentinel: bool,
}

impl FractionalAllocation {
    pub fn agent_count(&self) -> usize {
        self.entitlements.len()
    }

    /// Chores covered, including the sentinel if present.
    pub fn chore_count(&self) -> usize {
        self.fractions.first().map_or(0, Vec::len)
    }

    /// Proportional allocation of `m` chores.
    pub fn proportional(b: &[Rational], m: usize) -> Result<Self> {
        let (sorted, agents) = sort_entitlements(b)?;
        let fractions = sorted.iter().map(|bi| vec![bi.clone(); m]).collect();
        Ok(finish(sorted, agents, fractions))
    }

    pub fn column_sum(&self, j: usize) -> Rational {
        self.fractions.iter().map(|r| &r[j]).sum()
    }
}

/// The pipeline's stages for inspection.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PipelineTrace {
    #[serde(serialize_with = "rational::ser_vec")]
    pub entitlements: Vec<Rational>,
    pub agents: Vec<usize>,
    #[serde(serialize_with = "rational::ser_vec")]
    pub cumulative: Vec<Rational>,
    #[serde(serialize_with = "rational::ser_vec")]
    pub scale_factors: Vec<Rational>,
    #[serde(serialize_with = "rational::ser_matrix")]
    pub proportional: Matrix,
    #[serde(serialize_with = "rational::ser_matrix")]
    pub ridge_and_give_up: Matrix,
    #[serde(serialize_with = "rational::ser_matrix")]
    pub rerouted: Matrix,
    #[serde(serialize_with = "rational::ser_matrix")]
    pub scaled: Matrix,
    pub result: FractionalAllocation,
}

fn sort_entitlements(b: &[Rational]) -> Result<(Vec<Rational>, Vec<usize>)> {
    if b.is_empty() {
        return Err(Error::InvalidArgument("at least one entitlement is required".into()));
    }
    for (i, x) in b.iter().enumerate() {
        if !x.is_positive() {
            return Err(Error::NonPositiveEntitlement {
                agent: i + 1,
                value: x.to_string(),
            });
        }
    }
    let total = rational::sum(b);
    if !total.is_one() {
        return Err(Error::EntitlementSum { sum: total.to_string() });
    }
    let mut agents: Vec<usize> = (0..b.len()).collect();
    agents.sort_by(|&x, &y| b[x].cmp(&b[y]));
    Ok((agents.iter().map(|&i| b[i].clone()).collect(), agents))
}

fn column_sum(m: &Matrix, j: usize) -> Rational {
    m.iter().map(|r| &r[j]).sum()
}

/// Appends the sentinel chore when needed and records first fractional
/// chores.
fn finish(entitlements: Vec<Rational>, agents: Vec<usize>, mut fractions: Matrix) -> FractionalAllocation {
    let strict = |x: &Rational| x.is_positive() && *x < Rational::one();
    let mut first: Vec<Option<usize>> = fractions
        .iter()
        .map(|row| row.iter().position(strict).map(|j| j + 1))
        .collect();
    let sentinel = first.iter().any(Option::is_none);
    if sentinel {
        let idx = fractions[0].len() + 1;
        for (row, b) in fractions.iter_mut().zip(&entitlements) {
            row.push(b.clone());
        }
        for f in &mut first {
            f.get_or_insert(idx);
        }
    }
    FractionalAllocation {
        entitlements,
        agents,
        fractions,
        first_fractional: first.into_iter().map(|f| f.expect("set above")).collect(),
        sentinel,
    }
}

/// Runs the five stages for entitlements `b`, covering at least `m` chores.
pub fn build_fractional(b: &[Rational], m: usize, opts: &PipelineOptions) -> Result<PipelineTrace> {
    let (sorted, agents) = sort_entitlements(b)?;
    let n = sorted.len();
    let longest = rational::ceil_u64(&sorted[0].recip())? as usize;
    let cols = m.max(n).max(longest) + 1;
    let zero = Rational::zero;

    let mut cumulative = Vec::with_capacity(n);
    let mut acc = Rational::zero();
    for bi in &sorted {
        acc += bi;
        cumulative.push(acc.clone());
    }

    // Stage 1.
    let proportional: Matrix = sorted.iter().map(|bi| vec![bi.clone(); cols]).collect();
    assert!((0..cols).all(|j| column_sum(&proportional, j).is_one()));

    // Stage 2: integral ridge part plus give-ups.
    let mut give_up = proportional.clone();
    for row in give_up.iter_mut() {
        let mut remaining = Rational::one();
        for x in row.iter_mut() {
            if !remaining.is_positive() {
                break;
            }
            let take = x.clone().min(remaining.clone());
            remaining -= &take;
            *x -= take;
        }
        assert!(remaining.is_zero(), "give-up mass exceeds the columns");
    }
    let mut stage2 = give_up.clone();
    for (i, row) in stage2.iter_mut().enumerate() {
        row[i] += Rational::one();
    }
    let surplus_total: Rational = (0..cols)
        .map(|j| column_sum(&stage2, j) - Rational::one())
        .filter(|x| x.is_positive())
        .sum();
    let mut deficits: Vec<Rational> = (0..cols)
        .map(|j| (Rational::one() - column_sum(&stage2, j)).max(zero()))
        .collect();
    assert_eq!(surplus_total, rational::sum(&deficits), "surplus and deficit totals differ");
    assert!(deficits[..n].iter().all(Zero::is_zero));

    // Stage 3: move the give-up leftovers on e_1..e_n to the short chores.
    let mut rerouted = stage2.clone();
    let owners: Vec<usize> = match opts.route {
        RoutePolicy::HighestIndexFirst => (0..n).rev().collect(),
        RoutePolicy::LowestIndexFirst => (0..n).collect(),
    };
    let mut target = n;
    for j in 0..n {
        for &i in &owners {
            let mut amount = give_up[i][j].clone();
            while amount.is_positive() {
                while target < cols && deficits[target].is_zero() {
                    target += 1;
                }
                assert!(target < cols, "surplus left without a deficit");
                let moved = amount.clone().min(deficits[target].clone());
                rerouted[i][j] -= &moved;
                rerouted[i][target] += &moved;
                deficits[target] -= &moved;
                amount -= moved;
            }
        }
    }
    assert!((0..cols).all(|j| column_sum(&rerouted, j).is_one()));
    for k in n..longest.min(cols) {
        let mut suffix_now = Rational::zero();
        let mut suffix_prop = Rational::zero();
        for (row, share) in rerouted.iter().zip(&sorted).rev() {
            suffix_now += &row[k];
            suffix_prop += share;
            assert!(suffix_now >= suffix_prop, "suffix domination fails at e_{}", k + 1);
        }
    }

    // Stage 4.
    let scale_factors: Vec<Rational> = cumulative.iter().map(|x| opts.scaling.eval(x)).collect();
    let mut scaled = rerouted.clone();
    for (row, s) in scaled.iter_mut().zip(&scale_factors) {
        for x in row.iter_mut().skip(n) {
            *x *= s;
        }
    }
    if let Some(j) = (n..cols).find(|&j| column_sum(&scaled, j) < Rational::one()) {
        return Err(Error::InvalidArgument(format!(
            "scaling leaves chore e_{} short; its integral must be at least one",
            j + 1
        )));
    }

    // Stage 5.
    let mut trimmed = scaled.clone();
    for j in n..cols {
        let mut excess = column_sum(&trimmed, j) - Rational::one();
        if let TrimPolicy::Caps(caps) = &opts.trim {
            if caps.len() != n {
                return Err(Error::InvalidArgument(format!("{} caps for {n} agents", caps.len())));
            }
            for i in (0..n).rev() {
                let over = (&trimmed[i][j] - &caps[i]).max(zero());
                let cut = over.min(excess.clone());
                trimmed[i][j] -= &cut;
                excess -= cut;
            }
        }
        for i in (0..n).rev() {
            let cut = trimmed[i][j].clone().min(excess.clone());
            trimmed[i][j] -= &cut;
            excess -= cut;
        }
        assert!(excess.is_zero());
    }
    assert!((0..cols).all(|j| column_sum(&trimmed, j).is_one()));

    let result = finish(sorted.clone(), agents.clone(), trimmed);
    for (k, &f) in result.first_fractional.iter().enumerate() {
        let floor_inv = rational::floor_u64(&sorted[k].recip())? as usize;
        assert!(f > n.max(floor_inv), "first fractional chore of agent {} is e_{f}", k + 1);
    }
    Ok(PipelineTrace {
        entitlements: sorted,
        agents,
        cumulative,
        scale_factors,
        proportional,
        ridge_and_give_up: stage2,
        rerouted,
        scaled,
        result,
    })
}

/// Rounds the first `m` chores. Among eligible agents the one with the
/// highest entitlement wins, then the highest index. Returned in original
/// agent labels.
pub fn round_to_order(alloc: &FractionalAllocation, m: usize) -> Result<PickingOrder> {
    let available = alloc.chore_count() - usize::from(alloc.sentinel);
    if m > available {
        return Err(Error::InvalidArgument(format!(
            "fractional allocation covers {available} chores, {m} requested"
        )));
    }
    let n = alloc.agent_count();
    let mut mass = vec![Rational::zero(); n];
    let mut held = vec![0i64; n];
    let mut rounds = Vec::with_capacity(m);
    for t in 0..m {
        for (k, row) in alloc.fractions.iter().enumerate() {
            mass[k] += &row[t];
        }
        let k = (0..n)
            .rev()
            .find(|&k| mass[k] > rational::int(held[k]))
            .expect("an eligible agent exists for a legal allocation");
        held[k] += 1;
        rounds.push(alloc.agents[k]);
    }
    Ok(PickingOrder(rounds))
}

/// Entitlements to order: the default pipeline followed by rounding.
pub fn build_order(b: &[Rational], m: usize, opts: &PipelineOptions) -> Result<(PipelineTrace, PickingOrder)> {
    let trace = build_fractional(b, m, opts)?;
    let order = round_to_order(&trace.result, m)?;
    Ok((trace, order))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GuaranteeReport {
    #[serde(serialize_with = "rational::ser")]
    pub bound: Rational,
    /// Largest bundle-to-chore-share ratio over the random trials.
    #[serde(serialize_with = "rational::ser")]
    pub max_observed: Rational,
    /// Largest worst-case ratio over valuations for each agent's positions.
    #[serde(serialize_with = "rational::ser")]
    pub max_adversarial: Rational,
    #[serde(serialize_with = "rational::ser_vec")]
    pub adversarial_per_agent: Vec<Rational>,
    pub trials: usize,
    pub max_chores: usize,
    pub order: String,
}

impl GuaranteeReport {
    pub fn holds(&self) -> bool {
        self.max_observed <= self.bound && self.max_adversarial <= self.bound
    }

    pub fn max_ratio(&self) -> &Rational {
        (&self.max_observed).max(&self.max_adversarial)
    }
}

/// Builds the order for `b` once for `max_chores` rounds, then plays it
/// greedily on random nonincreasing cost rows (costs in thousandths) with a
/// random chore count, and evaluates each agent's worst case exactly.
pub fn verify_guarantee(b: &[Rational], trials: usize, seed: u64, max_chores: usize) -> Result<GuaranteeReport> {
    let opts = PipelineOptions::default();
    let (_, order) = build_order(b, max_chores, &opts)?;
    let n = b.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_observed = Rational::zero();
    for _ in 0..trials {
        let m = rng.random_range(1..=max_chores);
        let costs: Vec<Vec<Rational>> = (0..n)
            .map(|_| {
                let mut row: Vec<i64> = (0..m).map(|_| rng.random_range(0..=1000)).collect();
                row.sort_unstable_by(|x, y| y.cmp(x));
                row.into_iter().map(|c| rat(c, 1000)).collect()
            })
            .collect();
        let inst = ChoreInstance::new(b.to_vec(), costs)?;
        let prefix = PickingOrder(order.rounds()[..m].to_vec());
        let alloc = simulate::greedy_play(&prefix.to_sequence(), &inst)?;
        for (i, share) in b.iter().enumerate() {
            let cs = shares::chore_share(inst.row(i), share)?;
            if cs.is_zero() {
                continue;
            }
            let ratio = inst.bundle_cost(i, &alloc.bundles[i]) / cs;
            max_observed = max_observed.max(ratio);
        }
    }
    let adversarial_per_agent = (0..n)
        .map(|i| {
            let norm = Normalization::entitlement(&b[i]);
            simulate::worst_case(&order.positions(i), max_chores, &norm).map(|w| w.ratio)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GuaranteeReport {
        bound: opts.scaling.guarantee(),
        max_observed,
        max_adversarial: rational::max_of(&adversarial_per_agent),
        adversarial_per_agent,
        trials,
        max_chores,
        order: order.to_string(),
    })
}
