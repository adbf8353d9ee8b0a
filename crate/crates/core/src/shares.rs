//! Proportional share, chore share, and exhaustive maximin / anyprice share
//! oracles for small instances.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{self, LpOutcome};
use crate::model::ChoreInstance;
use crate::rational::{self, Rational};

/// Size limits for the exhaustive oracles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_chores: usize,
    pub max_agents: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_chores: 12,
            max_agents: 4,
        }
    }
}

impl OracleLimits {
    pub fn unlimited() -> Self {
        Self {
            max_chores: 24,
            max_agents: usize::MAX,
        }
    }
}

fn sorted_desc(row: &[Rational]) -> Vec<Rational> {
    let mut v = row.to_vec();
    v.sort_by(|a, b| b.cmp(a));
    v
}

fn check_entitlement(b: &Rational) -> Result<()> {
    if !b.is_positive() || *b > Rational::one() {
        return Err(Error::InvalidArgument(format!(
            "entitlement {b} must lie in (0, 1]"
        )));
    }
    Ok(())
}

pub fn proportional_share(row: &[Rational], b: &Rational) -> Rational {
    b * rational::sum(row)
}

/// `max(b * total, c(e_1), c(e_k) + c(e_{k+1}))` with `k = floor(1/b)` on the
/// row sorted nonincreasing. Missing positions count as zero.
pub fn chore_share(row: &[Rational], b: &Rational) -> Result<Rational> {
    check_entitlement(b)?;
    let sorted = sorted_desc(row);
    let at = |pos: usize| sorted.get(pos - 1).cloned().unwrap_or_else(Rational::zero);
    let k = (Rational::one() / b).floor().to_integer();
    let k: usize = k.try_into().unwrap_or(usize::MAX);
    let pair = at(k) + at(k.saturating_add(1));
    let share = proportional_share(row, b);
    let top = sorted.first().cloned().unwrap_or_else(Rational::zero);
    Ok(rational::max_of([&share, &top, &pair]))
}

pub fn mms_oracle(row: &[Rational], n: usize) -> Result<Rational> {
    mms_oracle_with(row, n, OracleLimits::default())
}

/// Minimum over partitions into `n` bundles of the costliest bundle.
pub fn mms_oracle_with(row: &[Rational], n: usize, limits: OracleLimits) -> Result<Rational> {
    if n == 0 {
        return Err(Error::InvalidArgument("at least one bundle is required".into()));
    }
    if row.len() > limits.max_chores {
        return Err(Error::SizeGuard {
            what: "chore count",
            actual: row.len(),
            limit: limits.max_chores,
        });
    }
    if n > limits.max_agents {
        return Err(Error::SizeGuard {
            what: "agent count",
            actual: n,
            limit: limits.max_agents,
        });
    }
    let items = sorted_desc(row);
    if items.is_empty() {
        return Ok(Rational::zero());
    }
    let total = rational::sum(&items);
    let lower = rational::max_of([&items[0], &(&total / Rational::from_integer((n as i64).into()))]);

    // Largest-first greedy gives the starting bound.
    let mut loads = vec![Rational::zero(); n];
    for c in &items {
        let i = (0..n).min_by(|&a, &b| loads[a].cmp(&loads[b])).expect("n >= 1");
        loads[i] += c;
    }
    let mut best = rational::max_of(&loads);
    if best == lower {
        return Ok(best);
    }
    let mut loads = vec![Rational::zero(); n];
    mms_search(&items, 0, &mut loads, &mut best, &lower);
    Ok(best)
}

fn mms_search(items: &[Rational], next: usize, loads: &mut [Rational], best: &mut Rational, lower: &Rational) {
    if best == lower {
        return;
    }
    if next == items.len() {
        let worst = rational::max_of(&*loads);
        if worst < *best {
            *best = worst;
        }
        return;
    }
    let c = &items[next];
    for i in 0..loads.len() {
        if loads[..i].contains(&loads[i]) {
            continue;
        }
        let load = &loads[i] + c;
        if load >= *best {
            continue;
        }
        let saved = std::mem::replace(&mut loads[i], load);
        mms_search(items, next + 1, loads, best, lower);
        loads[i] = saved;
    }
}

/// A price vector witnessing a lower bound on the anyprice share: every
/// bundle cheaper than `value` costs less than the budget under `prices`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ApsCertificate {
    #[serde(serialize_with = "rational::ser")]
    pub value: Rational,
    #[serde(serialize_with = "rational::ser_vec")]
    pub prices: Vec<Rational>,
}

pub fn aps_oracle(row: &[Rational], b: &Rational) -> Result<Rational> {
    Ok(aps_certificate(row, b, OracleLimits::default())?.value)
}

pub fn aps_oracle_with(row: &[Rational], b: &Rational, limits: OracleLimits) -> Result<Rational> {
    Ok(aps_certificate(row, b, limits)?.value)
}

/// Exact anyprice share with its price certificate, by binary search over
/// the distinct bundle costs.
pub fn aps_certificate(row: &[Rational], b: &Rational, limits: OracleLimits) -> Result<ApsCertificate> {
    check_entitlement(b)?;
    let table = BundleTable::new(row, limits)?;
    let mut candidates = table.costs.clone();
    candidates.sort();
    candidates.dedup();

    // candidates[0] is the empty bundle's cost 0, which is always attainable.
    let mut lo = 0;
    let mut lo_prices = uniform_prices(row.len());
    let mut hi = candidates.len();
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        match table.prices_below(&candidates[mid], b) {
            Some(p) => {
                lo = mid;
                lo_prices = p;
            }
            None => hi = mid,
        }
    }
    Ok(ApsCertificate {
        value: candidates[lo].clone(),
        prices: lo_prices,
    })
}

/// True iff the anyprice share is at least `z`.
pub fn aps_at_least(row: &[Rational], b: &Rational, z: &Rational, limits: OracleLimits) -> Result<bool> {
    check_entitlement(b)?;
    let table = BundleTable::new(row, limits)?;
    Ok(table.prices_below(z, b).is_some())
}

fn uniform_prices(m: usize) -> Vec<Rational> {
    vec![Rational::new(1.into(), (m.max(1) as i64).into()); m]
}

/// Bundles up to relabeling of equal-cost chores. Chores of equal cost are
/// interchangeable, so averaging a price vector over their permutations
/// never raises its costliest cheap bundle; prices can be taken constant on
/// each cost class.
struct BundleTable {
    /// Distinct chore costs.
    values: Vec<Rational>,
    /// Chores per distinct cost.
    sizes: Vec<usize>,
    /// Cost class of each chore of the input row.
    class_of: Vec<usize>,
    /// Every count vector with its cost.
    bundles: Vec<(Vec<usize>, Rational)>,
    costs: Vec<Rational>,
}

impl BundleTable {
    fn new(row: &[Rational], limits: OracleLimits) -> Result<Self> {
        let m = row.len();
        if m > limits.max_chores {
            return Err(Error::SizeGuard {
                what: "chore count",
                actual: m,
                limit: limits.max_chores,
            });
        }
        let mut values = row.to_vec();
        values.sort();
        values.dedup();
        let class_of: Vec<usize> = row.iter().map(|c| values.binary_search(c).expect("cost is listed")).collect();
        let mut sizes = vec![0; values.len()];
        for &c in &class_of {
            sizes[c] += 1;
        }
        let mut bundles = vec![(Vec::new(), Rational::zero())];
        for (c, &size) in sizes.iter().enumerate() {
            let value = &values[c];
            bundles = bundles
                .into_iter()
                .flat_map(|(counts, cost): (Vec<usize>, Rational)| {
                    (0..=size).map(move |t| {
                        let mut counts = counts.clone();
                        counts.push(t);
                        (counts, &cost + value * Rational::from_integer((t as i64).into()))
                    })
                })
                .collect();
        }
        let costs = bundles.iter().map(|(_, c)| c.clone()).collect();
        Ok(Self {
            values,
            sizes,
            class_of,
            bundles,
            costs,
        })
    }

    /// Count vectors costing less than `z` that cannot take another chore.
    fn maximal_below(&self, z: &Rational) -> Vec<&[usize]> {
        self.bundles
            .iter()
            .filter(|(counts, cost)| {
                cost < z
                    && (0..self.values.len()).all(|c| counts[c] == self.sizes[c] || cost + &self.values[c] >= *z)
            })
            .map(|(counts, _)| &counts[..])
            .collect()
    }

    /// A unit-sum price vector under which every bundle cheaper than `z`
    /// costs less than `b`, if one exists.
    ///
    /// Solved through the LP `max w` s.t. `sum_T y_T <= 1` and
    /// `size_c w <= sum_T t_c y_T` for each cost class `c`; its optimum
    /// equals `min_p max_S p(S)` and the multipliers of the class rows are
    /// optimal per-chore prices.
    fn prices_below(&self, z: &Rational, b: &Rational) -> Option<Vec<Rational>> {
        let bundles = self.maximal_below(z);
        let m = self.class_of.len();
        if bundles.is_empty() {
            return Some(uniform_prices(m));
        }
        let classes = self.values.len();
        let vars = 1 + bundles.len();
        let mut a = Vec::with_capacity(classes + 1);
        let mut budget_row = vec![Rational::one(); vars];
        budget_row[0] = Rational::zero();
        a.push(budget_row);
        for c in 0..classes {
            let mut r = vec![Rational::zero(); vars];
            r[0] = Rational::from_integer((self.sizes[c] as i64).into());
            for (k, counts) in bundles.iter().enumerate() {
                r[k + 1] = -Rational::from_integer((counts[c] as i64).into());
            }
            a.push(r);
        }
        let mut c = vec![Rational::zero(); vars];
        c[0] = Rational::one();
        let mut rhs = vec![Rational::zero(); classes + 1];
        rhs[0] = Rational::one();
        let LpOutcome::Optimal(sol) = lp::maximize(&c, &a, &rhs) else {
            unreachable!("the bundle LP is bounded by its budget row");
        };
        if sol.value >= *b {
            return None;
        }
        let class_prices = &sol.dual[1..];
        let total: Rational = (0..classes)
            .map(|c| &class_prices[c] * Rational::from_integer((self.sizes[c] as i64).into()))
            .sum();
        assert!(total.is_positive(), "optimal prices cover the chores");
        for counts in &bundles {
            let price: Rational = (0..classes)
                .map(|c| &class_prices[c] * Rational::from_integer((counts[c] as i64).into()))
                .sum();
            assert!(price / &total < *b, "price certificate rejected for bundle {counts:?}");
        }
        Some(self.class_of.iter().map(|&c| &class_prices[c] / &total).collect())
    }
}

/// Per-agent shares of an instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AgentShares {
    pub agent: usize,
    #[serde(serialize_with = "rational::ser")]
    pub entitlement: Rational,
    #[serde(serialize_with = "rational::ser")]
    pub proportional: Rational,
    #[serde(serialize_with = "rational::ser")]
    pub chore_share: Rational,
    #[serde(serialize_with = "rational::ser_opt", skip_serializing_if = "Option::is_none")]
    pub mms: Option<Rational>,
    #[serde(serialize_with = "rational::ser_opt", skip_serializing_if = "Option::is_none")]
    pub aps: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShareReport {
    pub agents: Vec<AgentShares>,
}

/// Proportional and chore shares for every agent; the exhaustive oracles
/// run only when `oracles` is given. MMS is reported only for equal
/// entitlements.
pub fn share_report(inst: &ChoreInstance, oracles: Option<OracleLimits>) -> Result<ShareReport> {
    let n = inst.agents();
    let equal = inst.has_equal_entitlements();
    let mut agents = Vec::with_capacity(n);
    for i in 0..n {
        let row = inst.row(i);
        let b = inst.entitlement(i);
        let (mms, aps) = match oracles {
            Some(limits) => (
                if equal { Some(mms_oracle_with(row, n, limits)?) } else { None },
                Some(aps_oracle_with(row, b, limits)?),
            ),
            None => (None, None),
        };
        agents.push(AgentShares {
            agent: i + 1,
            entitlement: b.clone(),
            proportional: proportional_share(row, b),
            chore_share: chore_share(row, b)?,
            mms,
            aps,
        });
    }
    Ok(ShareReport { agents })
}
