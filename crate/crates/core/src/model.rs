//! Instances, picking orders and sequences, allocations, and the instance
//! file format.
//!
//! Agents and chores are 0-based internally. Textual orders such as `1221`
//! use 1-based digits (or letters `a..` for lettered agents).

use std::fmt;
use std::path::Path;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// `n` agents with exact entitlements and additive costs over `m` chores.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChoreInstance {
    entitlements: Vec<Rational>,
    costs: Vec<Vec<Rational>>,
}

impl ChoreInstance {
    /// Validates entitlements (positive, summing to one) and costs
    /// (nonnegative, one row of equal length per agent).
    pub fn new(entitlements: Vec<Rational>, costs: Vec<Vec<Rational>>) -> Result<Self> {
        if entitlements.is_empty() {
            return Err(Error::Schema("at least one agent is required".into()));
        }
        if costs.len() != entitlements.len() {
            return Err(Error::Schema(format!(
                "{} cost rows for {} agents",
                costs.len(),
                entitlements.len()
            )));
        }
        let m = costs[0].len();
        if let Some(i) = costs.iter().position(|row| row.len() != m) {
            return Err(Error::Schema(format!(
                "cost row {} has {} entries, expected {m}",
                i + 1,
                costs[i].len()
            )));
        }
        for (i, b) in entitlements.iter().enumerate() {
            if !b.is_positive() {
                return Err(Error::NonPositiveEntitlement {
                    agent: i + 1,
                    value: b.to_string(),
                });
            }
        }
        let total = rational::sum(&entitlements);
        if !total.is_one() {
            return Err(Error::EntitlementSum {
                sum: total.to_string(),
            });
        }
        for (i, row) in costs.iter().enumerate() {
            if let Some(j) = row.iter().position(|c| c.is_negative()) {
                return Err(Error::NegativeCost {
                    agent: i + 1,
                    chore: j + 1,
                    value: row[j].to_string(),
                });
            }
        }
        Ok(Self { entitlements, costs })
    }

    /// All agents share one cost row and have entitlement `1/n`.
    pub fn identical(n: usize, row: Vec<Rational>) -> Result<Self> {
        let b = Rational::new(1.into(), (n as i64).into());
        Self::new(vec![b; n], vec![row; n])
    }

    /// Equal entitlements with per-agent rows.
    pub fn equal_entitlements(costs: Vec<Vec<Rational>>) -> Result<Self> {
        let n = costs.len().max(1) as i64;
        let b = Rational::new(1.into(), n.into());
        Self::new(vec![b; costs.len()], costs)
    }

    pub fn agents(&self) -> usize {
        self.entitlements.len()
    }

    pub fn chores(&self) -> usize {
        self.costs[0].len()
    }

    pub fn entitlements(&self) -> &[Rational] {
        &self.entitlements
    }

    pub fn entitlement(&self, agent: usize) -> &Rational {
        &self.entitlements[agent]
    }

    pub fn costs(&self) -> &[Vec<Rational>] {
        &self.costs
    }

    pub fn row(&self, agent: usize) -> &[Rational] {
        &self.costs[agent]
    }

    pub fn cost(&self, agent: usize, chore: usize) -> &Rational {
        &self.costs[agent][chore]
    }

    pub fn bundle_cost(&self, agent: usize, bundle: &[usize]) -> Rational {
        bundle
            .iter()
            .fold(Rational::zero(), |acc, &j| acc + &self.costs[agent][j])
    }

    /// True iff every row is nonincreasing in chore index.
    pub fn is_ido(&self) -> bool {
        self.costs
            .iter()
            .all(|row| row.windows(2).all(|w| w[0] >= w[1]))
    }

    pub fn has_equal_entitlements(&self) -> bool {
        self.entitlements.windows(2).all(|w| w[0] == w[1])
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile =
            serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        file.into_instance()
    }

    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            agents: self.agents(),
            chores: self.chores(),
            entitlements: self
                .entitlements
                .iter()
                .map(|b| RationalField::Text(b.to_string()))
                .collect(),
            costs: self
                .costs
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|c| RationalField::Text(c.to_string()))
                        .collect()
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("instance serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    agents: usize,
    chores: usize,
    entitlements: Vec<RationalField>,
    costs: Vec<Vec<RationalField>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RationalField {
    Text(String),
    Integer(i64),
}

impl RationalField {
    fn value(&self) -> Result<Rational> {
        match self {
            RationalField::Text(s) => rational::parse(s),
            RationalField::Integer(v) => Ok(rational::int(*v)),
        }
    }
}

impl InstanceFile {
    fn into_instance(self) -> Result<ChoreInstance> {
        if self.entitlements.len() != self.agents {
            return Err(Error::Schema(format!(
                "\"agents\" is {} but {} entitlements are listed",
                self.agents,
                self.entitlements.len()
            )));
        }
        if self.costs.len() != self.agents {
            return Err(Error::Schema(format!(
                "\"agents\" is {} but {} cost rows are listed",
                self.agents,
                self.costs.len()
            )));
        }
        if let Some(i) = self.costs.iter().position(|r| r.len() != self.chores) {
            return Err(Error::Schema(format!(
                "\"chores\" is {} but cost row {} has {} entries",
                self.chores,
                i + 1,
                self.costs[i].len()
            )));
        }
        let entitlements = self
            .entitlements
            .iter()
            .map(RationalField::value)
            .collect::<Result<Vec<_>>>()?;
        let costs = self
            .costs
            .iter()
            .map(|row| row.iter().map(RationalField::value).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        if self.chores == 0 {
            let n = entitlements.len();
            return ChoreInstance::new(entitlements, vec![Vec::new(); n]);
        }
        ChoreInstance::new(entitlements, costs)
    }
}

/// Surrogate IDO instance plus, per agent, the original chore behind each
/// surrogate position.
#[derive(Clone, Debug)]
pub struct IdoReduction {
    pub instance: ChoreInstance,
    /// `permutations[i][r]` is the original chore that agent `i` ranks `r`-th.
    pub permutations: Vec<Vec<usize>>,
    /// Common reference ordering used to break ties.
    pub reference: Vec<usize>,
}

/// Sorts every agent's row into a nonincreasing surrogate. Ties are broken
/// by a shared reference ordering: total cost across agents descending, then
/// original index.
pub fn to_ido(inst: &ChoreInstance) -> IdoReduction {
    let m = inst.chores();
    let totals: Vec<Rational> = (0..m)
        .map(|j| (0..inst.agents()).fold(Rational::zero(), |acc, i| acc + inst.cost(i, j)))
        .collect();
    let mut reference: Vec<usize> = (0..m).collect();
    reference.sort_by(|&a, &b| totals[b].cmp(&totals[a]).then(a.cmp(&b)));
    let mut rank = vec![0; m];
    for (r, &j) in reference.iter().enumerate() {
        rank[j] = r;
    }

    let mut permutations = Vec::with_capacity(inst.agents());
    let mut rows = Vec::with_capacity(inst.agents());
    for i in 0..inst.agents() {
        let row = inst.row(i);
        let mut perm: Vec<usize> = (0..m).collect();
        perm.sort_by(|&a, &b| row[b].cmp(&row[a]).then(rank[a].cmp(&rank[b])));
        rows.push(perm.iter().map(|&j| row[j].clone()).collect());
        permutations.push(perm);
    }
    let instance = ChoreInstance::new(inst.entitlements().to_vec(), rows)
        .expect("sorting rows preserves validity");
    IdoReduction {
        instance,
        permutations,
        reference,
    }
}

/// Allocation-order view: round `r` assigns the `r`-th costliest chore.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PickingOrder(pub Vec<usize>);

/// Picking-round view: the picker of round `r` takes her cheapest remaining
/// chore.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PickingSequence(pub Vec<usize>);

impl PickingOrder {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn rounds(&self) -> &[usize] {
        &self.0
    }

    /// 1-based allocation rounds of `agent`.
    pub fn positions(&self, agent: usize) -> Vec<usize> {
        positions_of(&self.0, agent)
    }

    pub fn validate(&self, agents: usize) -> Result<()> {
        validate_ids(&self.0, agents)
    }

    pub fn to_sequence(&self) -> PickingSequence {
        PickingSequence(self.0.iter().rev().copied().collect())
    }

    /// Agents owning the chores at each position.
    pub fn to_allocation(&self, agents: usize) -> Allocation {
        let mut bundles = vec![Vec::new(); agents];
        for (j, &a) in self.0.iter().enumerate() {
            bundles[a].push(j);
        }
        Allocation { bundles }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let ids = parse_ids(text)?;
        Ok(Self(ids))
    }
}

impl PickingSequence {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn picks(&self) -> &[usize] {
        &self.0
    }

    /// 1-based picking rounds of `agent`.
    pub fn rounds_of(&self, agent: usize) -> Vec<usize> {
        positions_of(&self.0, agent)
    }

    pub fn validate(&self, agents: usize) -> Result<()> {
        validate_ids(&self.0, agents)
    }

    pub fn to_order(&self) -> PickingOrder {
        PickingOrder(self.0.iter().rev().copied().collect())
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(Self(parse_ids(text)?))
    }
}

impl From<&PickingOrder> for PickingSequence {
    fn from(order: &PickingOrder) -> Self {
        order.to_sequence()
    }
}

impl From<&PickingSequence> for PickingOrder {
    fn from(seq: &PickingSequence) -> Self {
        seq.to_order()
    }
}

fn positions_of(ids: &[usize], agent: usize) -> Vec<usize> {
    ids.iter()
        .enumerate()
        .filter(|&(_, &a)| a == agent)
        .map(|(r, _)| r + 1)
        .collect()
}

fn validate_ids(ids: &[usize], agents: usize) -> Result<()> {
    match ids.iter().find(|&&a| a >= agents) {
        Some(&picker) => Err(Error::PickerOutOfRange { picker, agents }),
        None => Ok(()),
    }
}

/// Digit strings (`"1221"`), lettered strings (`"abba"`) or comma separated
/// 1-based ids (`"10,2,3"`). Whitespace is ignored.
fn parse_ids(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidArgument(format!("cannot parse picker list {text:?}"));
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.contains(',') {
        return compact
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|s| match s.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(bad()),
            })
            .collect();
    }
    compact
        .chars()
        .map(|c| match c {
            '1'..='9' => Ok(c as usize - '1' as usize),
            'a'..='z' => Ok(c as usize - 'a' as usize),
            _ => Err(bad()),
        })
        .collect()
}

fn format_ids(ids: &[usize], lettered: bool) -> String {
    if !lettered && ids.iter().all(|&a| a < 9) {
        return ids.iter().map(|&a| char::from(b'1' + a as u8)).collect();
    }
    if lettered && ids.iter().all(|&a| a < 26) {
        return ids.iter().map(|&a| char::from(b'a' + a as u8)).collect();
    }
    ids.iter()
        .map(|&a| (a + 1).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl fmt::Display for PickingOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_ids(&self.0, false))
    }
}

impl fmt::Display for PickingSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_ids(&self.0, false))
    }
}

/// An ultimately periodic picking order: `prefix (cycle)*`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicOrder {
    pub prefix: Vec<usize>,
    pub cycle: Vec<usize>,
    /// Render agents as letters (`abc..`) instead of digits.
    pub lettered: bool,
}

impl PeriodicOrder {
    pub fn new(prefix: Vec<usize>, cycle: Vec<usize>) -> Self {
        Self {
            prefix,
            cycle,
            lettered: false,
        }
    }

    /// Parses `prefix(cycle)*`, e.g. `"1221(221)*"`; a string without
    /// parentheses is an order with an empty cycle.
    pub fn parse(text: &str) -> Result<Self> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let lettered = compact.chars().any(|c| c.is_ascii_lowercase());
        match compact.split_once('(') {
            None => Ok(Self {
                prefix: parse_ids(&compact)?,
                cycle: Vec::new(),
                lettered,
            }),
            Some((prefix, rest)) => {
                let cycle = rest
                    .strip_suffix(")*")
                    .or_else(|| rest.strip_suffix(')'))
                    .ok_or_else(|| {
                        Error::InvalidArgument(format!("unterminated cycle in {text:?}"))
                    })?;
                Ok(Self {
                    prefix: parse_ids(prefix)?,
                    cycle: parse_ids(cycle)?,
                    lettered,
                })
            }
        }
    }

    pub fn agents(&self) -> usize {
        self.prefix
            .iter()
            .chain(&self.cycle)
            .map(|&a| a + 1)
            .max()
            .unwrap_or(0)
    }

    /// First `m` rounds. Fails if the cycle is empty and `m` exceeds the
    /// prefix.
    pub fn expand(&self, m: usize) -> Result<PickingOrder> {
        if self.cycle.is_empty() && m > self.prefix.len() {
            return Err(Error::InvalidArgument(format!(
                "finite order of length {} cannot be expanded to {m} rounds",
                self.prefix.len()
            )));
        }
        let rounds = self
            .prefix
            .iter()
            .chain(self.cycle.iter().cycle())
            .take(m)
            .copied()
            .collect();
        Ok(PickingOrder(rounds))
    }
}

impl fmt::Display for PeriodicOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_ids(&self.prefix, self.lettered))?;
        if !self.cycle.is_empty() {
            write!(f, "({})*", format_ids(&self.cycle, self.lettered))?;
        }
        Ok(())
    }
}

/// Disjoint bundles of chore indices, one per agent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Allocation {
    pub bundles: Vec<Vec<usize>>,
}

impl Allocation {
    pub fn empty(agents: usize) -> Self {
        Self {
            bundles: vec![Vec::new(); agents],
        }
    }

    /// True iff the bundles partition `0..chores`.
    pub fn is_partition(&self, chores: usize) -> bool {
        let mut seen = vec![false; chores];
        for &j in self.bundles.iter().flatten() {
            if j >= chores || seen[j] {
                return false;
            }
            seen[j] = true;
        }
        seen.into_iter().all(|s| s)
    }

    pub fn costs(&self, inst: &ChoreInstance) -> Vec<Rational> {
        self.bundles
            .iter()
            .enumerate()
            .map(|(i, b)| inst.bundle_cost(i, b))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn loads_symmetric_instance() {
        let inst = ChoreInstance::from_json(
            r#"{"agents":2,"chores":3,"entitlements":["1/2","1/2"],"costs":[[3,2,1],["3","2","1"]]}"#,
        )
        .unwrap();
        assert_eq!(inst.agents(), 2);
        assert_eq!(inst.chores(), 3);
        assert!(inst.is_ido());
    }

    #[test]
    fn entitlement_sum_diagnostic() {
        let err = ChoreInstance::from_json(
            r#"{"agents":2,"chores":1,"entitlements":["1/2","1/3"],"costs":[["1"],["1"]]}"#,
        )
        .unwrap_err();
        assert_eq!(err.to_string(), "entitlements sum to 5/6, expected 1");
    }

    #[test]
    fn negative_cost_and_schema_diagnostics() {
        let neg = ChoreInstance::from_json(
            r#"{"agents":1,"chores":2,"entitlements":["1"],"costs":[["1","-1/2"]]}"#,
        )
        .unwrap_err();
        assert!(matches!(neg, Error::NegativeCost { agent: 1, chore: 2, .. }));
        let schema = ChoreInstance::from_json(
            r#"{"agents":2,"chores":1,"entitlements":["1"],"costs":[["1"]]}"#,
        )
        .unwrap_err();
        assert!(matches!(schema, Error::Schema(_)));
        let float = ChoreInstance::from_json(
            r#"{"agents":1,"chores":1,"entitlements":["1"],"costs":[[0.5]]}"#,
        )
        .unwrap_err();
        assert!(matches!(float, Error::Schema(_)));
    }

    #[test]
    fn unequal_entitlements_parse_exactly() {
        let inst = ChoreInstance::from_json(
            r#"{"agents":3,"chores":2,"entitlements":["1/8","0.375","1/2"],"costs":[["1","1"],["1","1"],["1","1"]]}"#,
        )
        .unwrap();
        assert_eq!(inst.entitlements(), &[rat(1, 8), rat(3, 8), rat(1, 2)]);
    }

    #[test]
    fn ido_of_ido_instance_is_identity() {
        let inst = ChoreInstance::identical(2, ints(&[3, 2, 2, 1])).unwrap();
        let red = to_ido(&inst);
        assert_eq!(red.instance, inst);
        assert!(red.permutations.iter().all(|p| p == &vec![0, 1, 2, 3]));
    }

    #[test]
    fn ido_single_agent_sort() {
        let inst = ChoreInstance::new(vec![int(1)], vec![ints(&[1, 3, 2])]).unwrap();
        let red = to_ido(&inst);
        assert_eq!(red.instance.row(0), ints(&[3, 2, 1]).as_slice());
        assert_eq!(red.permutations[0], vec![1, 2, 0]);
    }

    #[test]
    fn ido_crossed_rows() {
        // Totals tie at 3, so the reference ordering is (e1, e2).
        let inst = ChoreInstance::equal_entitlements(vec![ints(&[1, 2]), ints(&[2, 1])]).unwrap();
        let red = to_ido(&inst);
        assert!(red.instance.is_ido());
        assert_eq!(red.reference, vec![0, 1]);
        assert_eq!(red.permutations, vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(red.instance.row(0), ints(&[2, 1]).as_slice());
        assert_eq!(red.instance.row(1), ints(&[2, 1]).as_slice());
    }

    #[test]
    fn order_sequence_duality() {
        let order = PickingOrder::parse("122").unwrap();
        assert_eq!(order.to_sequence().to_string(), "221");
        let pal = PickingOrder::parse("1221").unwrap();
        assert_eq!(pal.to_sequence().to_string(), "1221");
        let periodic = PeriodicOrder::parse("1221(221)*").unwrap();
        let order = periodic.expand(7).unwrap();
        assert_eq!(order.to_string(), "1221221");
        assert_eq!(order.to_sequence().to_string(), "1221221");
        assert_eq!(order.to_sequence().to_order(), order);
    }

    #[test]
    fn periodic_display_and_letters() {
        let p = PeriodicOrder::parse("abcdefghhg (fedcbahgfe)*").unwrap();
        assert_eq!(p.agents(), 8);
        assert_eq!(p.to_string(), "abcdefghhg(fedcbahgfe)*");
        assert!(PeriodicOrder::parse("12").unwrap().expand(3).is_err());
        let wide = PickingOrder::parse("10,2,1").unwrap();
        assert_eq!(wide.0, vec![9, 1, 0]);
        assert_eq!(wide.to_string(), "10,2,1");
    }

    #[test]
    fn allocation_partition() {
        let order = PickingOrder::parse("1221").unwrap();
        let alloc = order.to_allocation(2);
        assert_eq!(alloc.bundles, vec![vec![0, 3], vec![1, 2]]);
        assert!(alloc.is_partition(4));
        assert!(!Allocation { bundles: vec![vec![0, 0]] }.is_partition(1));
    }

    #[test]
    fn json_round_trip_keeps_rationals() {
        let inst = ChoreInstance::new(
            vec![rat(1, 8), rat(3, 8), rat(1, 2)],
            vec![vec![rat(40, 3), rat(1, 7)], vec![int(0), int(2)], vec![rat(5, 2), int(1)]],
        )
        .unwrap();
        let back = ChoreInstance::from_json(&inst.to_json()).unwrap();
        assert_eq!(back, inst);
    }
}
