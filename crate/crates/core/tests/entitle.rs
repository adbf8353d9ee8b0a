mod common;

use chorepick::entitle::{
    build_fractional, build_order, default_t, round_to_order, verify_guarantee, FractionalAllocation,
    PipelineOptions, Scaling,
};
use chorepick::rational::{int, rat};
use chorepick::simulate::greedy_play;
use chorepick::{ChoreInstance, PickingOrder, Rational};
use common::{entitlements, ints};
use num_traits::{One, Zero};
use proptest::prelude::*;

fn e2() -> Vec<Rational> {
    vec![rat(1, 8), rat(3, 8), rat(1, 2)]
}

fn col_sum(m: &[Vec<Rational>], j: usize) -> Rational {
    m.iter().map(|r| &r[j]).sum()
}

#[test]
fn proportional_rounding_alternates() {
    let alloc = FractionalAllocation::proportional(&[rat(1, 2), rat(1, 2)], 4).unwrap();
    assert_eq!(round_to_order(&alloc, 4).unwrap(), PickingOrder(vec![1, 0, 1, 0]));
    let solo = FractionalAllocation::proportional(&[int(1)], 5).unwrap();
    assert_eq!(round_to_order(&solo, 5).unwrap(), PickingOrder(vec![0; 5]));
}

#[test]
fn e2_production_pipeline_is_legal() {
    let trace = build_fractional(&e2(), 20, &PipelineOptions::default()).unwrap();
    let res = &trace.result;
    for j in 0..res.chore_count() {
        assert_eq!(res.column_sum(j), int(1));
    }
    for (k, &f) in res.first_fractional.iter().enumerate() {
        let floor_inv = res.entitlements[k].recip().floor().to_integer();
        assert!(f as i64 > floor_inv.try_into().unwrap_or(i64::MAX).max(3));
    }
}

/// Each agent's greedy bundle is at most the cost of her first fractional
/// chore plus her fractional share, on random nonincreasing rows.
#[test]
fn e2_bundles_within_fractional_bound() {
    let b = e2();
    let m = 16;
    let (trace, order) = build_order(&b, m, &PipelineOptions::default()).unwrap();
    let res = &trace.result;
    let mut state = 12345u64;
    for _ in 0..200 {
        let rows: Vec<Vec<Rational>> = (0..3)
            .map(|_| {
                let mut v: Vec<i64> = (0..m)
                    .map(|_| {
                        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                        (state >> 33) as i64 % 100
                    })
                    .collect();
                v.sort_unstable_by(|a, b| b.cmp(a));
                ints(&v)
            })
            .collect();
        let inst = ChoreInstance::new(b.clone(), rows).unwrap();
        let alloc = greedy_play(&order.to_sequence(), &inst).unwrap();
        for (k, &agent) in res.agents.iter().enumerate() {
            let row = inst.row(agent);
            let f = res.first_fractional[k];
            let at_f = row.get(f - 1).cloned().unwrap_or_default();
            let frac: Rational = (0..m).map(|j| &res.fractions[k][j] * &row[j]).sum();
            assert!(inst.bundle_cost(agent, &alloc.bundles[agent]) <= at_f + frac);
        }
    }
}

#[test]
fn highest_priority_rounding_can_lag_behind_the_floor() {
    let alloc = FractionalAllocation::proportional(&[rat(1, 5), rat(7, 15), rat(1, 3)], 10).unwrap();
    let order = round_to_order(&alloc, 10).unwrap();
    assert_eq!(order.positions(0).len(), 1);
}

#[test]
fn single_agent_guarantee_is_one() {
    let report = verify_guarantee(&[int(1)], 30, 0, 20).unwrap();
    assert_eq!(report.max_observed, int(1));
    assert!(report.holds());
}

#[test]
fn guarantee_examples() {
    for b in [vec![rat(1, 4); 4], e2()] {
        let report = verify_guarantee(&b, 100, 7, 30).unwrap();
        assert!(report.holds(), "{report:?}");
        assert!(report.max_ratio() <= &rat(1733, 1000));
    }
}

#[test]
fn scaling_conditions_on_a_grid() {
    let s = Scaling::default_threshold();
    let top = s.at_one();
    assert_eq!(top, default_t());
    assert!(top <= int(2));
    let steps = 2000;
    let mut prev = Rational::zero();
    for k in 0..=steps {
        let x = rat(k, steps);
        let v = s.eval(&x);
        assert!(v >= prev, "not monotone at {x}");
        assert!((Rational::one() - &x) * &v <= int(1), "(1-x)s(x) > 1 at {x}");
        assert!(int(1) + &v - &x * &v <= top, "1 + s(x) - x s(x) > s(1) at {x}");
        prev = v;
    }
    // The breakpoint itself.
    let x = top.recip();
    assert!((Rational::one() - &x) * s.eval(&x) <= int(1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pipeline_invariants(b in entitlements(8), m in 1usize..40) {
        let trace = build_fractional(&b, m, &PipelineOptions::default()).unwrap();
        let n = b.len();
        let cols = trace.proportional[0].len();
        for j in 0..cols {
            prop_assert!(col_sum(&trace.proportional, j).is_one());
            prop_assert!(col_sum(&trace.rerouted, j).is_one());
            if j < n {
                prop_assert!(col_sum(&trace.scaled, j).is_one());
            } else {
                prop_assert!(col_sum(&trace.scaled, j) >= int(1));
            }
        }
        for j in 0..trace.result.chore_count() {
            prop_assert!(trace.result.column_sum(j).is_one());
        }
        // Each agent gives up mass exactly one in stage 2.
        for (k, row) in trace.ridge_and_give_up.iter().enumerate() {
            let held: Rational = row.iter().sum();
            let before: Rational = trace.proportional[k].iter().sum();
            prop_assert_eq!(held, before);
        }
        let surplus: Rational = (0..cols).map(|j| (col_sum(&trace.ridge_and_give_up, j) - int(1)).max(int(0))).sum();
        let deficit: Rational = (0..cols).map(|j| (int(1) - col_sum(&trace.ridge_and_give_up, j)).max(int(0))).sum();
        prop_assert_eq!(surplus, deficit);
        // Suffix domination of the rerouted matrix over the proportional one.
        let longest = trace.entitlements[0].recip().ceil().to_integer();
        let longest: usize = longest.try_into().unwrap();
        for k in n..longest.min(cols) {
            let mut now = Rational::zero();
            let mut prop_mass = Rational::zero();
            for i in (0..n).rev() {
                now += &trace.rerouted[i][k];
                prop_mass += &trace.entitlements[i];
                prop_assert!(now >= prop_mass);
            }
        }
    }

    #[test]
    fn rounding_counts(b in entitlements(8), m in 1usize..40) {
        let (trace, order) = build_order(&b, m, &PipelineOptions::default()).unwrap();
        prop_assert_eq!(order.len(), m);
        prop_assert!(order.to_allocation(b.len()).is_partition(m));
        let res = &trace.result;
        for (k, &agent) in res.agents.iter().enumerate() {
            let mass: Rational = res.fractions[k][..m].iter().sum();
            let got = int(order.positions(agent).len() as i64);
            // The eligibility rule never lets an agent run ahead of her
            // mass; with the highest-entitlement tie-break she may lag.
            prop_assert!(got <= mass.ceil(), "agent {} mass {} got {}", agent, mass, got);
        }
    }

    #[test]
    fn proportional_rounding_counts(b in entitlements(6), m in 1usize..40) {
        let alloc = FractionalAllocation::proportional(&b, m).unwrap();
        let order = round_to_order(&alloc, m).unwrap();
        for (i, bi) in b.iter().enumerate() {
            let mass = bi * int(m as i64);
            let got = int(order.positions(i).len() as i64);
            prop_assert!(got <= mass.ceil());
        }
    }
}
