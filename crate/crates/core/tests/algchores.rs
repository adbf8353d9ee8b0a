mod common;

use chorepick::algchores::{alg_chores, aps_bound, ratio_report, tight_example};
use chorepick::rational::{int, rat};
use chorepick::shares::{aps_oracle, mms_oracle, OracleLimits};
use chorepick::{ChoreInstance, Rational};
use common::{ints, multisets};
use proptest::prelude::*;

fn max_cost(inst: &ChoreInstance, bundles: &[Vec<usize>]) -> Rational {
    (0..inst.agents()).map(|i| inst.bundle_cost(i, &bundles[i])).max().unwrap()
}

#[test]
fn tight_examples_meet_the_bound() {
    let two = tight_example(2).unwrap();
    assert_eq!(two.row(0), &[rat(3, 2), rat(3, 2), int(1), int(1), int(1)][..]);
    let run = alg_chores(&two).unwrap();
    let mut costs = run.allocation.costs(&two);
    costs.sort();
    assert_eq!(costs, vec![rat(5, 2), rat(7, 2)]);
    for n in 2..=4 {
        let inst = tight_example(n).unwrap();
        assert_eq!(inst.chores(), 2 * n + 1);
        let mms = mms_oracle(inst.row(0), n).unwrap();
        assert_eq!(mms, int(3));
        let run = alg_chores(&inst).unwrap();
        let worst = max_cost(&inst, &run.allocation.bundles);
        assert_eq!(worst, int(4) - rat(1, n as i64));
        assert_eq!(&worst / &mms, aps_bound(n));
    }
    assert_eq!(aps_bound(4), rat(15, 12));
    assert!(tight_example(1).is_err());
}

#[test]
fn empty_instance_gives_empty_bundles() {
    let inst = ChoreInstance::identical(3, vec![]).unwrap();
    let run = alg_chores(&inst).unwrap();
    assert!(run.allocation.bundles.iter().all(Vec::is_empty));
    assert!(run.rounds.is_empty());
}

#[test]
fn unequal_entitlements_are_rejected() {
    let inst = ChoreInstance::new(vec![rat(1, 3), rat(2, 3)], vec![ints(&[1]), ints(&[1])]).unwrap();
    assert!(alg_chores(&inst).is_err());
}

#[test]
fn two_agents_exhaustive_within_seven_sixths() {
    let bound = rat(7, 6);
    let mut worst = Rational::from_integer(0.into());
    for m in 0..=6 {
        for row in multisets(m, 3) {
            let row = ints(&row);
            let inst = ChoreInstance::identical(2, row.clone()).unwrap();
            let run = alg_chores(&inst).unwrap();
            assert!(run.allocation.is_partition(m));
            let aps = aps_oracle(&row, &rat(1, 2)).unwrap();
            let top = max_cost(&inst, &run.allocation.bundles);
            if aps > int(0) {
                worst = worst.max(&top / &aps);
            } else {
                assert_eq!(top, int(0));
            }
        }
    }
    assert!(worst <= bound, "worst ratio {worst}");
}

#[test]
fn gap_instance_stays_within_bound_of_aps() {
    let inst = ChoreInstance::identical(3, vec![rat(3, 7); 7]).unwrap();
    let run = alg_chores(&inst).unwrap();
    let report = ratio_report(&inst, &run.allocation, OracleLimits::default()).unwrap();
    assert!(report.within_bound);
    assert!(report.agents.iter().all(|a| a.aps == Some(rat(9, 7))));
}

fn rows_strategy() -> impl Strategy<Value = Vec<Vec<Rational>>> {
    (2usize..=3, 0usize..=9).prop_flat_map(|(n, m)| {
        prop::collection::vec(prop::collection::vec(0i64..12, m), n)
            .prop_map(|rows| rows.iter().map(|r| ints(r)).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn general_instances_within_bound(rows in rows_strategy()) {
        let inst = ChoreInstance::equal_entitlements(rows).unwrap();
        let run = alg_chores(&inst).unwrap();
        prop_assert!(run.allocation.is_partition(inst.chores()));
        prop_assert_eq!(run.rounds.len(), inst.chores());
        let report = ratio_report(&inst, &run.allocation, OracleLimits::default()).unwrap();
        prop_assert!(report.within_bound, "{:?}", report);
    }

    #[test]
    fn sorted_instances_are_not_reduced(rows in rows_strategy()) {
        let rows: Vec<Vec<Rational>> = rows
            .into_iter()
            .map(|mut r| {
                r.sort_by(|a, b| b.cmp(a));
                r
            })
            .collect();
        let inst = ChoreInstance::equal_entitlements(rows).unwrap();
        let run = alg_chores(&inst).unwrap();
        prop_assert!(!run.reduced);
        // Chores are handed out costliest first, one per round.
        for (r, round) in run.rounds.iter().enumerate() {
            prop_assert_eq!(round.chore, r + 1);
        }
    }
}
