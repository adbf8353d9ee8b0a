use chorepick::rational::{int, rat};
use chorepick::ridge::{
    best_ratio_search, covering_test, covering_test_with, fixed_order, halve_thresholds, naive_first_failure,
    ridge_periods, synthesize_order, verify_order, CoveringOptions, Mode, Verdict,
};
use chorepick::roots::{solve_rho_star, solve_t};
use chorepick::simulate::evaluate_order;
use chorepick::Rational;
use proptest::prelude::*;

fn rho_strategy() -> impl Strategy<Value = Rational> {
    (1001i64..2500).prop_map(|k| rat(k, 1000))
}

fn mode_strategy() -> impl Strategy<Value = Mode> {
    prop_oneof![Just(Mode::Agent), Just(Mode::Super)]
}

#[test]
fn root_solvers() {
    assert!((solve_t() - 1.466).abs() < 1e-3);
    assert!((1.0 + solve_t() / 2.0 - 1.733).abs() < 5e-4);
    assert!((solve_rho_star() - 1.52408).abs() < 5e-4);
}

#[test]
fn synthesized_small_orders() {
    let s2 = ridge_periods(2, &rat(4, 3), Mode::Agent).unwrap();
    assert_eq!(synthesize_order(&s2, 7).unwrap().to_string(), "1221221");
    let s3 = ridge_periods(3, &rat(7, 5), Mode::Agent).unwrap();
    assert_eq!(synthesize_order(&s3, 11).unwrap().to_string(), "12332123321");
}

#[test]
fn super8_orders_respect_thresholds() {
    let sched = ridge_periods(8, &rat(8, 5), Mode::Super).unwrap();
    let ours = synthesize_order(&sched, 50).unwrap();
    assert_eq!(verify_order(&ours, &sched).unwrap(), None);
    let literal = fixed_order("super8").unwrap();
    assert_eq!(literal.prefix.len(), 10);
    assert_eq!(literal.cycle.len(), 40);
    for m in [50, 90, 200] {
        assert_eq!(verify_order(&literal.expand(m).unwrap(), &sched).unwrap(), None);
    }
}

#[test]
fn fixed_orders_verbatim() {
    let n2 = fixed_order("n2").unwrap();
    assert_eq!((n2.prefix, n2.cycle), (vec![0, 1, 1, 0], vec![1, 1, 0]));
    assert_eq!(fixed_order("n4").unwrap().to_string(), "12344321(43243314324321)*");
    assert!(fixed_order("n5").is_err());
}

#[test]
fn fixed_orders_stay_within_their_ratios() {
    for (name, n, bound) in [("n2", 2, rat(4, 3)), ("n3", 3, rat(7, 5)), ("n4", 4, rat(13, 9))] {
        let order = fixed_order(name).unwrap();
        let values: Vec<Rational> = [20, 40, 80]
            .iter()
            .map(|&m| evaluate_order(&order.expand(m).unwrap(), n, m).unwrap().ratio)
            .collect();
        for v in &values {
            assert!(*v <= bound, "{name}: {v} exceeds {bound}");
        }
        // Longer prefixes only add positions, so the values settle from below.
        assert!(values.windows(2).all(|w| w[0] <= w[1]), "{name}: {values:?}");
    }
}

#[test]
fn search_brackets() {
    let tol = rat(1, 1000);
    assert!(best_ratio_search(2, Mode::Agent, &tol).unwrap() <= rat(4, 3) + &tol);
    assert!(best_ratio_search(8, Mode::Super, &tol).unwrap() <= rat(8, 5));
    assert!(best_ratio_search(2, Mode::Agent, &int(0)).is_err());
}

#[test]
fn r_at_most_one_is_inconclusive() {
    let sched = ridge_periods(2, &rat(4, 3), Mode::Agent).unwrap();
    assert_eq!(sched.covering_ratio_exact(), int(1));
    let v = covering_test(&sched).unwrap();
    assert_eq!(v.verdict, Verdict::Inconclusive);
    let v = covering_test_with(
        &sched,
        CoveringOptions {
            fallback_horizon: Some(500),
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(v.verdict, Verdict::Inconclusive);
    assert_eq!(v.horizon, 500);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn event_counting_matches_recount(n in 1usize..=64, rho in rho_strategy(), mode in mode_strategy()) {
        let sched = ridge_periods(n, &rho, mode).unwrap();
        let v = covering_test_with(&sched, CoveringOptions { fallback_horizon: Some(40 * n as u64), max_horizon: 200_000, ..Default::default() }).unwrap();
        let naive = naive_first_failure(&sched, 2 * n as u64, v.horizon);
        match v.verdict {
            Verdict::Fail { k } => prop_assert_eq!(naive, Some(k)),
            _ => prop_assert_eq!(naive, None),
        }
    }

    #[test]
    fn thresholds_strictly_increase(n in 1usize..=40, rho in rho_strategy(), mode in mode_strategy()) {
        // Every period is at least n/rho; below one an agent may release
        // several thresholds in the same round.
        prop_assume!(int(n as i64) >= rho);
        let sched = ridge_periods(n, &rho, mode).unwrap();
        for a in &sched.agents {
            let t = a.upto(6 * n as u64 + 20);
            prop_assert!(t.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn synthesized_orders_respect_thresholds(n in 2usize..=24, k in 1550i64..2200, mode in mode_strategy(), extra in 0usize..200) {
        let sched = ridge_periods(n, &rat(k, 1000), mode).unwrap();
        let v = covering_test(&sched).unwrap();
        prop_assume!(v.passed() && v.ridge_feasible);
        let m = v.horizon as usize + extra;
        let order = synthesize_order(&sched, m).unwrap();
        prop_assert_eq!(verify_order(&order, &sched).unwrap(), None);
        for i in 0..n {
            prop_assert_eq!(order.rounds()[i], i);
            prop_assert_eq!(order.rounds()[2 * n - 1 - i], i);
        }
    }

    #[test]
    fn passing_is_monotone_in_rho(n in 2usize..=48, k in 1300i64..2000, step in 1i64..300, mode in mode_strategy()) {
        let low = covering_test(&ridge_periods(n, &rat(k, 1000), mode).unwrap()).unwrap();
        let high = covering_test(&ridge_periods(n, &rat(k + step, 1000), mode).unwrap()).unwrap();
        if low.passed() {
            prop_assert!(high.passed());
        }
    }

    #[test]
    fn halving_preserves_covering(n in 1usize..=16, k in 1550i64..2500, mode in mode_strategy()) {
        let sched = ridge_periods(2 * n, &rat(k, 1000), mode).unwrap();
        let v = covering_test(&sched).unwrap();
        prop_assume!(v.passed() && v.ridge_feasible);
        let out = halve_thresholds(&sched, v.horizon).unwrap();
        prop_assert!(out.covers(), "{:?}", out.first_failure);
        prop_assert!(out.ridge_feasible);
    }
}
