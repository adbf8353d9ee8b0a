#![allow(dead_code)]

use chorepick::rational::{int, rat};
use chorepick::Rational;
use proptest::prelude::*;

pub fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| int(x)).collect()
}

pub fn equal_shares(n: usize) -> Vec<Rational> {
    vec![rat(1, n as i64); n]
}

/// Nonincreasing row of `len` integers in `0..=max`.
pub fn sorted_row(len: usize, max: i64) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(0..=max, len).prop_map(|mut v| {
        v.sort_unstable_by(|a, b| b.cmp(a));
        ints(&v)
    })
}

/// Entitlements with small positive integer weights, normalized.
pub fn entitlements(max_agents: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(1i64..=12, 1..=max_agents).prop_map(|w| {
        let total: i64 = w.iter().sum();
        w.iter().map(|&x| rat(x, total)).collect()
    })
}

/// All nonincreasing sequences of length `len` over `0..=max`.
pub fn multisets(len: usize, max: i64) -> Vec<Vec<i64>> {
    fn rec(len: usize, cap: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for v in (0..=cap).rev() {
            cur.push(v);
            rec(len, v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(len, max, &mut Vec::new(), &mut out);
    out
}

/// Every sequence of length `len` over `0..n`.
pub fn all_words(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..n).map(move |a| {
                    let mut w = w.clone();
                    w.push(a);
                    w
                })
            })
            .collect();
    }
    out
}
