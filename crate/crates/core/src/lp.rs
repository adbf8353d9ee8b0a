//! Exact dense simplex for `max c·x` subject to `A x <= b`, `x >= 0`, with
//! `b >= 0` so the all-slack basis is feasible. Bland's rule prevents
//! cycling.

use num_traits::{Signed, Zero};

use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpSolution {
    pub value: Rational,
    /// Optimal primal point.
    pub primal: Vec<Rational>,
    /// Optimal multipliers, one per constraint row.
    pub dual: Vec<Rational>,
}

/// Solves the packing-form LP. Panics if `b` has a negative entry or the
/// dimensions disagree.
pub fn maximize(c: &[Rational], a: &[Vec<Rational>], b: &[Rational]) -> LpOutcome {
    let rows = a.len();
    let vars = c.len();
    assert_eq!(b.len(), rows, "one bound per constraint row");
    assert!(a.iter().all(|r| r.len() == vars), "ragged constraint matrix");
    assert!(b.iter().all(|x| !x.is_negative()), "bounds must be nonnegative");

    let width = vars + rows;
    // Row-major tableau: constraint rows then the objective row (reduced
    // costs negated, so the objective row holds z_j - c_j).
    let mut tab: Vec<Vec<Rational>> = Vec::with_capacity(rows + 1);
    for (i, row) in a.iter().enumerate() {
        let mut t = row.clone();
        t.extend((0..rows).map(|k| if k == i { Rational::from_integer(1.into()) } else { Rational::zero() }));
        t.push(b[i].clone());
        tab.push(t);
    }
    let mut obj: Vec<Rational> = c.iter().map(|x| -x).collect();
    obj.extend(std::iter::repeat_n(Rational::zero(), rows + 1));
    tab.push(obj);
    let mut basis: Vec<usize> = (vars..width).collect();

    while let Some(enter) = (0..width).find(|&j| tab[rows][j].is_negative()) {
        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..rows {
            if !tab[i][enter].is_positive() {
                continue;
            }
            let ratio = &tab[i][width] / &tab[i][enter];
            let better = match &leave {
                None => true,
                Some((li, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*li]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        let Some((pivot_row, _)) = leave else {
            return LpOutcome::Unbounded;
        };
        pivot(&mut tab, pivot_row, enter);
        basis[pivot_row] = enter;
    }

    let mut primal = vec![Rational::zero(); vars];
    for (i, &v) in basis.iter().enumerate() {
        if v < vars {
            primal[v] = tab[i][width].clone();
        }
    }
    let dual = (0..rows).map(|k| tab[rows][vars + k].clone()).collect();
    LpOutcome::Optimal(LpSolution {
        value: tab[rows][width].clone(),
        primal,
        dual,
    })
}

fn pivot(tab: &mut [Vec<Rational>], row: usize, col: usize) {
    let p = tab[row][col].clone();
    for x in tab[row].iter_mut() {
        *x = &*x / &p;
    }
    let pivot_row = tab[row].clone();
    for (i, r) in tab.iter_mut().enumerate() {
        if i == row || r[col].is_zero() {
            continue;
        }
        let factor = r[col].clone();
        for (x, y) in r.iter_mut().zip(&pivot_row) {
            if !y.is_zero() {
                *x -= &factor * y;
            }
        }
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
    fn textbook_problem() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6).
        let a = vec![ints(&[1, 0]), ints(&[0, 2]), ints(&[3, 2])];
        let LpOutcome::Optimal(sol) = maximize(&ints(&[3, 5]), &a, &ints(&[4, 12, 18])) else {
            panic!("bounded");
        };
        assert_eq!(sol.value, int(36));
        assert_eq!(sol.primal, ints(&[2, 6]));
        assert_eq!(sol.dual, vec![int(0), rat(3, 2), int(1)]);
        let dual_obj: Rational = sol.dual.iter().zip(ints(&[4, 12, 18])).map(|(y, b)| y * b).sum();
        assert_eq!(dual_obj, sol.value);
    }

    #[test]
    fn unbounded_detected() {
        let a = vec![ints(&[1, -1])];
        assert_eq!(maximize(&ints(&[1, 1]), &a, &ints(&[1])), LpOutcome::Unbounded);
    }

    #[test]
    fn degenerate_start() {
        // max x + y, x - y <= 0, x + y <= 2.
        let a = vec![ints(&[1, -1]), ints(&[1, 1])];
        let LpOutcome::Optimal(sol) = maximize(&ints(&[1, 1]), &a, &ints(&[0, 2])) else {
            panic!("bounded");
        };
        assert_eq!(sol.value, int(2));
    }
}
