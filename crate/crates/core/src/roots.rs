//! Scalar equations behind the default parameters, solved by bisection.

/// Bisection for a sign change of `f` on `[lo, hi]`, to absolute tolerance
/// `tol` on the argument.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut f_lo = f(lo);
    assert!(
        f_lo * f(hi) <= 0.0,
        "bisection interval [{lo}, {hi}] does not bracket a root"
    );
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Integral of the scaling function over `[0, 1]` minus one:
/// `(1 - t) ln(1 - 1/t) + t - 1 - 1`.
pub fn scaling_integral_excess(t: f64) -> f64 {
    (1.0 - t) * (1.0 - 1.0 / t).ln() + t - 1.0 - 1.0
}

/// Left side minus one of the ridge lower-bound condition in `rho`.
pub fn ridge_bound_excess(rho: f64) -> f64 {
    let d = rho - 1.0;
    d * (rho / d).ln() + 2.0 * rho - 3.0 + 2.0 * d * (rho / (2.0 * d)).ln() - 1.0
}

/// Smallest `t` for which the scaling function integrates to at least one.
pub fn solve_t() -> f64 {
    bisect(scaling_integral_excess, 1.4, 1.6, 1e-9)
}

/// Asymptotic lower bound on the ratio of ridge orders, about 1.52408.
pub fn solve_rho_star() -> f64 {
    bisect(ridge_bound_excess, 1.5, 1.6, 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_root() {
        let t = solve_t();
        assert!((t - 1.466).abs() < 1e-3, "{t}");
        assert!((1.0 + t / 2.0 - 1.733).abs() < 5e-4);
        assert!(scaling_integral_excess(t + 1e-6) >= 0.0);
    }

    #[test]
    fn rho_star_root() {
        let rho = solve_rho_star();
        assert!((rho - 1.52408).abs() < 5e-4, "{rho}");
        assert!(ridge_bound_excess(1.6) > 0.0);
        assert!(ridge_bound_excess(1.5) < 0.0);
    }

    #[test]
    fn bisect_linear() {
        let x = bisect(|x| x - 0.3, 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-11);
    }
}
