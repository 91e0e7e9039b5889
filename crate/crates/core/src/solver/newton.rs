//! Maximization of a 1-D Chebyshev interpolant over its interval.

use crate::cheb1d::{clenshaw, derivative_raw, CoefVector};

const MAX_NEWTON_ITERS: usize = 30;
const DERIV_TOL: f64 = 1e-12;
const SCAN_POINTS: usize = 257;
const BISECTION_STEPS: usize = 60;

/// Returns `(argmax, max)` of the interpolant over its interval.
///
/// Newton's method on the derivative runs from `warm_start`. Its fixed point
/// competes with both endpoints. When Newton fails (non-concave step, exit
/// from the interval, no convergence) or the interpolant cannot be certified
/// concave, a uniform scan with bisection refinement is added to the
/// candidate set.
pub fn newton_maximize(objective: &CoefVector, warm_start: f64) -> (f64, f64) {
    let iv = objective.interval;
    let (t, v) = maximize_unit(&objective.coeffs, iv.to_unit(iv.clamp(warm_start)));
    (iv.clamp(iv.from_unit(t)), v)
}

/// Same as [`newton_maximize`] in the unit variable.
pub(crate) fn maximize_unit(p: &[f64], warm_start: f64) -> (f64, f64) {
    let t0 = if warm_start.is_finite() { warm_start.clamp(-1.0, 1.0) } else { 0.0 };
    if p.len() == 1 {
        return (t0, p[0]);
    }
    let d1 = derivative_raw(p);
    let d2 = derivative_raw(&d1);
    let newton = newton_root(&d1, &d2, t0);

    let mut best = (-1.0, clenshaw(p, -1.0));
    let mut consider = |t: f64| {
        let v = clenshaw(p, t);
        if v > best.1 {
            best = (t, v);
        }
    };
    if let Some(t) = newton {
        consider(t);
    }
    consider(1.0);
    if newton.is_none() || !certified_concave(&d2) {
        for t in scan(p, &d1) {
            consider(t);
        }
    }
    best
}

fn newton_root(d1: &[f64], d2: &[f64], start: f64) -> Option<f64> {
    let mut t = start;
    for _ in 0..MAX_NEWTON_ITERS {
        let f1 = clenshaw(d1, t);
        if f1.abs() <= DERIV_TOL {
            return Some(t);
        }
        let f2 = clenshaw(d2, t);
        if f2.is_nan() || f2 >= 0.0 {
            return None;
        }
        let next = t - f1 / f2;
        if !next.is_finite() || next.abs() > 1.0 {
            return None;
        }
        if (next - t).abs() <= 4.0 * f64::EPSILON {
            return Some(next);
        }
        t = next;
    }
    None
}

/// `sum r_l T_l < 0` on `[-1, 1]` whenever `r_0 + sum_{l>0} |r_l| < 0`.
fn certified_concave(d2: &[f64]) -> bool {
    d2[0] + d2[1..].iter().map(|r| r.abs()).sum::<f64>() < 0.0
}

/// Local maxima of a uniform scan, each refined by bisection on the
/// derivative when its bracket contains a sign change.
fn scan(p: &[f64], d1: &[f64]) -> Vec<f64> {
    let at = |i: usize| -1.0 + 2.0 * i as f64 / (SCAN_POINTS - 1) as f64;
    let values: Vec<f64> = (0..SCAN_POINTS).map(|i| clenshaw(p, at(i))).collect();
    let last = SCAN_POINTS - 1;
    let mut out = Vec::new();
    for i in 0..SCAN_POINTS {
        let left_ok = i == 0 || values[i] >= values[i - 1];
        let right_ok = i == last || values[i] >= values[i + 1];
        if !(left_ok && right_ok) {
            continue;
        }
        out.push(at(i));
        let (lo, hi) = if i == 0 {
            (0, 1)
        } else if i == last {
            (last - 1, last)
        } else if clenshaw(d1, at(i)) > 0.0 {
            (i, i + 1)
        } else {
            (i - 1, i)
        };
        let (mut lo, mut hi) = (at(lo), at(hi));
        if !(clenshaw(d1, lo) > 0.0 && clenshaw(d1, hi) < 0.0) {
            continue;
        }
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if clenshaw(d1, mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    out
}
