//! One-dimensional Chebyshev machinery on Gauss-Lobatto nodes (the extrema of
//! `T_N`): node construction, the affine map between `[a, b]` and `[-1, 1]`,
//! the FFT coefficient transform, Clenshaw evaluation and derivative
//! coefficients.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Points this far outside `[-1, 1]` are clamped back onto the interval.
pub const CLAMP_TOL: f64 = 1e-12;

/// A closed interval `[a, b]` with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() || a >= b {
            return Err(Error::InvalidInterval { a, b });
        }
        Ok(Self { a, b })
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    /// Maps `x` in `[a, b]` to `[-1, 1]`.
    #[inline]
    pub fn to_unit(&self, x: f64) -> f64 {
        (2.0 * x - (self.b + self.a)) / (self.b - self.a)
    }

    /// Maps `t` in `[-1, 1]` to `[a, b]`.
    #[inline]
    pub fn from_unit(&self, t: f64) -> f64 {
        0.5 * (self.b - self.a) * t + 0.5 * (self.b + self.a)
    }

    #[inline]
    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.a, self.b)
    }
}

/// Clamps `x` onto `[-1, 1]` when it is within [`CLAMP_TOL`] of the interval.
#[inline]
pub fn clamp_unit(x: f64) -> Result<f64> {
    if !x.is_finite() || x.abs() > 1.0 + CLAMP_TOL {
        return Err(Error::OutOfDomain { value: x });
    }
    Ok(x.clamp(-1.0, 1.0))
}

/// Chebyshev-Lobatto nodes `cos(pi k / n)` on `[-1, 1]`, descending.
pub fn unit_nodes(n: usize) -> Vec<f64> {
    if n == 0 {
        return vec![0.0];
    }
    (0..=n)
        .map(|k| {
            // exact zero at the midpoint avoids a 6e-17 residue from cos(pi/2)
            if 2 * k == n {
                0.0
            } else {
                (PI * k as f64 / n as f64).cos()
            }
        })
        .collect()
}

/// Degree, interval and node set for one dimension.
#[derive(Clone)]
pub struct ChebBasis1D {
    degree: usize,
    interval: Interval,
    nodes: Vec<f64>,
    unit: Vec<f64>,
    fft: Option<Arc<dyn Fft<f64>>>,
}

impl fmt::Debug for ChebBasis1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChebBasis1D")
            .field("degree", &self.degree)
            .field("interval", &self.interval)
            .field("nodes", &self.nodes)
            .finish()
    }
}

impl PartialEq for ChebBasis1D {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree && self.interval == other.interval
    }
}

/// Builds the degree-`n` basis on `[a, b]`.
pub fn make_basis(n: usize, a: f64, b: f64) -> Result<ChebBasis1D> {
    let interval = Interval::new(a, b)?;
    let unit = unit_nodes(n);
    let mut nodes: Vec<f64> = unit.iter().map(|&t| interval.from_unit(t)).collect();
    if n > 0 {
        nodes[0] = b;
        nodes[n] = a;
    }
    let fft = if n > 0 { Some(FftPlanner::new().plan_fft_forward(2 * n)) } else { None };
    Ok(ChebBasis1D { degree: n, interval, nodes, unit, fft })
}

impl ChebBasis1D {
    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.degree + 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn interval(&self) -> Interval {
        self.interval
    }

    /// Nodes mapped to the basis interval, `nodes()[0] == b`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Nodes on `[-1, 1]`.
    pub fn unit_nodes(&self) -> &[f64] {
        &self.unit
    }

    /// Chebyshev coefficients of the interpolant through `samples`, where
    /// `samples[k]` is the function value at `nodes()[k]`.
    pub fn coeffs_from_samples(&self, samples: &[f64]) -> Result<CoefVector> {
        if samples.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), got: samples.len() });
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("samples"));
        }
        let mut coeffs = vec![0.0; self.len()];
        let mut buf = Vec::new();
        self.transform_into(samples, &mut coeffs, &mut buf);
        Ok(CoefVector { coeffs, interval: self.interval })
    }

    /// Unchecked transform used on hot paths. `samples` and `out` must both
    /// have length `degree + 1`; `buf` is scratch space reused across calls.
    pub(crate) fn transform_into(&self, samples: &[f64], out: &mut [f64], buf: &mut Vec<Complex<f64>>) {
        let n = self.degree;
        let Some(fft) = &self.fft else {
            out[0] = samples[0];
            return;
        };
        // mirror-extend: [F_0, ..., F_N, F_{N-1}, ..., F_1]
        buf.clear();
        buf.extend(samples.iter().map(|&v| Complex::new(v, 0.0)));
        buf.extend(samples[1..n].iter().rev().map(|&v| Complex::new(v, 0.0)));
        fft.process(buf);
        let scale = 1.0 / (2 * n) as f64;
        out[0] = buf[0].re * scale;
        for l in 1..n {
            out[l] = (buf[l].re + buf[2 * n - l].re) * scale;
        }
        out[n] = buf[n].re * scale;
    }
}

/// Coefficients `p_0..p_N` of `sum p_l T_l(x)` together with the interval
/// the polynomial was built on.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefVector {
    pub coeffs: Vec<f64>,
    pub interval: Interval,
}

impl CoefVector {
    pub fn new(coeffs: Vec<f64>, interval: Interval) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Empty("coefficients"));
        }
        Ok(Self { coeffs, interval })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Evaluates at `x` in the original interval.
    pub fn eval_at(&self, x: f64) -> Result<f64> {
        eval_1d(self, self.interval.to_unit(x))
    }
}

/// Evaluates `sum p_l T_l(x)` for `x` in `[-1, 1]`.
pub fn eval_1d(coeffs: &CoefVector, x: f64) -> Result<f64> {
    let x = clamp_unit(x)?;
    Ok(clenshaw(&coeffs.coeffs, x))
}

/// Clenshaw backward recurrence; `x` is assumed to lie in `[-1, 1]`.
#[inline]
pub fn clenshaw(p: &[f64], x: f64) -> f64 {
    let n = p.len();
    if n == 0 {
        return 0.0;
    }
    if n == 1 {
        return p[0];
    }
    let two_x = 2.0 * x;
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in p[1..].iter().rev() {
        let b0 = c + two_x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    p[0] + x * b1 - b2
}

/// Fills `row[l] = T_l(x)` by the three-term recurrence.
#[inline]
pub fn chebyshev_row(x: f64, row: &mut [f64]) {
    if row.is_empty() {
        return;
    }
    row[0] = 1.0;
    if row.len() > 1 {
        row[1] = x;
    }
    for l in 2..row.len() {
        row[l] = 2.0 * x * row[l - 1] - row[l - 2];
    }
}

/// Derivative coefficients with respect to the unit variable: the derivative
/// in the original variable is `2 / (b - a) * sum q_l T_l`.
pub fn derivative_coeffs(coeffs: &CoefVector) -> Result<CoefVector> {
    if coeffs.coeffs.is_empty() {
        return Err(Error::Empty("coefficients"));
    }
    Ok(CoefVector { coeffs: derivative_raw(&coeffs.coeffs), interval: coeffs.interval })
}

/// `q_{l-1} = q_{l+1} + 2 l p_l` for `l = N..1`, then `q_0` halved.
pub(crate) fn derivative_raw(p: &[f64]) -> Vec<f64> {
    let n = p.len() - 1;
    if n == 0 {
        return vec![0.0];
    }
    let mut q = vec![0.0; n + 1];
    for l in (1..=n).rev() {
        q[l - 1] = q.get(l + 1).copied().unwrap_or(0.0) + 2.0 * l as f64 * p[l];
    }
    q[0] *= 0.5;
    q.truncate(n);
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Double-prime sum over the nodes, O(N^2).
    fn direct_coeffs(samples: &[f64]) -> Vec<f64> {
        let n = samples.len() - 1;
        (0..=n)
            .map(|l| {
                let mut s = 0.0;
                for (k, &f) in samples.iter().enumerate() {
                    let w = if k == 0 || k == n { 0.5 } else { 1.0 };
                    s += w * f * (PI * (l * k) as f64 / n as f64).cos();
                }
                let c = if l == 0 || l == n { 1.0 } else { 2.0 };
                c * s / n as f64
            })
            .collect()
    }

    fn trig_eval(p: &[f64], x: f64) -> f64 {
        let t = x.acos();
        p.iter().enumerate().map(|(l, c)| c * (l as f64 * t).cos()).sum()
    }

    #[test]
    fn basis_nodes() {
        let b = make_basis(2, -1.0, 1.0).unwrap();
        assert_eq!(b.nodes(), &[1.0, 0.0, -1.0]);
        let b = make_basis(1, 0.0, 2.0).unwrap();
        assert_eq!(b.nodes(), &[2.0, 0.0]);
        let b = make_basis(4, -1.0, 1.0).unwrap();
        let h = 0.5f64.sqrt();
        for (x, e) in b.nodes().iter().zip([1.0, h, 0.0, -h, -1.0]) {
            assert!((x - e).abs() < 1e-15);
        }
        assert_eq!(make_basis(0, 1.0, 3.0).unwrap().nodes(), &[2.0]);
    }

    #[test]
    fn basis_rejects_bad_interval() {
        assert!(make_basis(3, 1.0, 1.0).is_err());
        assert!(make_basis(3, 2.0, 1.0).is_err());
        assert!(make_basis(3, f64::NAN, 1.0).is_err());
        assert!(make_basis(3, 0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn nodes_strictly_decreasing() {
        for n in 1..20 {
            let b = make_basis(n, -0.3, 2.5).unwrap();
            assert!(b.nodes().windows(2).all(|w| w[0] > w[1]));
        }
    }

    #[test]
    fn coeffs_of_constant_and_identity() {
        for n in 0..7 {
            let b = make_basis(n, -1.0, 1.0).unwrap();
            let c = b.coeffs_from_samples(&vec![1.0; n + 1]).unwrap();
            assert!((c.coeffs[0] - 1.0).abs() < 1e-15);
            assert!(c.coeffs[1..].iter().all(|v| v.abs() < 1e-15));
        }
        let b = make_basis(2, -1.0, 1.0).unwrap();
        let c = b.coeffs_from_samples(&[1.0, 0.0, -1.0]).unwrap();
        for (x, e) in c.coeffs.iter().zip([0.0, 1.0, 0.0]) {
            assert!((x - e).abs() < 1e-15);
        }
    }

    #[test]
    fn coeffs_errors() {
        let b = make_basis(3, -1.0, 1.0).unwrap();
        assert!(matches!(b.coeffs_from_samples(&[1.0; 3]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(b.coeffs_from_samples(&[1.0, f64::NAN, 0.0, 0.0]), Err(Error::NonFinite(_))));
    }

    #[test]
    fn fft_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [3usize, 8, 17] {
            let b = make_basis(n, -2.0, 5.0).unwrap();
            let s: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let c = b.coeffs_from_samples(&s).unwrap();
            for (x, e) in c.coeffs.iter().zip(direct_coeffs(&s)) {
                assert!((x - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn eval_examples() {
        let iv = Interval::new(-1.0, 1.0).unwrap();
        let c = CoefVector::new(vec![0.0, 1.0], iv).unwrap();
        assert!((eval_1d(&c, 0.3).unwrap() - 0.3).abs() < 1e-15);
        let c = CoefVector::new(vec![0.0, 0.0, 1.0], iv).unwrap();
        assert!((eval_1d(&c, 0.5).unwrap() + 0.5).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p: Vec<f64> = (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c = CoefVector::new(p.clone(), iv).unwrap();
        assert!((eval_1d(&c, 0.7).unwrap() - trig_eval(&p, 0.7)).abs() < 1e-13);
    }

    #[test]
    fn eval_clamps_marginal_points() {
        let iv = Interval::new(-1.0, 1.0).unwrap();
        let c = CoefVector::new(vec![0.0, 1.0], iv).unwrap();
        assert_eq!(eval_1d(&c, 1.0 + 1e-13).unwrap(), 1.0);
        assert!(matches!(eval_1d(&c, 1.0 + 1e-9), Err(Error::OutOfDomain { .. })));
        assert!(eval_1d(&c, f64::NAN).is_err());
    }

    #[test]
    fn derivative_examples() {
        let iv = Interval::new(-1.0, 1.0).unwrap();
        let d = derivative_coeffs(&CoefVector::new(vec![3.0, 0.0, 0.0, 0.0], iv).unwrap()).unwrap();
        assert_eq!(d.coeffs.len(), 3);
        assert!(d.coeffs.iter().all(|v| *v == 0.0));

        let t2 = CoefVector::new(vec![0.0, 0.0, 1.0], iv).unwrap();
        let d = derivative_coeffs(&t2).unwrap();
        assert!((d.coeffs[1] * 2.0 / iv.width() - 4.0).abs() < 1e-15);
        assert!(d.coeffs[0].abs() < 1e-15);
        for x in [-0.8, -0.4, 0.0, 0.4, 0.8] {
            let fd = (clenshaw(&t2.coeffs, x + 1e-6) - clenshaw(&t2.coeffs, x - 1e-6)) / 2e-6;
            assert!((clenshaw(&d.coeffs, x) - fd).abs() < 1e-6);
        }
        assert!(CoefVector::new(vec![], iv).is_err());
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let b = make_basis(12, 0.0, 3.0).unwrap();
        let p: Vec<f64> = (0..13).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c = CoefVector::new(p, b.interval()).unwrap();
        let d = derivative_coeffs(&c).unwrap();
        let step = 1e-5;
        for k in 1..=11 {
            let x = 3.0 * k as f64 / 12.0;
            let fd = (c.eval_at(x + step).unwrap() - c.eval_at(x - step).unwrap()) / (2.0 * step);
            let an = 2.0 / 3.0 * d.eval_at(x).unwrap();
            assert!((an - fd).abs() <= 1e-5 * an.abs().max(1.0), "x={x} {an} {fd}");
        }
    }

    #[test]
    fn spectral_convergence_exp() {
        let err = |n: usize| {
            let b = make_basis(n, -1.0, 1.0).unwrap();
            let s: Vec<f64> = b.nodes().iter().map(|x| x.exp()).collect();
            let c = b.coeffs_from_samples(&s).unwrap();
            (0..1000)
                .map(|i| {
                    let x = -1.0 + 2.0 * i as f64 / 999.0;
                    (clenshaw(&c.coeffs, x) - x.exp()).abs()
                })
                .fold(0.0, f64::max)
        };
        let mut n = 4;
        while n + 2 <= 12 {
            assert!(err(n + 2) * 10.0 <= err(n), "n={n}");
            n += 2;
        }
        // beyond N = 12 the error is at round-off level
        assert!(err(14) < 1e-13 && err(16) < 1e-13);
    }

    proptest! {
        #[test]
        fn interpolation_is_exact_for_polynomials(
            n in 1usize..16,
            seed in any::<u64>(),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b = make_basis(n, -1.0, 1.0).unwrap();
            let s: Vec<f64> = b.nodes().iter().map(|&x| trig_eval(&p, x)).collect();
            let c = b.coeffs_from_samples(&s).unwrap();
            for _ in 0..100 {
                let x: f64 = rng.gen_range(-1.0..=1.0);
                prop_assert!((eval_1d(&c, x).unwrap() - trig_eval(&p, x)).abs() < 1e-12);
            }
            for (k, &t) in b.unit_nodes().iter().enumerate() {
                prop_assert!((eval_1d(&c, t).unwrap() - s[k]).abs() < 1e-12);
            }
        }

        #[test]
        fn fft_direct_equivalence(n in 1usize..=64, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b = make_basis(n, -1.0, 1.0).unwrap();
            let c = b.coeffs_from_samples(&s).unwrap();
            for (x, e) in c.coeffs.iter().zip(direct_coeffs(&s)) {
                prop_assert!((x - e).abs() < 1e-12);
            }
        }
    }
}
