//! Exact linear-quadratic feedback equilibrium, valid where no control is
//! pushed onto its lower bound, and the policy error metric.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::game::{GameSpec, StateGrid};
use crate::solver::PolicyField;

const COEF_TOL: f64 = 1e-12;
const MAX_ITERS: usize = 1_000_000;

/// `V_i(p) = p' Q_i p + b_i' p + d_i` and `u_i(p) = max(0, e_i + f_i . p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LQFeedback {
    pub q: Vec<DMatrix<f64>>,
    pub b: Vec<DVector<f64>>,
    pub d: Vec<f64>,
    pub e: DVector<f64>,
    /// Row `i` is `f_i`.
    pub f: DMatrix<f64>,
    pub iterations: usize,
}

/// Linear parts of the unclamped Euler step `p' = F p + B u`.
fn transition(spec: &GameSpec) -> (DMatrix<f64>, DMatrix<f64>) {
    let j = spec.players();
    let f = DMatrix::from_fn(j, j, |r, c| {
        let diag = if r == c { 1.0 - spec.h * spec.c[r] } else { 0.0 };
        diag + spec.h * spec.k[r][c] / spec.mass[r]
    });
    let b = DMatrix::from_fn(j, j, |r, c| if r == c { spec.h * spec.beta[r] } else { 0.0 });
    (f, b)
}

/// Stage Nash controls `u = e + f p` given continuation values `(q, b)`.
fn stage_feedback(
    spec: &GameSpec,
    fm: &DMatrix<f64>,
    bm: &DMatrix<f64>,
    q: &[DMatrix<f64>],
    b: &[DVector<f64>],
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let j = spec.players();
    let mut l = DMatrix::identity(j, j);
    let mut rhs_c = DVector::zeros(j);
    let mut rhs_p = DMatrix::zeros(j, j);
    for i in 0..j {
        let qb = &q[i] * bm;
        let qf = &q[i] * fm;
        for k in 0..j {
            l[(i, k)] -= 2.0 * spec.beta[i] * qb[(i, k)];
            rhs_p[(i, k)] = 2.0 * spec.beta[i] * qf[(i, k)];
        }
        rhs_c[i] = spec.a[i] + spec.beta[i] * b[i][i];
    }
    let lu = l.lu();
    let e = lu.solve(&rhs_c).ok_or(Error::OracleSingular)?;
    let f = lu.solve(&rhs_p).ok_or(Error::OracleSingular)?;
    Ok((e, f))
}

struct Update {
    q: Vec<DMatrix<f64>>,
    b: Vec<DVector<f64>>,
    /// Per-period constant `c_i` with `d_i' = delta (c_i + d_i)`.
    constant: Vec<f64>,
    e: DVector<f64>,
    f: DMatrix<f64>,
}

/// One exact Bellman update of quadratic value functions.
fn bellman_update(
    spec: &GameSpec,
    fm: &DMatrix<f64>,
    bm: &DMatrix<f64>,
    q: &[DMatrix<f64>],
    b: &[DVector<f64>],
) -> Result<Update> {
    let j = spec.players();
    let delta = spec.discount();
    let h = spec.h;
    let (e, f) = stage_feedback(spec, fm, bm, q, b)?;
    let fc = fm + bm * &f;
    let g0 = bm * &e;
    let mut q_next = Vec::with_capacity(j);
    let mut b_next = Vec::with_capacity(j);
    let mut constant = Vec::with_capacity(j);
    for i in 0..j {
        let fi = f.row(i).transpose();
        let mut stage_q = -0.5 * &fi * fi.transpose();
        stage_q[(i, i)] -= 0.5 * spec.phi[i];
        let qi = delta * (h * stage_q + fc.transpose() * &q[i] * &fc);
        q_next.push(0.5 * (&qi + qi.transpose()));
        let bi = delta * (h * (spec.a[i] - e[i]) * &fi + 2.0 * fc.transpose() * (&q[i] * &g0) + fc.transpose() * &b[i]);
        b_next.push(bi);
        let c = h * (spec.a[i] * e[i] - 0.5 * e[i] * e[i]) + g0.dot(&(&q[i] * &g0)) + b[i].dot(&g0);
        constant.push(c);
    }
    Ok(Update { q: q_next, b: b_next, constant, e, f })
}

/// Iterates exact quadratic Bellman updates from zero until `Q` and `b`
/// move by less than `1e-12`, then sets `d` to its fixed point.
pub fn lq_solve(spec: &GameSpec) -> Result<LQFeedback> {
    spec.validate()?;
    let j = spec.players();
    let (fm, bm) = transition(spec);
    let mut q = vec![DMatrix::zeros(j, j); j];
    let mut b = vec![DVector::zeros(j); j];
    for it in 1..=MAX_ITERS {
        let up = bellman_update(spec, &fm, &bm, &q, &b)?;
        let change = q
            .iter()
            .zip(&up.q)
            .map(|(x, y)| (x - y).amax())
            .chain(b.iter().zip(&up.b).map(|(x, y)| (x - y).amax()))
            .fold(0.0, f64::max);
        if !change.is_finite() {
            return Err(Error::NonFinite("oracle iteration"));
        }
        q = up.q;
        b = up.b;
        if change < COEF_TOL {
            // final pass so e, f and the constants belong to the converged (q, b)
            let up = bellman_update(spec, &fm, &bm, &q, &b)?;
            let delta = spec.discount();
            let d = up.constant.iter().map(|c| delta * c / (1.0 - delta)).collect();
            return Ok(LQFeedback { q, b, d, e: up.e, f: up.f, iterations: it });
        }
    }
    Err(Error::OracleNotConverged(MAX_ITERS))
}

impl LQFeedback {
    pub fn players(&self) -> usize {
        self.e.len()
    }

    /// Unclamped `e_i + f_i . p`.
    pub fn affine(&self, i: usize, p: &[f64]) -> f64 {
        self.e[i] + self.f.row(i).iter().zip(p).map(|(f, x)| f * x).sum::<f64>()
    }

    /// `max(0, e_i + f_i . p)` for every player.
    pub fn feedback(&self, p: &[f64]) -> Vec<f64> {
        (0..self.players()).map(|i| self.affine(i, p).max(0.0)).collect()
    }

    pub fn value(&self, i: usize, p: &[f64]) -> f64 {
        let p = DVector::from_column_slice(p);
        p.dot(&(&self.q[i] * &p)) + self.b[i].dot(&p) + self.d[i]
    }

    /// Fraction of grid nodes where some player's affine feedback is negative.
    pub fn negative_fraction(&self, grid: &StateGrid) -> f64 {
        let bad = grid.nodes.iter().filter(|p| (0..self.players()).any(|i| self.affine(i, p) < 0.0)).count();
        bad as f64 / grid.len() as f64
    }

    /// Largest coefficient change under one more exact update.
    pub fn residual(&self, spec: &GameSpec) -> Result<f64> {
        let (fm, bm) = transition(spec);
        let up = bellman_update(spec, &fm, &bm, &self.q, &self.b)?;
        let delta = spec.discount();
        let mut r: f64 = 0.0;
        for i in 0..self.players() {
            r = r.max((&up.q[i] - &self.q[i]).amax());
            r = r.max((&up.b[i] - &self.b[i]).amax());
            r = r.max((delta * (up.constant[i] + self.d[i]) - self.d[i]).abs());
        }
        Ok(r)
    }
}

/// `(1 / N_P) sqrt(sum (u* - u)^2)` over every node and player, with `N_P`
/// the number of state nodes.
pub fn policy_error(numerical: &PolicyField, oracle: &LQFeedback, grid: &StateGrid) -> Result<f64> {
    let j = oracle.players();
    if numerical.controls.len() != j || numerical.controls.iter().any(|u| u.len() != grid.len()) {
        return Err(Error::ShapeMismatch("policy does not match the oracle grid".into()));
    }
    let fraction = oracle.negative_fraction(grid);
    if fraction > 0.0 {
        return Err(Error::ConstraintActive { fraction });
    }
    let mut sum = 0.0;
    for (n, p) in grid.nodes.iter().enumerate() {
        for i in 0..j {
            let diff = oracle.affine(i, p) - numerical.controls[i][n];
            sum += diff * diff;
        }
    }
    Ok(sum.sqrt() / grid.len() as f64)
}
