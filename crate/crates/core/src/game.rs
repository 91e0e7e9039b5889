//! The discrete-space J-player transboundary pollution game with
//! linear-quadratic payoffs.

use crate::cheb1d::{make_basis, ChebBasis1D};
use crate::error::{Error, Result};

/// Model and numerical parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSpec {
    /// Boundary coefficients, `k[i][j]` for players `i, j`. Off-diagonals are
    /// non-negative; a negative row sum is a leak to the outside.
    pub k: Vec<Vec<f64>>,
    pub mass: Vec<f64>,
    pub beta: Vec<f64>,
    pub phi: Vec<f64>,
    pub a: Vec<f64>,
    pub c: Vec<f64>,
    pub rho: f64,
    pub h: f64,
    pub p_max: f64,
    pub u_max: f64,
    /// State-space degrees per player.
    pub np: Vec<usize>,
    /// Control-space degrees per player.
    pub nu: Vec<usize>,
    pub tol: f64,
    pub max_iters: usize,
}

impl GameSpec {
    pub fn players(&self) -> usize {
        self.a.len()
    }

    /// `1 - rho h`.
    pub fn discount(&self) -> f64 {
        1.0 - self.rho * self.h
    }

    pub fn validate(&self) -> Result<()> {
        let j = self.players();
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if j < 2 {
            return bad(format!("need at least 2 players, got {j}"));
        }
        for (name, v) in [("mass", &self.mass), ("beta", &self.beta), ("phi", &self.phi), ("c", &self.c)] {
            if v.len() != j {
                return bad(format!("{name} has {} entries, expected {j}", v.len()));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return bad(format!("{name} is not finite"));
            }
        }
        if self.np.len() != j || self.nu.len() != j {
            return bad("degree vectors must have one entry per player".into());
        }
        if self.k.len() != j || self.k.iter().any(|row| row.len() != j) {
            return bad(format!("K must be {j}x{j}"));
        }
        for (i, row) in self.k.iter().enumerate() {
            for (l, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return bad("K is not finite".into());
                }
                if i != l && v < 0.0 {
                    return bad(format!("off-diagonal k[{i}][{l}] = {v} is negative"));
                }
            }
        }
        if self.mass.iter().any(|&m| m <= 0.0) {
            return bad("masses must be positive".into());
        }
        if self.phi.iter().any(|&v| v < 0.0) || self.c.iter().any(|&v| v < 0.0) {
            return bad("phi and c must be non-negative".into());
        }
        if self.a.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
            return bad("A must be positive".into());
        }
        if !(self.rho.is_finite() && self.rho > 0.0) || !(self.h.is_finite() && self.h > 0.0) {
            return bad("rho and h must be positive".into());
        }
        let delta = self.discount();
        if !(delta > 0.0 && delta < 1.0) {
            return bad(format!("discount factor 1 - rho h = {delta} must lie in (0, 1)"));
        }
        if !(self.p_max.is_finite() && self.p_max > 0.0) || !(self.u_max.is_finite() && self.u_max > 0.0) {
            return bad("P_M and U_M must be positive".into());
        }
        let a_max = self.a.iter().copied().fold(f64::MIN, f64::max);
        if self.u_max < a_max {
            return bad(format!("U_M = {} is below max A = {a_max}", self.u_max));
        }
        if self.np.iter().chain(&self.nu).any(|&n| n == 0) {
            return bad("degrees must be at least 1".into());
        }
        if !(self.tol.is_finite() && self.tol > 0.0) || self.max_iters == 0 {
            return bad("TOL and max_iters must be positive".into());
        }
        Ok(())
    }
}

/// Tensor-product Chebyshev nodes of the state box `[0, P_M]^J`.
#[derive(Debug, Clone)]
pub struct StateGrid {
    pub bases: Vec<ChebBasis1D>,
    /// Node tuples, dimension 1 fastest.
    pub nodes: Vec<Vec<f64>>,
}

impl StateGrid {
    pub fn new(spec: &GameSpec) -> Result<Self> {
        let bases = spec.np.iter().map(|&n| make_basis(n, 0.0, spec.p_max)).collect::<Result<Vec<_>>>()?;
        let nodes = tensor_nodes(&bases);
        Ok(Self { bases, nodes })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.bases.iter().map(ChebBasis1D::len).collect()
    }
}

/// All node tuples of a tensor-product basis in dimension-1-fastest order.
pub fn tensor_nodes(bases: &[ChebBasis1D]) -> Vec<Vec<f64>> {
    let total: usize = bases.iter().map(ChebBasis1D::len).product();
    (0..total)
        .map(|mut flat| {
            bases
                .iter()
                .map(|b| {
                    let k = flat % b.len();
                    flat /= b.len();
                    b.nodes()[k]
                })
                .collect()
        })
        .collect()
}

fn check_finite(v: &[f64], what: &'static str) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite(what));
    }
    Ok(())
}

/// Component `i` of the stock dynamics.
#[inline]
pub(crate) fn dynamics_component(spec: &GameSpec, i: usize, p: &[f64], u_i: f64) -> f64 {
    let diffusion: f64 = spec.k[i].iter().zip(p).map(|(k, x)| k * x).sum();
    diffusion / spec.mass[i] - spec.c[i] * p[i] + spec.beta[i] * u_i
}

/// `g_i(p, u) = (K p)_i / m_i - c_i p_i + beta_i u_i`.
///
/// With zero row sums `(K p)_i = sum_{j != i} k_ij (p_j - p_i)`, so stock
/// flows from the more polluted region to the less polluted one.
pub fn dynamics(spec: &GameSpec, p: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    let j = spec.players();
    if p.len() != j || u.len() != j {
        return Err(Error::LengthMismatch { expected: j, got: p.len().min(u.len()) });
    }
    check_finite(p, "state")?;
    check_finite(u, "control")?;
    Ok((0..j).map(|i| dynamics_component(spec, i, p, u[i])).collect())
}

/// `u (A_i - u / 2) - phi_i p_i^2 / 2`.
#[inline]
pub fn stage_payoff(spec: &GameSpec, i: usize, p_i: f64, u_i: f64) -> f64 {
    u_i * (spec.a[i] - 0.5 * u_i) - 0.5 * spec.phi[i] * p_i * p_i
}

/// One explicit Euler step, clamped to the state box.
pub fn step(spec: &GameSpec, p: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    let g = dynamics(spec, p, u)?;
    Ok(p.iter().zip(g).map(|(x, gx)| (x + spec.h * gx).clamp(0.0, spec.p_max)).collect())
}

/// States and controls along a trajectory, `states[n]` paired with
/// `controls[n]` at time `times[n]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimePath {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub controls: Vec<Vec<f64>>,
}

impl TimePath {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// `h sum_{n=1}^{N_T} delta^n G_i(u_{i,n}, p_{i,n})` per player, where the
/// first path entry is period `n = 1`.
pub fn discounted_payoff(spec: &GameSpec, path: &TimePath, horizon: usize) -> Result<Vec<f64>> {
    if horizon > path.len() {
        return Err(Error::HorizonTooLong { horizon, len: path.len() });
    }
    let delta = spec.discount();
    let mut total = vec![0.0; spec.players()];
    let mut weight = 1.0;
    for (p, u) in path.states.iter().zip(&path.controls).take(horizon) {
        weight *= delta;
        for (i, t) in total.iter_mut().enumerate() {
            *t += weight * stage_payoff(spec, i, p[i], u[i]);
        }
    }
    Ok(total.into_iter().map(|t| spec.h * t).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::example1;
    use proptest::prelude::*;

    #[test]
    fn dynamics_examples() {
        let s = example1();
        assert_eq!(dynamics(&s, &[0.0, 0.0], &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(dynamics(&s, &[1.0, 1.0], &[0.0, 0.0]).unwrap(), vec![-0.5, -0.5]);
        assert_eq!(dynamics(&s, &[1.0, 0.0], &[0.0, 0.0]).unwrap(), vec![-1.5, 1.0]);
        assert!(dynamics(&s, &[f64::NAN, 0.0], &[0.0, 0.0]).is_err());
        assert!(dynamics(&s, &[0.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn payoff_examples() {
        let s = example1();
        assert_eq!(stage_payoff(&s, 0, 0.0, 0.0), 0.0);
        assert_eq!(stage_payoff(&s, 0, 0.0, 0.5), 0.125);
        assert_eq!(stage_payoff(&s, 1, 1.0, 0.0), -0.5);
    }

    #[test]
    fn step_examples() {
        let mut s = example1();
        s.h = 0.01;
        s.p_max = 2.0;
        assert_eq!(step(&s, &[0.0, 0.0], &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        let p = step(&s, &[1.0, 1.0], &[0.0, 0.0]).unwrap();
        assert!((p[0] - 0.995).abs() < 1e-15 && (p[1] - 0.995).abs() < 1e-15);
        s.h = 0.0;
        assert_eq!(step(&s, &[0.3, 0.6], &[0.2, 0.1]).unwrap(), vec![0.3, 0.6]);
    }

    #[test]
    fn step_clamps_to_box() {
        let mut s = example1();
        s.h = 0.5;
        let p = step(&s, &[s.p_max, s.p_max], &[s.u_max, s.u_max]).unwrap();
        assert!(p.iter().all(|&x| x <= s.p_max));
    }

    #[test]
    fn discounted_payoff_examples() {
        let s = example1();
        let zero = TimePath { times: vec![0.0; 5], states: vec![vec![0.0; 2]; 5], controls: vec![vec![0.0; 2]; 5] };
        assert_eq!(discounted_payoff(&s, &zero, 5).unwrap(), vec![0.0, 0.0]);
        assert!(matches!(discounted_payoff(&s, &zero, 6), Err(Error::HorizonTooLong { .. })));

        let one = TimePath { times: vec![0.0], states: vec![vec![0.2, 0.1]], controls: vec![vec![0.3, 0.4]] };
        let w = discounted_payoff(&s, &one, 1).unwrap();
        let d = s.discount();
        assert!((w[0] - s.h * d * stage_payoff(&s, 0, 0.2, 0.3)).abs() < 1e-18);
        assert!((w[1] - s.h * d * stage_payoff(&s, 1, 0.1, 0.4)).abs() < 1e-18);

        let n = 2000;
        let path = TimePath { times: vec![0.0; n], states: vec![vec![0.0; 2]; n], controls: vec![vec![0.5; 2]; n] };
        let w = discounted_payoff(&s, &path, n).unwrap();
        let limit = s.h * d / (1.0 - d) * 0.125;
        assert!(w[0] < limit);
        let finite = s.h * d * (1.0 - d.powi(n as i32)) / (1.0 - d) * 0.125;
        assert!((w[0] - finite).abs() < 1e-12);
    }

    #[test]
    fn spec_validation() {
        let s = example1();
        assert!(s.validate().is_ok());
        let mut t = s.clone();
        t.h = 20.0;
        assert!(t.validate().is_err());
        let mut t = s.clone();
        t.u_max = 0.1;
        assert!(t.validate().is_err());
        let mut t = s.clone();
        t.k[0][1] = -1.0;
        assert!(t.validate().is_err());
        let mut t = s.clone();
        t.np = vec![3];
        assert!(t.validate().is_err());
        let mut t = s;
        t.a = vec![0.5];
        assert!(t.validate().is_err());
    }

    #[test]
    fn grid_enumeration() {
        let mut s = example1();
        s.np = vec![2, 3];
        let g = StateGrid::new(&s).unwrap();
        assert_eq!(g.len(), 12);
        assert_eq!(g.nodes[0], vec![s.p_max, s.p_max]);
        assert_eq!(g.nodes[1], vec![g.bases[0].nodes()[1], s.p_max]);
        assert_eq!(g.nodes[3], vec![s.p_max, g.bases[1].nodes()[1]]);
        assert!(g.nodes.iter().flatten().all(|&x| (0.0..=s.p_max).contains(&x)));
    }

    proptest! {
        #[test]
        fn mass_conservation(p in proptest::collection::vec(0.0f64..1.0, 2)) {
            let mut s = example1();
            s.c = vec![0.0; 2];
            let g = dynamics(&s, &p, &[0.0, 0.0]).unwrap();
            let total: f64 = g.iter().zip(&s.mass).map(|(g, m)| g * m).sum();
            prop_assert!(total.abs() < 1e-15);
        }

        #[test]
        fn decay_is_monotone(p in proptest::collection::vec(0.0f64..0.7, 2)) {
            let mut s = example1();
            s.h = 0.01;
            let next = step(&s, &p, &[0.0, 0.0]).unwrap();
            let before: f64 = p.iter().zip(&s.mass).map(|(x, m)| x * m).sum();
            let after: f64 = next.iter().zip(&s.mass).map(|(x, m)| x * m).sum();
            prop_assert!(after <= before + 1e-15);
        }

        #[test]
        fn payoff_concave_in_u_and_decreasing_in_p(u in 0.0f64..1.0, p in 0.0f64..1.0, d in 1e-3f64..0.1) {
            let s = example1();
            let second = stage_payoff(&s, 0, p, u + d) - 2.0 * stage_payoff(&s, 0, p, u) + stage_payoff(&s, 0, p, u - d);
            prop_assert!(second < 0.0);
            prop_assert!(stage_payoff(&s, 0, p + d, u) <= stage_payoff(&s, 0, p, u));
        }

        #[test]
        fn affine_in_control(
            p in proptest::collection::vec(0.0f64..1.0, 2),
            u in proptest::collection::vec(0.0f64..0.5, 2),
            lambda in 0.0f64..0.5,
            i in 0usize..2,
        ) {
            let s = example1();
            let mut v = u.clone();
            v[i] += lambda;
            let g0 = dynamics(&s, &p, &u).unwrap();
            let g1 = dynamics(&s, &p, &v).unwrap();
            for l in 0..2 {
                let expected = if l == i { lambda * s.beta[i] / s.mass[i] } else { 0.0 };
                prop_assert!((g1[l] - g0[l] - expected).abs() < 1e-15);
            }
        }
    }
}
