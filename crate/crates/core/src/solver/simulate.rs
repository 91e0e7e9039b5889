//! Forward simulation under the equilibrium feedback.

use super::PolicyField;
use crate::chebnd::{eval_full, tensor_coeffs, CoefTensor};
use crate::error::{Error, Result};
use crate::game::{step, GameSpec, StateGrid, TimePath};

/// Fits each player's node controls to a state-space interpolant.
pub fn policy_interpolants(grid: &StateGrid, policy: &PolicyField) -> Result<Vec<CoefTensor>> {
    policy.controls.iter().map(|u| tensor_coeffs(u, &grid.bases)).collect()
}

/// Simulates `steps` Euler steps from `p0`. The path holds `steps + 1`
/// entries at times `n h`, `n = 0..=steps`, with controls cut to `[0, U_M]`.
pub fn simulate(spec: &GameSpec, policy: &[CoefTensor], p0: &[f64], steps: usize) -> Result<TimePath> {
    let j = spec.players();
    if policy.len() != j {
        return Err(Error::LengthMismatch { expected: j, got: policy.len() });
    }
    if p0.len() != j {
        return Err(Error::LengthMismatch { expected: j, got: p0.len() });
    }
    if let Some(&x) = p0.iter().find(|&&x| !(0.0..=spec.p_max).contains(&x)) {
        return Err(Error::OutOfDomain { value: x });
    }
    let mut path = TimePath::default();
    let mut p = p0.to_vec();
    for n in 0..=steps {
        let unit: Vec<f64> = p.iter().map(|&x| 2.0 * x / spec.p_max - 1.0).collect();
        let u = policy.iter().map(|t| Ok(eval_full(t, &unit)?.clamp(0.0, spec.u_max))).collect::<Result<Vec<f64>>>()?;
        let next = if n < steps { Some(step(spec, &p, &u)?) } else { None };
        path.times.push(n as f64 * spec.h);
        path.states.push(std::mem::take(&mut p));
        path.controls.push(u);
        match next {
            Some(x) => p = x,
            None => break,
        }
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::example1;

    #[test]
    fn constant_policy_path() {
        let mut spec = example1();
        spec.np = vec![2, 2];
        let grid = StateGrid::new(&spec).unwrap();
        let policy = PolicyField { controls: vec![vec![0.25; grid.len()], vec![0.1; grid.len()]] };
        let tensors = policy_interpolants(&grid, &policy).unwrap();
        let path = simulate(&spec, &tensors, &[0.2, 0.4], 3).unwrap();
        assert_eq!(path.len(), 4);
        assert_eq!(path.times[3], 3.0 * spec.h);
        assert_eq!(path.states[0], vec![0.2, 0.4]);
        for u in &path.controls {
            assert!((u[0] - 0.25).abs() < 1e-14 && (u[1] - 0.1).abs() < 1e-14);
        }
        let s1 = step(&spec, &[0.2, 0.4], &path.controls[0]).unwrap();
        assert_eq!(path.states[1], s1);
    }

    #[test]
    fn rejects_bad_start() {
        let spec = example1();
        let grid = StateGrid::new(&spec).unwrap();
        let policy = PolicyField { controls: vec![vec![0.0; grid.len()]; 2] };
        let tensors = policy_interpolants(&grid, &policy).unwrap();
        assert!(simulate(&spec, &tensors, &[0.2], 1).is_err());
        assert!(simulate(&spec, &tensors, &[0.2, 5.0], 1).is_err());
    }
}
