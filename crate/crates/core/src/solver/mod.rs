//! Value-function iteration for the feedback Nash equilibrium.

pub mod blocks;
pub mod newton;
pub mod simulate;
pub mod sweep;

use std::time::{Duration, Instant};

use crate::chebnd::{tensor_coeffs, CoefTensor};
use crate::error::{Error, Result};
use crate::game::{GameSpec, StateGrid};
pub use blocks::{divisors, partition, BlockPlan};
pub use newton::newton_maximize;
pub use simulate::{policy_interpolants, simulate};
pub use sweep::{bellman_sweep, precompute_dynamics_stack, SweepContext, SweepStats};

/// Fraction of clamped Bellman targets above which a warning is logged.
pub const CLAMP_WARN_FRACTION: f64 = 0.01;

/// How the blocks of a sweep are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon work stealing over blocks. Falls back to sequential when the
    /// crate is built without the `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Runs `f` for every block and returns the results in block order.
    pub(crate) fn map_blocks<T, F>(self, blocks: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> Result<T> + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..blocks).into_par_iter().map(f).collect()
            }
            _ => (0..blocks).map(f).collect(),
        }
    }
}

/// Runs `f` inside a dedicated pool of `threads` workers.
#[cfg(feature = "parallel")]
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| Error::ThreadPool(e.to_string()))?;
    Ok(pool.install(f))
}

/// Without the `parallel` feature the thread count is ignored.
#[cfg(not(feature = "parallel"))]
pub fn with_threads<T: Send>(_threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    Ok(f())
}

/// Node values `V_i(p_j)` and their interpolants, one per player.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueField {
    pub values: Vec<Vec<f64>>,
    pub coeffs: Vec<CoefTensor>,
}

impl ValueField {
    pub fn from_values(grid: &StateGrid, values: Vec<Vec<f64>>) -> Result<Self> {
        let coeffs = values.iter().map(|v| tensor_coeffs(v, &grid.bases)).collect::<Result<_>>()?;
        Ok(Self { values, coeffs })
    }

    pub fn zeros(grid: &StateGrid, players: usize) -> Result<Self> {
        Self::from_values(grid, vec![vec![0.0; grid.len()]; players])
    }
}

/// Equilibrium controls `u_i(p_j)` at the state nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyField {
    pub controls: Vec<Vec<f64>>,
}

impl PolicyField {
    /// Every player emits `A_i`, cut to the control box.
    pub fn myopic(spec: &GameSpec, grid: &StateGrid) -> Self {
        let controls = spec.a.iter().map(|&a| vec![a.clamp(0.0, spec.u_max); grid.len()]).collect();
        Self { controls }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimings {
    pub precompute: Duration,
    pub sweeps: Duration,
    pub total: Duration,
}

#[derive(Debug, Clone)]
pub struct EquilibriumResult {
    pub converged: bool,
    pub iterations: usize,
    pub grid: StateGrid,
    pub values: ValueField,
    pub policy: PolicyField,
    /// Per iteration, the largest node change of each player's value.
    pub history: Vec<Vec<f64>>,
    pub timings: PhaseTimings,
    /// Fraction of clamped Bellman targets in the final sweep.
    pub clamped_fraction: f64,
}

impl EquilibriumResult {
    /// Largest value change of any player in the last sweep.
    pub fn last_change(&self) -> Option<f64> {
        self.history.last().map(|c| c.iter().copied().fold(0.0, f64::max))
    }
}

/// Solves with the default scheduling.
pub fn solve(spec: &GameSpec, plan: &BlockPlan, init: Option<(ValueField, PolicyField)>) -> Result<EquilibriumResult> {
    solve_with(spec, plan, init, Execution::default())
}

/// Iterates Bellman sweeps from `init` (zero values and myopic controls if
/// `None`) until every player's node values move by less than `tol` in
/// sup-norm, or `max_iters` sweeps have run.
pub fn solve_with(
    spec: &GameSpec,
    plan: &BlockPlan,
    init: Option<(ValueField, PolicyField)>,
    exec: Execution,
) -> Result<EquilibriumResult> {
    spec.validate()?;
    let start = Instant::now();
    let grid = StateGrid::new(spec)?;
    if plan.nodes() != grid.len() {
        return Err(Error::NotADivisor { nodes: grid.len(), blocks: plan.blocks() });
    }
    let stacks = precompute_dynamics_stack(spec, &grid)?;
    let ctx = SweepContext::new(spec, grid.clone(), &stacks, *plan)?;
    let precompute = start.elapsed();

    let (mut values, mut policy) = match init {
        Some(pair) => pair,
        None => (ValueField::zeros(&grid, spec.players())?, PolicyField::myopic(spec, &grid)),
    };
    let mut history = Vec::new();
    let mut converged = false;
    let mut clamped_fraction = 0.0;
    let sweep_start = Instant::now();
    while history.len() < spec.max_iters {
        let (next_values, next_policy, stats) = bellman_sweep(&ctx, &values, &policy, exec)?;
        let changes: Vec<f64> = values
            .values
            .iter()
            .zip(&next_values.values)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
            .collect();
        let change = changes.iter().copied().fold(0.0, f64::max);
        if !change.is_finite() {
            return Err(Error::NonFinite("value iteration"));
        }
        history.push(changes);
        clamped_fraction = stats.clamped_fraction();
        values = next_values;
        policy = next_policy;
        log::debug!("iteration {} change {:e}", history.len(), change);
        if change < spec.tol {
            converged = true;
            break;
        }
    }
    let sweeps = sweep_start.elapsed();
    if clamped_fraction > CLAMP_WARN_FRACTION {
        log::warn!("{:.1}% of Bellman target states were clamped to the state box", 100.0 * clamped_fraction);
    }
    if !converged {
        log::warn!("no convergence after {} iterations", history.len());
    }
    Ok(EquilibriumResult {
        converged,
        iterations: history.len(),
        grid,
        values,
        policy,
        history,
        timings: PhaseTimings { precompute, sweeps, total: start.elapsed() },
        clamped_fraction,
    })
}
