//! One collocation Bellman sweep over all players and state nodes.

use rustfft::num_complex::Complex;

use super::blocks::BlockPlan;
use super::newton::maximize_unit;
use super::{Execution, PolicyField, ValueField};
use crate::cheb1d::{make_basis, ChebBasis1D};
use crate::chebnd::{eval_axis, eval_diagonal_batch, make_gather_index, tensor_coeffs, GatherIndex, TensorStack};
use crate::error::{Error, Result};
use crate::game::{dynamics_component, stage_payoff, tensor_nodes, GameSpec, StateGrid};

/// Control-space interpolants of the dynamics, one stack per component `i`
/// holding `g_i(p_j, .)` for every state node `p_j`.
pub fn precompute_dynamics_stack(spec: &GameSpec, grid: &StateGrid) -> Result<Vec<TensorStack>> {
    let bases = control_bases(spec)?;
    let controls = tensor_nodes(&bases);
    let mut stacks = Vec::with_capacity(spec.players());
    let mut samples = vec![0.0; controls.len()];
    for i in 0..spec.players() {
        let mut members = Vec::with_capacity(grid.len());
        for p in &grid.nodes {
            for (s, u) in samples.iter_mut().zip(&controls) {
                *s = dynamics_component(spec, i, p, u[i]);
            }
            members.push(tensor_coeffs(&samples, &bases)?);
        }
        stacks.push(TensorStack::from_members(&members)?);
    }
    Ok(stacks)
}

pub(crate) fn control_bases(spec: &GameSpec) -> Result<Vec<ChebBasis1D>> {
    spec.nu.iter().map(|&n| make_basis(n, 0.0, spec.u_max)).collect()
}

/// Counts of Bellman-update target states that left the state box.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SweepStats {
    pub targets: usize,
    pub clamped: usize,
}

impl SweepStats {
    pub fn clamped_fraction(&self) -> f64 {
        if self.targets == 0 {
            0.0
        } else {
            self.clamped as f64 / self.targets as f64
        }
    }
}

/// Everything a sweep needs that stays fixed across iterations: the model,
/// the grids, the dynamics stacks split into blocks, and the location indexes
/// for the block layout.
pub struct SweepContext {
    pub spec: GameSpec,
    pub grid: StateGrid,
    pub plan: BlockPlan,
    control_bases: Vec<ChebBasis1D>,
    /// `[block][component]`.
    block_stacks: Vec<Vec<TensorStack>>,
    /// `[player][axis]`, `None` on the player's own control axis.
    dynamics_gathers: Vec<Vec<Option<GatherIndex>>>,
    /// `[player][axis - 1]` for the value interpolant.
    value_gathers: Vec<Vec<GatherIndex>>,
}

impl SweepContext {
    pub fn new(spec: &GameSpec, grid: StateGrid, stacks: &[TensorStack], plan: BlockPlan) -> Result<Self> {
        if plan.nodes() != grid.len() {
            return Err(Error::NotADivisor { nodes: grid.len(), blocks: plan.blocks() });
        }
        let j = spec.players();
        if stacks.len() != j || stacks.iter().any(|s| s.count != grid.len()) {
            return Err(Error::ShapeMismatch("dynamics stacks do not match the grid".into()));
        }
        let control_bases = control_bases(spec)?;
        let nf = plan.block_len();
        let block_stacks =
            plan.ranges().map(|r| stacks.iter().map(|s| s.slice_members(r.start, r.len())).collect()).collect();

        let ushape: Vec<usize> = control_bases.iter().map(ChebBasis1D::len).collect();
        let pshape = grid.shape();
        let mut dynamics_gathers = Vec::with_capacity(j);
        let mut value_gathers = Vec::with_capacity(j);
        for i in 0..j {
            let k = ushape[i];
            let mut per_axis = Vec::with_capacity(j);
            for a in 0..j {
                if a == i {
                    per_axis.push(None);
                } else {
                    let count = if a < i { nf } else { nf * k };
                    per_axis.push(Some(make_gather_index(&ushape[a..], count)?));
                }
            }
            dynamics_gathers.push(per_axis);
            value_gathers.push((1..j).map(|a| make_gather_index(&pshape[a..], nf * k)).collect::<Result<_>>()?);
        }
        Ok(Self { spec: spec.clone(), grid, plan, control_bases, block_stacks, dynamics_gathers, value_gathers })
    }

    pub fn control_bases(&self) -> &[ChebBasis1D] {
        &self.control_bases
    }
}

struct BlockOutput {
    values: Vec<Vec<f64>>,
    controls: Vec<Vec<f64>>,
    stats: SweepStats,
}

/// One Jacobi sweep: every player best-responds at every node to the
/// iteration-`r` policies of the others. Returns the updated node values and
/// controls and refits the value interpolants.
pub fn bellman_sweep(
    ctx: &SweepContext,
    values: &ValueField,
    policy: &PolicyField,
    exec: Execution,
) -> Result<(ValueField, PolicyField, SweepStats)> {
    let j = ctx.spec.players();
    let n = ctx.grid.len();
    if values.values.len() != j || policy.controls.len() != j {
        return Err(Error::ShapeMismatch("fields do not match the player count".into()));
    }
    if values.values.iter().chain(&policy.controls).any(|v| v.len() != n) {
        return Err(Error::ShapeMismatch("fields do not match the grid".into()));
    }
    let value_stacks: Vec<TensorStack> = values.coeffs.iter().map(|t| t.to_stack()).collect();
    let outputs = exec.map_blocks(ctx.plan.blocks(), |b| sweep_block(ctx, b, &value_stacks, policy))?;

    let mut new_values = vec![Vec::with_capacity(n); j];
    let mut new_controls = vec![Vec::with_capacity(n); j];
    let mut stats = SweepStats::default();
    for out in outputs {
        for i in 0..j {
            new_values[i].extend_from_slice(&out.values[i]);
            new_controls[i].extend_from_slice(&out.controls[i]);
        }
        stats.targets += out.stats.targets;
        stats.clamped += out.stats.clamped;
    }
    let values = ValueField::from_values(&ctx.grid, new_values)?;
    Ok((values, PolicyField { controls: new_controls }, stats))
}

/// Binds the leading axis of `stack` either to a shared point list (`eval_axis`)
/// or member by member through a location index.
fn bind(
    src: Option<&TensorStack>,
    owned: &mut Option<TensorStack>,
    shared: Option<&[f64]>,
    per_member: &[f64],
    gather: Option<&GatherIndex>,
) -> Result<()> {
    let src = owned.as_ref().or(src).expect("a stack to contract");
    let next = match (shared, gather) {
        (Some(points), _) => eval_axis(src, points)?,
        (None, Some(g)) => eval_diagonal_batch(src, per_member, g)?,
        (None, None) => unreachable!("diagonal binding needs a location index"),
    };
    *owned = Some(next);
    Ok(())
}

#[allow(clippy::needless_range_loop)]
fn sweep_block(
    ctx: &SweepContext,
    b: usize,
    value_stacks: &[TensorStack],
    policy: &PolicyField,
) -> Result<BlockOutput> {
    let spec = &ctx.spec;
    let j = spec.players();
    let range = ctx.plan.range(b);
    let nf = range.len();
    let j0 = range.start;
    let delta = spec.discount();
    let h = spec.h;
    let state_iv = ctx.grid.bases[0].interval();
    let control_iv: Vec<_> = ctx.control_bases.iter().map(ChebBasis1D::interval).collect();

    let mut out_values = vec![vec![0.0; nf]; j];
    let mut out_controls = vec![vec![0.0; nf]; j];
    let mut stats = SweepStats::default();
    let mut points = Vec::new();
    let mut samples = Vec::new();
    let mut coeffs = Vec::new();
    let mut fft_buf: Vec<Complex<f64>> = Vec::new();

    for i in 0..j {
        let basis = &ctx.control_bases[i];
        let k = basis.len();
        let m_total = nf * k;

        // Step 1: dynamics at (u_i = control node, u_-i = current policy) for all components
        let mut drift: Vec<Vec<f64>> = Vec::with_capacity(j);
        for c in 0..j {
            let mut owned = None;
            for a in 0..j {
                if a == i {
                    bind(Some(&ctx.block_stacks[b][c]), &mut owned, Some(basis.unit_nodes()), &[], None)?;
                } else {
                    let count = if a < i { nf } else { m_total };
                    points.clear();
                    points.extend((0..count).map(|m| control_iv[a].to_unit(policy.controls[a][j0 + m % nf])));
                    let gather = ctx.dynamics_gathers[i][a].as_ref();
                    bind(Some(&ctx.block_stacks[b][c]), &mut owned, None, &points, gather)?;
                }
            }
            drift.push(owned.expect("at least one axis").coeffs);
        }

        // Step 2: continuation value at the clamped target states
        let mut targets = vec![vec![0.0; m_total]; j];
        for m in 0..m_total {
            let node = &ctx.grid.nodes[j0 + m % nf];
            let mut clamped = false;
            for c in 0..j {
                let x = node[c] + h * drift[c][m];
                let y = x.clamp(0.0, spec.p_max);
                clamped |= x != y;
                targets[c][m] = state_iv.to_unit(y).clamp(-1.0, 1.0);
            }
            stats.clamped += clamped as usize;
        }
        stats.targets += m_total;

        let mut cont = eval_axis(&value_stacks[i], &targets[0])?;
        for (t, g) in targets[1..].iter().zip(&ctx.value_gathers[i]) {
            cont = eval_diagonal_batch(&cont, t, g)?;
        }

        // Step 3: fit the 1-D objective and maximize it
        samples.resize(k, 0.0);
        coeffs.resize(k, 0.0);
        for jl in 0..nf {
            let node = &ctx.grid.nodes[j0 + jl];
            for (kk, s) in samples.iter_mut().enumerate() {
                let u = basis.nodes()[kk];
                *s = delta * (h * stage_payoff(spec, i, node[i], u) + cont.coeffs[jl + nf * kk]);
            }
            if samples.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("objective"));
            }
            basis.transform_into(&samples, &mut coeffs, &mut fft_buf);
            let warm = control_iv[i].to_unit(policy.controls[i][j0 + jl]);
            let (t, v) = maximize_unit(&coeffs, warm);
            out_controls[i][jl] = control_iv[i].clamp(control_iv[i].from_unit(t));
            out_values[i][jl] = v;
        }
    }
    Ok(BlockOutput { values: out_values, controls: out_controls, stats })
}
