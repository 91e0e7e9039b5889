use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use chebgame::game::StateGrid;
use chebgame::oracle::{lq_solve, policy_error};
use chebgame::solver::{
    self, divisors, partition, policy_interpolants, simulate, with_threads, BlockPlan, PolicyField,
};
use chebgame::EquilibriumResult;

use crate::config::{parse_blocks, Blocks, RunConfig};
use crate::output;

/// How a command failed, which decides the exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config, or input files.
    Usage(anyhow::Error),
    /// The solver hit `max_iters`; outputs were still written.
    NotConverged(String),
    Runtime(anyhow::Error),
}

pub type Outcome = std::result::Result<(), Failure>;

trait Usage<T> {
    fn usage(self) -> std::result::Result<T, Failure>;
}

impl<T> Usage<T> for Result<T> {
    fn usage(self) -> std::result::Result<T, Failure> {
        self.map_err(Failure::Usage)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn prepare_out(cfg: &RunConfig) -> Result<PathBuf> {
    std::fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    cfg.write_json(&cfg.out)?;
    Ok(cfg.out.clone())
}

/// Smallest divisor of `nodes` that gives every worker a few blocks.
fn auto_blocks(nodes: usize, threads: usize) -> usize {
    if threads <= 1 {
        return 1;
    }
    let want = (4 * threads).min(nodes);
    divisors(nodes).into_iter().find(|&d| d >= want).unwrap_or(nodes)
}

fn single_plan(cfg: &RunConfig, nodes: usize) -> Result<BlockPlan> {
    let blocks = match parse_blocks(&cfg.blocks)? {
        Blocks::Auto => auto_blocks(nodes, cfg.threads),
        Blocks::List(list) if list.len() == 1 => list[0],
        _ => bail!("this command needs a single block count or `auto`, got `{}`", cfg.blocks),
    };
    Ok(partition(nodes, blocks)?)
}

fn run_solver(cfg: &RunConfig, plan: &BlockPlan) -> Result<EquilibriumResult> {
    let spec = cfg.spec();
    let r = with_threads(cfg.threads, || solver::solve(&spec, plan, None))??;
    Ok(r)
}

pub fn solve(cfg: &RunConfig) -> Outcome {
    let spec = cfg.spec();
    let grid = StateGrid::new(&spec).map_err(|e| Failure::Usage(e.into()))?;
    let plan = single_plan(cfg, grid.len()).usage()?;
    let dir = prepare_out(cfg)?;
    let r = run_solver(cfg, &plan)?;
    output::write_solution(&dir, &r)?;
    println!(
        "{} after {} iterations (last change {:.3e}), {} nodes in {} blocks, {:.2}s",
        if r.converged { "converged" } else { "not converged" },
        r.iterations,
        r.last_change().unwrap_or(f64::NAN),
        grid.len(),
        plan.blocks(),
        r.timings.total.as_secs_f64()
    );
    if r.converged {
        Ok(())
    } else {
        Err(Failure::NotConverged(format!("max_iters = {} reached", cfg.max_iters)))
    }
}

pub fn simulate_cmd(cfg: &RunConfig, policy: Option<&Path>) -> Outcome {
    let spec = cfg.spec();
    let grid = StateGrid::new(&spec).map_err(|e| Failure::Usage(e.into()))?;
    let path = policy.map(Path::to_path_buf).unwrap_or_else(|| cfg.out.join("policy.csv"));
    if !path.is_file() {
        return Err(Failure::Usage(anyhow!("policy file {} not found; run `solve` first", path.display())));
    }
    let controls = output::read_policy(&path, &grid, cfg.players()).usage()?;
    let tensors = policy_interpolants(&grid, &PolicyField { controls }).map_err(anyhow::Error::from)?;
    let tp = simulate(&spec, &tensors, &cfg.p0, cfg.sim_steps()).map_err(|e| Failure::Usage(e.into()))?;
    std::fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    output::write_timepath(&cfg.out.join("timepath.csv"), &tp)?;
    println!("wrote {} time steps to {}", tp.len(), cfg.out.join("timepath.csv").display());
    Ok(())
}

pub fn compare(cfg: &RunConfig, np_list: &[usize]) -> Outcome {
    if cfg.players() != 2 {
        return Err(Failure::Usage(anyhow!(
            "no oracle: the exact reference exists for 2 players, got {}",
            cfg.players()
        )));
    }
    if np_list.is_empty() || np_list.contains(&0) {
        return Err(Failure::Usage(anyhow!("--np-list needs positive degrees")));
    }
    let dir = prepare_out(cfg)?;
    let mut rows = Vec::new();
    let mut unconverged = Vec::new();
    for &np in np_list {
        let mut run = cfg.clone();
        run.np = vec![np; 2];
        run.nu = vec![np.max(2); 2];
        let spec = run.spec();
        let oracle = lq_solve(&spec).map_err(|e| Failure::Usage(anyhow!("oracle unavailable: {e}")))?;
        let grid = StateGrid::new(&spec).map_err(|e| Failure::Usage(e.into()))?;
        let plan = single_plan(&run, grid.len()).usage()?;
        let start = Instant::now();
        let r = run_solver(&run, &plan)?;
        let wall = start.elapsed().as_secs_f64();
        let err = policy_error(&r.policy, &oracle, &r.grid)
            .map_err(|e| Failure::Usage(anyhow!("oracle unavailable: {e}")))?;
        println!("N^p = {np}: error {err:.4e}, {wall:.2}s, {} iterations", r.iterations);
        if !r.converged {
            unconverged.push(np);
        }
        rows.push(vec![np.to_string(), err.to_string(), format!("{wall:.6}")]);
    }
    output::write_table(&dir.join("error.csv"), &["np", "error", "wall_time"], &rows)?;
    if unconverged.is_empty() {
        Ok(())
    } else {
        Err(Failure::NotConverged(format!("no convergence for N^p in {unconverged:?}")))
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn bench_blocks(cfg: &RunConfig, reps: usize) -> Outcome {
    if reps == 0 {
        return Err(Failure::Usage(anyhow!("--reps must be positive")));
    }
    let spec = cfg.spec();
    let nodes = StateGrid::new(&spec).map_err(|e| Failure::Usage(e.into()))?.len();
    let counts = match parse_blocks(&cfg.blocks).usage()? {
        Blocks::Auto | Blocks::Sweep => divisors(nodes),
        Blocks::List(list) => list,
    };
    let plans = counts
        .iter()
        .map(|&b| partition(nodes, b))
        .collect::<chebgame::Result<Vec<_>>>()
        .map_err(|e| Failure::Usage(e.into()))?;
    let dir = prepare_out(cfg)?;
    let mut rows = Vec::new();
    let mut unconverged = false;
    for plan in &plans {
        let mut times = Vec::with_capacity(reps);
        let mut iterations = 0;
        for _ in 0..reps {
            let start = Instant::now();
            let r = run_solver(cfg, plan)?;
            times.push(start.elapsed().as_secs_f64());
            iterations = r.iterations;
            unconverged |= !r.converged;
        }
        let wall = median(times);
        println!("N_b = {:>5}, N_f = {:>5}: {wall:.4}s median of {reps}", plan.blocks(), plan.block_len());
        rows.push(vec![
            plan.blocks().to_string(),
            plan.block_len().to_string(),
            format!("{wall:.6}"),
            reps.to_string(),
            iterations.to_string(),
        ]);
    }
    output::write_table(&dir.join("blocks.csv"), &["n_b", "n_f", "wall_time", "repetitions", "iterations"], &rows)?;
    if unconverged {
        Err(Failure::NotConverged("some runs reached max_iters".into()))
    } else {
        Ok(())
    }
}
