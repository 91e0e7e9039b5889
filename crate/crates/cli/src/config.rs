//! Run configuration: presets, JSON files and flag overrides.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use chebgame::game::GameSpec;
use chebgame::presets;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SIM_HORIZON: f64 = 10.0;

/// Config file contents. Every key is optional; missing ones come from the
/// preset.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema_version: Option<u32>,
    pub preset: Option<String>,
    pub k: Option<Vec<Vec<f64>>>,
    pub mass: Option<Vec<f64>>,
    pub beta: Option<Vec<f64>>,
    pub phi: Option<Vec<f64>>,
    pub a: Option<Vec<f64>>,
    pub c: Option<Vec<f64>>,
    pub rho: Option<f64>,
    pub h: Option<f64>,
    pub p_max: Option<f64>,
    pub u_max: Option<f64>,
    pub np: Option<Vec<usize>>,
    pub nu: Option<Vec<usize>>,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub p0: Option<Vec<f64>>,
    pub sim_horizon: Option<f64>,
    pub blocks: Option<String>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Values given on the command line; these win over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub preset: Option<String>,
    pub out: Option<PathBuf>,
    pub np: Option<Vec<usize>>,
    pub nu: Option<Vec<usize>>,
    pub h: Option<f64>,
    pub tol: Option<f64>,
    pub rho: Option<f64>,
    pub p_max: Option<f64>,
    pub u_max: Option<f64>,
    pub blocks: Option<String>,
    pub threads: Option<usize>,
    pub sim_horizon: Option<f64>,
    pub p0: Option<Vec<f64>>,
    pub max_iters: Option<usize>,
}

/// Fully resolved configuration, echoed to `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub schema_version: u32,
    pub preset: String,
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
    pub np: Vec<usize>,
    pub nu: Vec<usize>,
    pub tol: f64,
    pub max_iters: usize,
    pub p0: Vec<f64>,
    /// Simulated time span; the path has `round(sim_horizon / h)` steps.
    pub sim_horizon: f64,
    /// `auto`, `sweep`, or a comma-separated list of block counts.
    pub blocks: String,
    pub threads: usize,
    pub out: PathBuf,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Blocks {
    Auto,
    Sweep,
    List(Vec<usize>),
}

pub fn parse_blocks(s: &str) -> Result<Blocks> {
    match s.trim() {
        "auto" => Ok(Blocks::Auto),
        "sweep" => Ok(Blocks::Sweep),
        list => {
            let counts = list
                .split(',')
                .map(|x| x.trim().parse::<usize>().map_err(|_| anyhow!("invalid block count `{x}`")))
                .collect::<Result<Vec<_>>>()?;
            if counts.contains(&0) {
                bail!("block counts must be positive");
            }
            Ok(Blocks::List(counts))
        }
    }
}

fn broadcast<T: Copy>(name: &str, v: Vec<T>, players: usize) -> Result<Vec<T>> {
    match v.len() {
        1 => Ok(vec![v[0]; players]),
        n if n == players => Ok(v),
        n => bail!("`{name}` has {n} entries, expected 1 or {players}"),
    }
}

fn required<T>(name: &str, v: Option<T>) -> Result<T> {
    v.ok_or_else(|| anyhow!("custom preset requires `{name}`"))
}

pub fn default_threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Layers preset < file < flags and checks the result.
pub fn resolve(file: Option<ConfigFile>, flags: Overrides) -> Result<RunConfig> {
    let file = file.unwrap_or_default();
    if let Some(v) = file.schema_version {
        if v != SCHEMA_VERSION {
            bail!("unsupported schema_version {v}, expected {SCHEMA_VERSION}");
        }
    }
    let preset = flags.preset.or(file.preset).unwrap_or_else(|| "example1".to_string());
    let base = match preset.as_str() {
        "custom" => None,
        name => Some(presets::by_name(name).ok_or_else(|| anyhow!("unknown preset `{name}`"))?),
    };
    let pick_vec = |name: &str, v: Option<Vec<f64>>, b: Option<&Vec<f64>>| -> Result<Vec<f64>> {
        required(name, v.or_else(|| b.cloned()))
    };
    let b = base.as_ref();
    let k = required("k", file.k.or_else(|| b.map(|s| s.k.clone())))?;
    let j = k.len();
    if j == 0 {
        bail!("`k` is empty");
    }
    let np = broadcast("np", required("np", flags.np.or(file.np).or_else(|| b.map(|s| s.np.clone())))?, j)?;
    let nu = match flags.nu.or(file.nu) {
        Some(nu) => broadcast("nu", nu, j)?,
        None => np.iter().map(|&n| n.max(2)).collect(),
    };
    let cfg = RunConfig {
        schema_version: SCHEMA_VERSION,
        mass: broadcast("mass", pick_vec("mass", file.mass, b.map(|s| &s.mass))?, j)?,
        beta: broadcast("beta", pick_vec("beta", file.beta, b.map(|s| &s.beta))?, j)?,
        phi: broadcast("phi", pick_vec("phi", file.phi, b.map(|s| &s.phi))?, j)?,
        a: broadcast("a", pick_vec("a", file.a, b.map(|s| &s.a))?, j)?,
        c: broadcast("c", pick_vec("c", file.c, b.map(|s| &s.c))?, j)?,
        rho: required("rho", flags.rho.or(file.rho).or(b.map(|s| s.rho)))?,
        h: required("h", flags.h.or(file.h).or(b.map(|s| s.h)))?,
        p_max: required("p_max", flags.p_max.or(file.p_max).or(b.map(|s| s.p_max)))?,
        u_max: required("u_max", flags.u_max.or(file.u_max).or(b.map(|s| s.u_max)))?,
        tol: required("tol", flags.tol.or(file.tol).or(b.map(|s| s.tol)))?,
        max_iters: flags.max_iters.or(file.max_iters).or(b.map(|s| s.max_iters)).unwrap_or(500_000),
        p0: broadcast("p0", flags.p0.or(file.p0).unwrap_or_else(|| vec![0.0]), j)?,
        sim_horizon: flags.sim_horizon.or(file.sim_horizon).unwrap_or(DEFAULT_SIM_HORIZON),
        blocks: flags.blocks.or(file.blocks).unwrap_or_else(|| "auto".to_string()),
        threads: flags.threads.or(file.threads).unwrap_or_else(default_threads),
        out: flags.out.or(file.out).unwrap_or_else(|| PathBuf::from("out")),
        seed: file.seed.unwrap_or(0),
        preset,
        k,
        np,
        nu,
    };
    cfg.spec().validate().context("invalid model configuration")?;
    if let Some(x) = cfg.p0.iter().find(|&&x| !(0.0..=cfg.p_max).contains(&x)) {
        bail!("p0 entry {x} lies outside [0, {}]", cfg.p_max);
    }
    if !(cfg.sim_horizon >= 0.0 && cfg.sim_horizon.is_finite()) {
        bail!("sim_horizon must be a finite non-negative time");
    }
    if cfg.threads == 0 {
        bail!("threads must be positive");
    }
    parse_blocks(&cfg.blocks)?;
    Ok(cfg)
}

impl RunConfig {
    pub fn spec(&self) -> GameSpec {
        GameSpec {
            k: self.k.clone(),
            mass: self.mass.clone(),
            beta: self.beta.clone(),
            phi: self.phi.clone(),
            a: self.a.clone(),
            c: self.c.clone(),
            rho: self.rho,
            h: self.h,
            p_max: self.p_max,
            u_max: self.u_max,
            np: self.np.clone(),
            nu: self.nu.clone(),
            tol: self.tol,
            max_iters: self.max_iters,
        }
    }

    pub fn players(&self) -> usize {
        self.k.len()
    }

    pub fn sim_steps(&self) -> usize {
        (self.sim_horizon / self.h).round() as usize
    }

    pub fn write_json(&self, dir: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(dir.join("run.json"), text + "\n").context("writing run.json")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_defaults() {
        let cfg = resolve(None, Overrides::default()).unwrap();
        assert_eq!(cfg.preset, "example1");
        assert_eq!(cfg.np, vec![8, 8]);
        assert_eq!(cfg.nu, vec![8, 8]);
        assert_eq!(cfg.p0, vec![0.0, 0.0]);
        assert_eq!(cfg.blocks, "auto");
    }

    #[test]
    fn flags_override_file() {
        let file = ConfigFile { h: Some(0.5e-2), tol: Some(1e-3), np: Some(vec![3, 4]), ..Default::default() };
        let flags = Overrides { tol: Some(1e-5), ..Default::default() };
        let cfg = resolve(Some(file), flags).unwrap();
        assert_eq!(cfg.h, 0.5e-2);
        assert_eq!(cfg.tol, 1e-5);
        assert_eq!(cfg.np, vec![3, 4]);
        assert_eq!(cfg.nu, vec![3, 4]);
    }

    #[test]
    fn single_values_broadcast() {
        let flags =
            Overrides { preset: Some("example4".into()), np: Some(vec![2]), p0: Some(vec![0.1]), ..Default::default() };
        let cfg = resolve(None, flags).unwrap();
        assert_eq!(cfg.np, vec![2; 4]);
        assert_eq!(cfg.p0, vec![0.1; 4]);
        let bad = Overrides { np: Some(vec![2, 3, 4]), ..Default::default() };
        assert!(resolve(None, bad).is_err());
    }

    #[test]
    fn custom_needs_model_fields() {
        let file = ConfigFile { preset: Some("custom".into()), k: Some(vec![vec![0.0]]), ..Default::default() };
        let err = resolve(Some(file), Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("custom preset requires"));
    }

    #[test]
    fn rejects_bad_values() {
        for flags in [
            Overrides { preset: Some("nope".into()), ..Default::default() },
            Overrides { h: Some(-1.0), ..Default::default() },
            Overrides { p0: Some(vec![2.0]), ..Default::default() },
            Overrides { blocks: Some("3,x".into()), ..Default::default() },
            Overrides { threads: Some(0), ..Default::default() },
        ] {
            assert!(resolve(None, flags).is_err());
        }
        let file = ConfigFile { schema_version: Some(7), ..Default::default() };
        assert!(resolve(Some(file), Overrides::default()).is_err());
    }

    #[test]
    fn blocks_syntax() {
        assert_eq!(parse_blocks("auto").unwrap(), Blocks::Auto);
        assert_eq!(parse_blocks("sweep").unwrap(), Blocks::Sweep);
        assert_eq!(parse_blocks("1, 8,64").unwrap(), Blocks::List(vec![1, 8, 64]));
        assert!(parse_blocks("0").is_err());
    }

    #[test]
    fn json_round_trip() {
        let cfg = resolve(None, Overrides { preset: Some("example3".into()), ..Default::default() }).unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        let file: ConfigFile = serde_json::from_str(&text).unwrap();
        assert_eq!(resolve(Some(file), Overrides::default()).unwrap(), cfg);
    }
}
