//! CSV files written and read by the commands.

use std::path::Path;

use anyhow::{bail, Context, Result};
use chebgame::game::{StateGrid, TimePath};
use chebgame::EquilibriumResult;

/// Scientific notation with 15 fractional digits and a signed two-digit
/// exponent, e.g. `1.250000000000000e-03`.
pub fn sci(x: f64) -> String {
    let s = format!("{x:.15e}");
    match s.split_once('e') {
        Some((mantissa, exp)) => {
            let exp: i32 = exp.parse().expect("exponent from the float formatter");
            let sign = if exp < 0 { '-' } else { '+' };
            format!("{mantissa}e{sign}{:02}", exp.abs())
        }
        None => s,
    }
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

fn header(first: &str, groups: &[(&str, usize)]) -> Vec<String> {
    let mut h = vec![first.to_string()];
    for (name, j) in groups {
        h.extend((1..=*j).map(|i| format!("{name}_{i}")));
    }
    h
}

/// `node,p_1..p_J,<col>_1..<col>_J` with shortest round-trip decimals.
fn write_node_table(path: &Path, grid: &StateGrid, col: &str, fields: &[Vec<f64>]) -> Result<()> {
    let j = fields.len();
    let mut w = writer(path)?;
    w.write_record(header("node", &[("p", j), (col, j)]))?;
    for (n, p) in grid.nodes.iter().enumerate() {
        let mut row = vec![n.to_string()];
        row.extend(p.iter().map(f64::to_string));
        row.extend(fields.iter().map(|f| f[n].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_solution(dir: &Path, r: &EquilibriumResult) -> Result<()> {
    write_node_table(&dir.join("policy.csv"), &r.grid, "u", &r.policy.controls)?;
    write_node_table(&dir.join("value.csv"), &r.grid, "V", &r.values.values)?;
    let j = r.policy.controls.len();
    let mut w = writer(&dir.join("convergence.csv"))?;
    w.write_record(header("iteration", &[("diff", j)]))?;
    for (it, changes) in r.history.iter().enumerate() {
        let mut row = vec![(it + 1).to_string()];
        row.extend(changes.iter().map(|c| sci(*c)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_timepath(path: &Path, tp: &TimePath) -> Result<()> {
    let j = tp.states.first().map_or(0, Vec::len);
    let mut w = writer(path)?;
    w.write_record(header("t", &[("p", j), ("u", j)]))?;
    for ((t, p), u) in tp.times.iter().zip(&tp.states).zip(&tp.controls) {
        let mut row = vec![sci(*t)];
        row.extend(p.iter().chain(u).map(|x| sci(*x)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Any CSV table with a header row. Values are written as given.
pub fn write_table(path: &Path, head: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(head)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `policy.csv` and checks that its nodes are exactly the nodes of `grid`.
pub fn read_policy(path: &Path, grid: &StateGrid, players: usize) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let expected = header("node", &[("p", players), ("u", players)]);
    let found: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if found != expected {
        bail!("{}: header {:?} does not match {} players", path.display(), found, players);
    }
    let mut controls = vec![Vec::with_capacity(grid.len()); players];
    for (n, record) in r.records().enumerate() {
        let record = record?;
        let nums = record
            .iter()
            .skip(1)
            .map(|s| s.trim().parse::<f64>().with_context(|| format!("{}: bad number `{s}`", path.display())))
            .collect::<Result<Vec<f64>>>()?;
        let node = grid.nodes.get(n).with_context(|| format!("{}: more rows than grid nodes", path.display()))?;
        if nums[..players] != node[..] {
            bail!(
                "{}: row {n} is not grid node {node:?}; was the policy solved with this configuration?",
                path.display()
            );
        }
        for (i, u) in nums[players..].iter().enumerate() {
            controls[i].push(*u);
        }
    }
    if controls[0].len() != grid.len() {
        bail!("{}: {} rows, the grid has {} nodes", path.display(), controls[0].len(), grid.len());
    }
    Ok(controls)
}
