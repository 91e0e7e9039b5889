//! Parameter sets for the 2-, 3- and 4-player configurations.
//!
//! All three share beta = phi = 1, A = 0.5, c = 0.5 and unit masses. The
//! discount rate and box bounds keep the 2-player equilibrium feedback
//! strictly positive on the whole state box.

use crate::game::GameSpec;

pub const DEFAULT_RHO: f64 = 0.1;
pub const DEFAULT_P_MAX: f64 = 0.7;
pub const DEFAULT_U_MAX: f64 = 0.5;

fn base(k: Vec<Vec<f64>>, np: usize, h: f64, tol: f64) -> GameSpec {
    let j = k.len();
    GameSpec {
        k,
        mass: vec![1.0; j],
        beta: vec![1.0; j],
        phi: vec![1.0; j],
        a: vec![0.5; j],
        c: vec![0.5; j],
        rho: DEFAULT_RHO,
        h,
        p_max: DEFAULT_P_MAX,
        u_max: DEFAULT_U_MAX,
        np: vec![np; j],
        nu: vec![np.max(2); j],
        tol,
        max_iters: 500_000,
    }
}

/// Two players sharing one boundary, isolated from outside.
pub fn example1() -> GameSpec {
    base(vec![vec![-1.0, 1.0], vec![1.0, -1.0]], 8, 1e-3, 1e-6)
}

/// Three players in a row: player 2 borders players 1 and 3.
pub fn example3() -> GameSpec {
    base(example3_k(), 3, 1e-3, 1e-4)
}

/// Four players: 1-2, 2-3, 2-4 and 3-4 share boundaries.
pub fn example4() -> GameSpec {
    base(
        vec![
            vec![-1.0, 1.0, 0.0, 0.0],
            vec![1.0, -3.0, 1.0, 1.0],
            vec![0.0, 1.0, -2.0, 1.0],
            vec![0.0, 1.0, 1.0, -2.0],
        ],
        3,
        1e-3,
        1e-4,
    )
}

/// Symmetric 3-player matrix matching the stated topology.
pub fn example3_k() -> Vec<Vec<f64>> {
    vec![vec![-1.0, 1.0, 0.0], vec![1.0, -2.0, 1.0], vec![0.0, 1.0, -1.0]]
}

/// 3-player variant with row 2 equal to `[1, -2, 0]`. It leaks stock from
/// region 2 and is not symmetric.
pub fn example3_k_leaky() -> Vec<Vec<f64>> {
    vec![vec![-1.0, 1.0, 0.0], vec![1.0, -2.0, 0.0], vec![0.0, 1.0, -1.0]]
}

pub fn by_name(name: &str) -> Option<GameSpec> {
    match name {
        "example1" => Some(example1()),
        "example3" => Some(example3()),
        "example4" => Some(example4()),
        _ => None,
    }
}
