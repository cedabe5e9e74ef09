#![allow(dead_code)]

use optocool_core::{build_rwa_system, stability, PhysicalParams, C64};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn log_uniform(rng: &mut StdRng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo.ln()..hi.ln()).exp()
}

/// Random normalized parameters over the oracle sampling box:
/// kappa, g in [1e-3, 1], gamma_m in [1e-7, 1e-3], n_bar in [1, 1e4]
/// (all log-uniform) and delta uniform in the given range.
pub fn sample_params(rng: &mut StdRng, delta: (f64, f64)) -> PhysicalParams {
    let kappa = log_uniform(rng, 1e-3, 1.0);
    let g = log_uniform(rng, 1e-3, 1.0);
    let gamma_m = log_uniform(rng, 1e-7, 1e-3);
    let n_bar = log_uniform(rng, 1.0, 1e4);
    let d = if delta.0 == delta.1 {
        delta.0
    } else {
        rng.random_range(delta.0..delta.1)
    };
    PhysicalParams::normalized(kappa, gamma_m, d, g, n_bar).unwrap()
}

/// `count` samples whose RWA drift matrix is stable.
pub fn stable_rwa_sample(seed: u64, count: usize, delta: (f64, f64)) -> Vec<PhysicalParams> {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = sample_params(&mut r, delta);
        if stability(&build_rwa_system(&p)).unwrap().stable {
            out.push(p);
        }
    }
    out
}

/// Textbook Gaussian elimination with partial pivoting, used as an
/// independent reference for the library's LU solve.
pub fn gaussian_solve(a: &[[C64; 10]; 10], b: &[C64; 10]) -> [C64; 10] {
    let mut m = *a;
    let mut x = *b;
    for col in 0..10 {
        let piv = (col..10).max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm())).unwrap();
        m.swap(col, piv);
        x.swap(col, piv);
        for row in col + 1..10 {
            let f = m[row][col] / m[col][col];
            for k in col..10 {
                let v = m[col][k];
                m[row][k] -= f * v;
            }
            let v = x[col];
            x[row] -= f * v;
        }
    }
    for row in (0..10).rev() {
        let mut s = x[row];
        for k in row + 1..10 {
            s -= m[row][k] * x[k];
        }
        x[row] = s / m[row][row];
    }
    x
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
