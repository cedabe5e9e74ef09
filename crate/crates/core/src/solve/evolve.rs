use serde::{Deserialize, Serialize};

use super::eigen::{eigendecompose, EigenDecomposition};
use super::integrate::{AdaptiveOptions, DormandPrince};
use super::SolveError;
use crate::moments::{DriftSystem, MomentColumn, MomentVector, C64, DIM};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvolveMethod {
    /// Eigen-propagation when the drift matrix is diagonalizable, else adaptive.
    #[default]
    Auto,
    Eigen,
    Adaptive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<MomentVector>,
    /// Fingerprint of the generating drift system.
    pub params_hash: u64,
    /// Method actually used (never `Auto`).
    pub method: EvolveMethod,
}

impl Trajectory {
    pub fn last(&self) -> &MomentVector {
        self.states.last().expect("trajectory is never empty")
    }
}

/// `(e^z - 1) / z`, accurate near zero.
fn phi1(z: C64) -> C64 {
    if z.norm() < 0.5 {
        let mut term = C64::new(1.0, 0.0);
        let mut sum = term;
        for n in 2..30 {
            term = term * z / n as f64;
            sum += term;
            if term.norm() < 1e-18 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        (z.exp() - 1.0) / z
    }
}

fn propagate_modal(ed: &EigenDecomposition, y0: &MomentColumn, beta: &MomentColumn, dt: f64) -> MomentColumn {
    let mut out = MomentColumn::zeros();
    for k in 0..DIM {
        let z = ed.values[k] * dt;
        out[k] = z.exp() * y0[k] + beta[k] * (phi1(z) * dt);
    }
    ed.vectors * out
}

fn check_grid(t_grid: &[f64]) -> Result<(), SolveError> {
    if t_grid.is_empty() {
        return Err(SolveError::InvalidTimeGrid("time grid is empty"));
    }
    if t_grid.iter().any(|t| !t.is_finite()) {
        return Err(SolveError::InvalidTimeGrid("time grid contains non-finite values"));
    }
    if t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(SolveError::InvalidTimeGrid("time grid must be ascending"));
    }
    Ok(())
}

/// Integrates the moment flow from `mu0` at `t_grid[0]` and samples it on `t_grid`.
pub fn evolve(system: &DriftSystem, mu0: &MomentVector, t_grid: &[f64]) -> Result<Trajectory, SolveError> {
    evolve_with(system, mu0, t_grid, EvolveMethod::Auto)
}

pub fn evolve_with(
    system: &DriftSystem,
    mu0: &MomentVector,
    t_grid: &[f64],
    method: EvolveMethod,
) -> Result<Trajectory, SolveError> {
    check_grid(t_grid)?;
    let decomposition = match method {
        EvolveMethod::Adaptive => None,
        EvolveMethod::Auto => eigendecompose(&system.a)?,
        EvolveMethod::Eigen => match eigendecompose(&system.a)? {
            Some(ed) => Some(ed),
            None => {
                return Err(SolveError::NotDiagonalizable {
                    condition: f64::INFINITY,
                })
            }
        },
    };
    let t0 = t_grid[0];
    let y0 = mu0.to_column();

    let (states, used) = match decomposition {
        Some(ed) => {
            let modal0 = ed.inverse * y0;
            let beta = ed.inverse * system.b;
            let states = t_grid
                .iter()
                .map(|&t| MomentVector::from_column(&propagate_modal(&ed, &modal0, &beta, t - t0)))
                .collect();
            (states, EvolveMethod::Eigen)
        }
        None => {
            let span = (t_grid[t_grid.len() - 1] - t0).max(f64::MIN_POSITIVE);
            let mut stepper = DormandPrince::new(system, AdaptiveOptions::default());
            let mut y = y0;
            let mut t = t0;
            let mut states = Vec::with_capacity(t_grid.len());
            for &target in t_grid {
                if target > t {
                    stepper.advance(&mut y, t, target, span)?;
                    t = target;
                }
                states.push(MomentVector::from_column(&y));
            }
            (states, EvolveMethod::Adaptive)
        }
    };
    Ok(Trajectory {
        times: t_grid.to_vec(),
        states,
        params_hash: system.fingerprint(),
        method: used,
    })
}
