//! Steady states, spectral stability and time evolution of a [`DriftSystem`].

mod eigen;
mod evolve;
mod integrate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use eigen::{eigendecompose, first_moment_drift, first_moment_max_real_part, stability, EigenDecomposition, StabilityReport};
pub use evolve::{evolve, evolve_with, EvolveMethod, Trajectory};
pub use integrate::{AdaptiveOptions, DormandPrince};

use crate::moments::{DriftMatrix, DriftSystem, MomentVector};

/// Relative pivot floor below which the drift matrix is treated as singular.
pub const PIVOT_FLOOR: f64 = 1e-14;
/// Residual bound `|A mu + B|_inf <= RESIDUAL_TOL * (1 + |B|_inf)`.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("singular drift matrix: smallest pivot {pivot:.3e} below {threshold:.3e}")]
    SingularDrift { pivot: f64, threshold: f64 },
    #[error("drift matrix is unstable (max Re lambda = {max_real_part:.6e}); steady state is not an attractor")]
    UnstableSystem { max_real_part: f64 },
    #[error("eigenvalue iteration did not converge within {max_iterations} sweeps")]
    EigenFailure { max_iterations: usize },
    #[error("adaptive integrator step collapsed to {step:.3e} at t = {time:.6e}")]
    StiffnessFailure { time: f64, step: f64 },
    #[error("steady-state residual {residual:.3e} exceeds bound {bound:.3e}")]
    ResidualTooLarge { residual: f64, bound: f64 },
    #[error("drift matrix is not diagonalizable within conditioning tolerance (cond = {condition:.3e})")]
    NotDiagonalizable { condition: f64 },
    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(&'static str),
}

impl SolveError {
    pub fn name(&self) -> &'static str {
        match self {
            SolveError::SingularDrift { .. } => "SingularDrift",
            SolveError::UnstableSystem { .. } => "UnstableSystem",
            SolveError::EigenFailure { .. } => "EigenFailure",
            SolveError::StiffnessFailure { .. } => "StiffnessFailure",
            SolveError::ResidualTooLarge { .. } => "ResidualTooLarge",
            SolveError::NotDiagonalizable { .. } => "NotDiagonalizable",
            SolveError::InvalidTimeGrid(_) => "InvalidTimeGrid",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SteadyOptions {
    /// Return the algebraic fixed point even when it is not an attractor.
    pub allow_unstable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub moments: MomentVector,
    /// `|A mu + B|_inf` after symmetrization.
    pub residual: f64,
    /// Sup-norm of the correction applied to restore conjugate pairing.
    pub symmetrization_delta: f64,
    pub stability: StabilityReport,
}

pub(crate) fn inf_norm(a: &DriftMatrix) -> f64 {
    a.row_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn column_inf_norm(v: &crate::moments::MomentColumn) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Stable steady state of `system`.
pub fn steady_state(system: &DriftSystem) -> Result<SteadyState, SolveError> {
    steady_state_with(system, SteadyOptions::default())
}

pub fn steady_state_with(system: &DriftSystem, opts: SteadyOptions) -> Result<SteadyState, SolveError> {
    let report = stability(system)?;
    if !report.stable && !opts.allow_unstable {
        return Err(SolveError::UnstableSystem {
            max_real_part: report.max_real_part,
        });
    }
    let (moments, residual, symmetrization_delta) = fixed_point(system)?;
    log::debug!("steady state: residual {residual:.3e}, symmetrization correction {symmetrization_delta:.3e}");
    Ok(SteadyState {
        moments,
        residual,
        symmetrization_delta,
        stability: report,
    })
}

/// Solves `A mu = -B` by partial-pivoting LU with one step of iterative
/// refinement when the residual bound is missed.
pub(crate) fn fixed_point(system: &DriftSystem) -> Result<(MomentVector, f64, f64), SolveError> {
    let a = &system.a;
    let threshold = PIVOT_FLOOR * inf_norm(a);
    let lu = a.lu();
    let pivot = lu
        .u()
        .diagonal()
        .iter()
        .map(|z| z.norm())
        .fold(f64::INFINITY, f64::min);
    if !(pivot >= threshold) || pivot == 0.0 {
        return Err(SolveError::SingularDrift { pivot, threshold });
    }
    let rhs = -system.b;
    let mut x = lu
        .solve(&rhs)
        .ok_or(SolveError::SingularDrift { pivot, threshold })?;
    let bound = RESIDUAL_TOL * (1.0 + column_inf_norm(&system.b));
    let r = a * x + system.b;
    if column_inf_norm(&r) > bound {
        if let Some(dx) = lu.solve(&r) {
            x -= dx;
        }
    }
    let raw = MomentVector::from_column(&x);
    let (mu, delta) = raw.symmetrized();
    let residual = column_inf_norm(&(a * mu.to_column() + system.b));
    if residual > bound {
        return Err(SolveError::ResidualTooLarge { residual, bound });
    }
    Ok((mu, residual, delta))
}
