//! Ground-state cooling of a mechanical resonator in a driven optical
//! cavity, computed from the linearized second-moment dynamics.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: parameters, thermal occupations and the mean-field working point.
//! * [`moments`]: the ten second moments and the drift system `A mu + B`,
//!   with and without the counter-rotating terms.
//! * [`solve`]: steady states, spectral stability and time evolution.
//! * [`observables`]: phonon number, hybrid-mode quadrature variances,
//!   squeezing classification and closed-form limits.
//! * [`sweep`]: parameter grids, detuning optimization and figure datasets.

pub mod model;
pub mod moments;
pub mod observables;
pub mod solve;
pub mod sweep;

pub use model::{classical_working_point, thermal_occupation, to_effective, DriveConfig, ModelError, PhysicalParams, WorkingPoint};
pub use moments::{build_full_system, build_rwa_system, rhs, DriftSystem, Moment, MomentVector, C64};
pub use observables::{
    classify_field, min_phonon_asymptotic, phonon_number, photon_number, rwa_phonon_closed_form, rwa_resonant_phonon,
    variance_asymptotic, variances, Field, FieldKind, ObservableError, SqueezingVerdict, VarianceSet,
};
pub use solve::{evolve, evolve_with, stability, steady_state, steady_state_with, EvolveMethod, SolveError, StabilityReport, SteadyOptions, SteadyState, Trajectory};
pub use sweep::{figure_dataset, minimize_over_detuning, run_sweep, Cell, FigureId, FigureOptions, Model, ModelChoice, SweepError, SweepSpec, SweepTable};

use thiserror::Error;

/// Any error raised by the library, tagged by the module it came from.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Observable(#[from] ObservableError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
}

impl Error {
    /// Name of the error variant, e.g. `UnstableSystem`.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Model(e) => e.name(),
            Error::Solve(e) => e.name(),
            Error::Observable(e) => e.name(),
            Error::Sweep(e) => e.name(),
        }
    }

    /// Module the error originated in.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Model(_) => "model",
            Error::Solve(_) => "solve",
            Error::Observable(_) => "observables",
            Error::Sweep(SweepError::Model(_)) => "model",
            Error::Sweep(_) => "sweep",
        }
    }
}
