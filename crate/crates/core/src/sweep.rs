//! Parameter grids, detuning optimization and the plot-ready datasets of
//! the standard figures.
//!
//! Grid points are independent and are evaluated in parallel; rows are
//! always emitted in row-major grid order (first axis outermost).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModelError, PhysicalParams};
use crate::moments::DriftSystem;
use crate::observables::{
    min_phonon_asymptotic, phonon_number, photon_number, rwa_phonon_closed_form, rwa_resonant_phonon,
    validity_denominator, variance_asymptotic, variances, ObservableError,
};
use crate::solve::{first_moment_max_real_part, fixed_point, stability, steady_state_with, SolveError, SteadyOptions};

pub const COARSE_DETUNING_POINTS: usize = 64;
/// Final bracket width of the golden-section refinement, in units of `omega_m`.
pub const DETUNING_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_CURVE_POINTS: usize = 401;
pub const DEFAULT_SURFACE_POINTS: usize = 101;
/// Detuning window of the detuning curves and of the fig5 optimization.
pub const DETUNING_WINDOW: (f64, f64) = (-2.0, 0.0);
/// Coupling and linewidth window of the fig5 / fig6 surfaces.
pub const SURFACE_G_WINDOW: (f64, f64) = (0.01, 0.6);
pub const SURFACE_KAPPA_WINDOW: (f64, f64) = (0.01, 1.0);
/// Mechanical damping standing in for `gamma_m -> 0` at fixed `gamma_m n_bar`.
pub const VANISHING_GAMMA_M: f64 = 1e-7;
/// Damping of the figures with a finite mechanical linewidth.
pub const FIGURE_GAMMA_M: f64 = 1e-5;
pub const DEFAULT_FIGURE_N_BAR: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    InvalidSpec(String),
    #[error("no stable point in detuning range [{lo}, {hi}]")]
    NoStablePoint { lo: f64, hi: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl SweepError {
    pub fn name(&self) -> &'static str {
        match self {
            SweepError::InvalidSpec(_) => "InvalidSpec",
            SweepError::NoStablePoint { .. } => "NoStablePoint",
            SweepError::Model(e) => e.name(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Delta,
    G,
    Kappa,
    GammaM,
    NBar,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Delta => "delta",
            SweepParam::G => "g",
            SweepParam::Kappa => "kappa",
            SweepParam::GammaM => "gamma_m",
            SweepParam::NBar => "n_bar",
        }
    }

    fn apply(self, p: &mut PhysicalParams, v: f64) {
        match self {
            SweepParam::Delta => p.delta = v,
            SweepParam::G => p.g = v,
            SweepParam::Kappa => p.kappa = v,
            SweepParam::GammaM => p.gamma_m = v,
            SweepParam::NBar => p.n_bar = v,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl Axis {
    pub fn linear(param: SweepParam, start: f64, stop: f64, count: usize) -> Self {
        Self {
            param,
            start,
            stop,
            count,
            scale: Scale::Linear,
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        let bad = |m: String| Err(SweepError::InvalidSpec(format!("axis `{}`: {m}", self.param.name())));
        if self.count < 2 {
            return bad(format!("count = {} must be >= 2", self.count));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return bad("endpoints must be finite".into());
        }
        if self.start == self.stop {
            return bad("start and stop must differ".into());
        }
        if self.scale == Scale::Log && (self.start <= 0.0 || self.stop <= 0.0) {
            return bad("log scale requires positive endpoints".into());
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        let last = (n - 1) as f64;
        match self.scale {
            Scale::Linear => (0..n)
                .map(|i| {
                    if i == n - 1 {
                        self.stop
                    } else {
                        self.start + (self.stop - self.start) * i as f64 / last
                    }
                })
                .collect(),
            Scale::Log => {
                let (a, b) = (self.start.ln(), self.stop.ln());
                (0..n)
                    .map(|i| {
                        if i == 0 {
                            self.start
                        } else if i == n - 1 {
                            self.stop
                        } else {
                            (a + (b - a) * i as f64 / last).exp()
                        }
                    })
                    .collect()
            }
        }
    }
}

/// A single model flavour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Rwa,
    Full,
}

impl Model {
    pub fn suffix(self) -> &'static str {
        match self {
            Model::Rwa => "rwa",
            Model::Full => "full",
        }
    }

    pub fn system(self, p: &PhysicalParams) -> DriftSystem {
        DriftSystem::build(p, self == Model::Rwa)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelChoice {
    Rwa,
    #[default]
    Full,
    Both,
}

impl ModelChoice {
    pub fn models(self) -> Vec<Model> {
        match self {
            ModelChoice::Rwa => vec![Model::Rwa],
            ModelChoice::Full => vec![Model::Full],
            ModelChoice::Both => vec![Model::Rwa, Model::Full],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Phonon,
    Variances,
    Stability,
    ClosedForms,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axes: Vec<Axis>,
    pub base: PhysicalParams,
    pub model: ModelChoice,
    pub outputs: Vec<Output>,
    pub allow_unstable: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(SweepError::InvalidSpec(format!("expected 1 or 2 axes, got {}", self.axes.len())));
        }
        if self.axes.len() == 2 && self.axes[0].param == self.axes[1].param {
            return Err(SweepError::InvalidSpec("axes must sweep distinct parameters".into()));
        }
        if self.outputs.is_empty() {
            return Err(SweepError::InvalidSpec("no outputs requested".into()));
        }
        self.base.validate()?;
        for axis in &self.axes {
            axis.validate()?;
            for v in [axis.start, axis.stop] {
                let mut p = self.base;
                axis.param.apply(&mut p, v);
                p.validate()?;
            }
        }
        Ok(())
    }

    fn wants(&self, o: Output) -> bool {
        self.outputs.contains(&o)
    }
}

/// One table entry. Failed evaluations carry the error name instead of a value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Number(f64),
    Flag(bool),
    Error { error: String },
    /// Categorical value such as a squeezing verdict.
    Text(String),
}

impl Cell {
    pub fn number(x: f64) -> Self {
        if x.is_finite() {
            Cell::Number(x)
        } else {
            Cell::error("NonFinite")
        }
    }

    pub fn error(name: &str) -> Self {
        Cell::Error { error: name.to_string() }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Cell::Number(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_flag(&self) -> Option<bool> {
        match self {
            Cell::Flag(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn error_name(&self) -> Option<&str> {
        match self {
            Cell::Error { error } => Some(error),
            _ => None,
        }
    }
}

impl<E: Into<PointError>> From<Result<f64, E>> for Cell {
    fn from(r: Result<f64, E>) -> Self {
        match r {
            Ok(x) => Cell::number(x),
            Err(e) => Cell::error(e.into().name()),
        }
    }
}

/// Errors that can mark a single grid point.
#[derive(Debug, Clone, PartialEq)]
pub enum PointError {
    Solve(SolveError),
    Observable(ObservableError),
    Sweep(SweepError),
}

impl PointError {
    pub fn name(&self) -> &'static str {
        match self {
            PointError::Solve(e) => e.name(),
            PointError::Observable(e) => e.name(),
            PointError::Sweep(e) => e.name(),
        }
    }
}

impl From<SolveError> for PointError {
    fn from(e: SolveError) -> Self {
        PointError::Solve(e)
    }
}

impl From<ObservableError> for PointError {
    fn from(e: ObservableError) -> Self {
        PointError::Observable(e)
    }
}

impl From<SweepError> for PointError {
    fn from(e: SweepError) -> Self {
        PointError::Sweep(e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl SweepTable {
    pub fn new(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of column `name`; `None` where the cell is not a number.
    pub fn numbers(&self, name: &str) -> Vec<Option<f64>> {
        let Some(i) = self.column_index(name) else {
            return Vec::new();
        };
        self.rows.iter().map(|r| r[i].as_number()).collect()
    }

    pub fn flags(&self, name: &str) -> Vec<Option<bool>> {
        let Some(i) = self.column_index(name) else {
            return Vec::new();
        };
        self.rows.iter().map(|r| r[i].as_flag()).collect()
    }
}

/// Everything evaluated for one model at one parameter point.
struct PointEval {
    stable: Result<bool, PointError>,
    max_real_part: Result<f64, PointError>,
    n_b: Result<f64, PointError>,
    n_a: Result<f64, PointError>,
    variances: Result<[f64; 4], PointError>,
}

fn evaluate(p: &PhysicalParams, model: Model, allow_unstable: bool) -> PointEval {
    let sys = model.system(p);
    match steady_state_with(&sys, SteadyOptions { allow_unstable }) {
        Ok(ss) => {
            let v = variances(&ss.moments)
                .map(|v| [v.var_x_plus, v.var_y_plus, v.var_x_minus, v.var_y_minus])
                .map_err(PointError::from);
            PointEval {
                stable: Ok(ss.stability.stable),
                max_real_part: Ok(ss.stability.max_real_part),
                n_b: phonon_number(&ss.moments).map_err(Into::into),
                n_a: photon_number(&ss.moments).map_err(Into::into),
                variances: v,
            }
        }
        Err(e) => {
            let (stable, mrp) = match &e {
                SolveError::UnstableSystem { max_real_part } => (Ok(false), Ok(*max_real_part)),
                other => (Err(other.clone().into()), Err(other.clone().into())),
            };
            let e: PointError = e.into();
            PointEval {
                stable,
                max_real_part: mrp,
                n_b: Err(e.clone()),
                n_a: Err(e.clone()),
                variances: Err(e),
            }
        }
    }
}

fn flag_cell(r: &Result<bool, PointError>) -> Cell {
    match r {
        Ok(b) => Cell::Flag(*b),
        Err(e) => Cell::error(e.name()),
    }
}

fn num_cell(r: &Result<f64, PointError>) -> Cell {
    match r {
        Ok(x) => Cell::number(*x),
        Err(e) => Cell::error(e.name()),
    }
}

fn variance_cells(r: &Result<[f64; 4], PointError>) -> Vec<Cell> {
    match r {
        Ok(v) => v.iter().map(|x| Cell::number(*x)).collect(),
        Err(e) => vec![Cell::error(e.name()); 4],
    }
}

const VARIANCE_NAMES: [&str; 4] = ["var_x_plus", "var_y_plus", "var_x_minus", "var_y_minus"];

fn grid_points(axes: &[Axis]) -> Vec<Vec<f64>> {
    let values: Vec<Vec<f64>> = axes.iter().map(Axis::values).collect();
    match values.as_slice() {
        [a] => a.iter().map(|&x| vec![x]).collect(),
        [a, b] => a.iter().flat_map(|&x| b.iter().map(move |&y| vec![x, y])).collect(),
        _ => Vec::new(),
    }
}

/// Evaluates the requested outputs over the grid of `spec`.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable, SweepError> {
    spec.validate()?;
    let models = spec.model.models();
    let mut columns: Vec<String> = spec.axes.iter().map(|a| a.param.name().to_string()).collect();
    for m in &models {
        let s = m.suffix();
        columns.push(format!("stable_{s}"));
        if spec.wants(Output::Stability) {
            columns.push(format!("max_real_part_{s}"));
        }
        if spec.wants(Output::Phonon) {
            columns.push(format!("n_b_{s}"));
            columns.push(format!("n_a_{s}"));
        }
        if spec.wants(Output::Variances) {
            columns.extend(VARIANCE_NAMES.iter().map(|v| format!("{v}_{s}")));
        }
    }
    if spec.wants(Output::ClosedForms) {
        columns.extend(
            [
                "n_b_rwa_closed_form",
                "n_b_rwa_resonant",
                "n_b_min_asymptotic",
                "var_y_plus_asymptotic",
                "var_x_minus_asymptotic",
            ]
            .map(String::from),
        );
    }

    let points = grid_points(&spec.axes);
    let rows: Vec<Vec<Cell>> = points
        .par_iter()
        .map(|coords| {
            let mut p = spec.base;
            for (axis, &v) in spec.axes.iter().zip(coords) {
                axis.param.apply(&mut p, v);
            }
            let mut row: Vec<Cell> = coords.iter().map(|&v| Cell::number(v)).collect();
            for &m in &models {
                let ev = evaluate(&p, m, spec.allow_unstable);
                row.push(flag_cell(&ev.stable));
                if spec.wants(Output::Stability) {
                    row.push(num_cell(&ev.max_real_part));
                }
                if spec.wants(Output::Phonon) {
                    row.push(num_cell(&ev.n_b));
                    row.push(num_cell(&ev.n_a));
                }
                if spec.wants(Output::Variances) {
                    row.extend(variance_cells(&ev.variances));
                }
            }
            if spec.wants(Output::ClosedForms) {
                let n_gamma = p.n_bar * p.gamma_m;
                row.push(rwa_phonon_closed_form(&p).into());
                row.push(rwa_resonant_phonon(&p).into());
                row.push(min_phonon_asymptotic(p.kappa, p.g, p.omega_m, n_gamma).map(|a| a.total).into());
                let va = variance_asymptotic(p.kappa, p.g, p.omega_m, n_gamma);
                row.push(va.clone().map(|v| v.var_y_plus).into());
                row.push(va.map(|v| v.var_x_minus).into());
            }
            row
        })
        .collect();
    Ok(SweepTable { columns, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetuningOptimum {
    pub delta_star: f64,
    pub n_b_star: f64,
    /// Minimum over the coarse scan alone.
    pub coarse_min: f64,
    pub evaluations: usize,
}

/// Minimizes the stable steady-state phonon number over the effective
/// detuning: a coarse scan locates the basin, golden-section search refines it.
fn dense_stable(base: &PhysicalParams, delta: f64, model: Model) -> bool {
    stability(&model.system(&base.with_delta(delta))).is_ok_and(|r| r.stable)
}

pub fn minimize_over_detuning(base: &PhysicalParams, range: (f64, f64), model: Model) -> Result<DetuningOptimum, SweepError> {
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(SweepError::InvalidSpec(format!("detuning range [{lo}, {hi}] is empty")));
    }
    base.validate()?;
    let rwa = model == Model::Rwa;
    let mut evaluations = 0usize;
    let mut seen: Vec<(f64, f64)> = Vec::new();
    // The inner loop screens stability through the first-moment spectrum;
    // the accepted optimum is re-checked against the dense drift spectrum.
    let mut objective = |delta: f64| -> f64 {
        evaluations += 1;
        let p = base.with_delta(delta);
        let f = match first_moment_max_real_part(&p, rwa) {
            Ok(m) if m < 0.0 => fixed_point(&model.system(&p))
                .ok()
                .and_then(|(mu, _, _)| phonon_number(&mu).ok())
                .unwrap_or(f64::INFINITY),
            _ => f64::INFINITY,
        };
        if f.is_finite() {
            seen.push((delta, f));
        }
        f
    };

    let n = COARSE_DETUNING_POINTS;
    let grid: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&d| objective(d)).collect();
    let (best_i, &coarse_min) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("coarse grid is non-empty");
    if !coarse_min.is_finite() {
        return Err(SweepError::NoStablePoint { lo, hi });
    }

    let mut best = (grid[best_i], coarse_min);
    let mut a = grid[best_i.saturating_sub(1)];
    let mut b = grid[(best_i + 1).min(n - 1)];
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = objective(x1);
    let mut f2 = objective(x2);
    for (x, f) in [(x1, f1), (x2, f2)] {
        if f < best.1 {
            best = (x, f);
        }
    }
    while b - a > DETUNING_TOLERANCE * base.omega_m {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = objective(x1);
            if f1 < best.1 {
                best = (x1, f1);
            }
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = objective(x2);
            if f2 < best.1 {
                best = (x2, f2);
            }
        }
    }
    if !dense_stable(base, best.0, model) {
        seen.sort_by(|x, y| x.1.total_cmp(&y.1));
        best = seen
            .iter()
            .copied()
            .find(|&(d, _)| dense_stable(base, d, model))
            .ok_or(SweepError::NoStablePoint { lo, hi })?;
    }
    Ok(DetuningOptimum {
        delta_star: best.0,
        n_b_star: best.1,
        coarse_min,
        evaluations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig2,
    Fig3,
    Fig5,
    Fig05,
    Fig6,
}

impl FigureId {
    pub const ALL: [FigureId; 5] = [FigureId::Fig2, FigureId::Fig3, FigureId::Fig5, FigureId::Fig05, FigureId::Fig6];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig5 => "fig5",
            FigureId::Fig05 => "fig05",
            FigureId::Fig6 => "fig6",
        }
    }
}

impl std::str::FromStr for FigureId {
    type Err = SweepError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FigureId::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| SweepError::InvalidSpec(format!("unknown figure `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FigureOptions {
    /// Bath occupation at `gamma_m = 1e-5`; fig5 keeps `gamma_m n_bar` at the same product.
    pub n_bar: f64,
    pub curve_points: usize,
    pub surface_points: usize,
    pub allow_unstable: bool,
}

impl Default for FigureOptions {
    fn default() -> Self {
        Self {
            n_bar: DEFAULT_FIGURE_N_BAR,
            curve_points: DEFAULT_CURVE_POINTS,
            surface_points: DEFAULT_SURFACE_POINTS,
            allow_unstable: false,
        }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    Axis::linear(SweepParam::Delta, lo, hi, n).values()
}

fn figure_params(kappa: f64, gamma_m: f64, delta: f64, g: f64, n_bar: f64) -> Result<PhysicalParams, SweepError> {
    Ok(PhysicalParams::normalized(kappa, gamma_m, delta, g, n_bar)?)
}

/// Plot-ready data for one of the standard figures.
pub fn figure_dataset(id: FigureId, opts: &FigureOptions) -> Result<SweepTable, SweepError> {
    if opts.curve_points < 2 || opts.surface_points < 2 {
        return Err(SweepError::InvalidSpec("figure grids need at least 2 points per axis".into()));
    }
    let deltas = linspace(DETUNING_WINDOW.0, DETUNING_WINDOW.1, opts.curve_points);
    let n_bar = opts.n_bar;
    let allow = opts.allow_unstable;
    let cols = |names: &[&str]| names.iter().map(|s| s.to_string()).collect::<Vec<_>>();

    match id {
        FigureId::Fig2 | FigureId::Fig3 => {
            let (kappa, couplings, columns): (f64, &[f64], _) = if id == FigureId::Fig2 {
                (0.01, &[0.05, 0.1], cols(&["delta_over_omega_m", "g_over_omega_m", "n_b_rwa"]))
            } else {
                (
                    0.5,
                    &[0.1, 0.2, 0.3],
                    cols(&["delta_over_omega_m", "g_over_omega_m", "n_b_full", "n_b_rwa", "stable_full"]),
                )
            };
            let mut points = Vec::new();
            for &g in couplings {
                for &d in &deltas {
                    points.push(figure_params(kappa, FIGURE_GAMMA_M, d, g, n_bar)?);
                }
            }
            let rows = points
                .par_iter()
                .map(|p| {
                    let rwa = evaluate(p, Model::Rwa, allow);
                    let mut row = vec![Cell::number(p.delta), Cell::number(p.g)];
                    if id == FigureId::Fig2 {
                        row.push(num_cell(&rwa.n_b));
                    } else {
                        let full = evaluate(p, Model::Full, allow);
                        row.push(num_cell(&full.n_b));
                        row.push(num_cell(&rwa.n_b));
                        row.push(flag_cell(&full.stable));
                    }
                    row
                })
                .collect();
            Ok(SweepTable { columns, rows })
        }
        FigureId::Fig05 => {
            let columns = cols(&[
                "delta_over_omega_m",
                "var_x_plus",
                "var_y_plus",
                "var_x_minus",
                "var_y_minus",
                "stable",
            ]);
            let points = deltas
                .iter()
                .map(|&d| figure_params(0.5, FIGURE_GAMMA_M, d, 0.2, n_bar))
                .collect::<Result<Vec<_>, _>>()?;
            let rows = points
                .par_iter()
                .map(|p| {
                    let ev = evaluate(p, Model::Full, allow);
                    let mut row = vec![Cell::number(p.delta)];
                    row.extend(variance_cells(&ev.variances));
                    row.push(flag_cell(&ev.stable));
                    row
                })
                .collect();
            Ok(SweepTable { columns, rows })
        }
        FigureId::Fig5 | FigureId::Fig6 => {
            let gs = linspace(SURFACE_G_WINDOW.0, SURFACE_G_WINDOW.1, opts.surface_points);
            let ks = linspace(SURFACE_KAPPA_WINDOW.0, SURFACE_KAPPA_WINDOW.1, opts.surface_points);
            let grid: Vec<(f64, f64)> = gs.iter().flat_map(|&g| ks.iter().map(move |&k| (g, k))).collect();
            if id == FigureId::Fig5 {
                let n_gamma = n_bar * FIGURE_GAMMA_M;
                let columns = cols(&[
                    "g_over_omega_m",
                    "kappa_over_omega_m",
                    "delta_star_over_omega_m",
                    "n_b_min",
                    "n_b_asymptotic",
                ]);
                let rows = grid
                    .par_iter()
                    .map(|&(g, k)| -> Result<Vec<Cell>, SweepError> {
                        let p = figure_params(k, VANISHING_GAMMA_M, -1.0, g, n_gamma / VANISHING_GAMMA_M)?;
                        let mut row = vec![Cell::number(g), Cell::number(k)];
                        match minimize_over_detuning(&p, DETUNING_WINDOW, Model::Full) {
                            Ok(opt) => {
                                row.push(Cell::number(opt.delta_star));
                                row.push(Cell::number(opt.n_b_star));
                            }
                            Err(e) => row.extend(vec![Cell::error(e.name()); 2]),
                        }
                        row.push(min_phonon_asymptotic(k, g, 1.0, n_gamma).map(|a| a.total).into());
                        Ok(row)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(SweepTable { columns, rows })
            } else {
                let columns = cols(&[
                    "g_over_omega_m",
                    "kappa_over_omega_m",
                    "d_positive",
                    "stable",
                    "var_x_plus",
                    "var_y_plus",
                    "var_x_minus",
                    "var_y_minus",
                    "var_y_plus_asymptotic",
                    "var_x_minus_asymptotic",
                ]);
                let rows = grid
                    .par_iter()
                    .map(|&(g, k)| -> Result<Vec<Cell>, SweepError> {
                        let p = figure_params(k, FIGURE_GAMMA_M, -1.0, g, n_bar)?;
                        let d_positive = validity_denominator(k, g, 1.0) > 0.0;
                        let ev = evaluate(&p, Model::Full, allow);
                        let mut row = vec![Cell::number(g), Cell::number(k), Cell::Flag(d_positive), flag_cell(&ev.stable)];
                        if d_positive {
                            row.extend(variance_cells(&ev.variances));
                        } else {
                            row.extend(vec![Cell::error("OutsideValidity"); 4]);
                        }
                        let va = variance_asymptotic(k, g, 1.0, n_bar * FIGURE_GAMMA_M);
                        row.push(va.clone().map(|v| v.var_y_plus).into());
                        row.push(va.map(|v| v.var_x_minus).into());
                        Ok(row)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(SweepTable { columns, rows })
            }
        }
    }
}
