//! Subcommand implementations. Each produces a table plus optional
//! provenance for the JSON `meta` block.

use optocool_core::observables::{validity_denominator, DEFAULT_SQUEEZING_TOL};
use optocool_core::sweep::{FIGURE_GAMMA_M, SURFACE_G_WINDOW, SURFACE_KAPPA_WINDOW};
use optocool_core::*;
use serde_json::{json, Map, Value};

use crate::config::{InitialState, RunConfig};
use crate::error::CliError;
use crate::output::{complex_cells, complex_columns};

/// What a command hands back for serialization.
pub struct Artifact {
    pub table: SweepTable,
    pub extra: Map<String, Value>,
}

impl Artifact {
    fn plain(table: SweepTable) -> Self {
        Self { table, extra: Map::new() }
    }
}

fn param_columns(p: &PhysicalParams) -> (Vec<String>, Vec<Cell>) {
    let names = ["kappa", "gamma_m", "delta", "g", "n_bar"];
    let values = [p.kappa, p.gamma_m, p.delta, p.g, p.n_bar];
    (names.iter().map(|s| s.to_string()).collect(), values.iter().map(|&x| Cell::number(x)).collect())
}

fn cell<T, E: Into<Error>>(r: Result<T, E>, f: impl FnOnce(T) -> f64) -> Cell {
    match r {
        Ok(v) => Cell::number(f(v)),
        Err(e) => Cell::error(e.into().name()),
    }
}

/// One-point report: occupations, variances, squeezing verdicts, the
/// spectral abscissa, all ten moments and the closed-form comparisons.
pub fn steady(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let p = cfg.params;
    let tol = cfg.command.tol;
    let (mut columns, mut row) = param_columns(&p);
    let opts = SteadyOptions {
        allow_unstable: cfg.command.allow_unstable,
    };
    for model in cfg.command.model.models() {
        let m = model.suffix();
        let ss = steady_state_with(&model.system(&p), opts)?;
        let v = variances(&ss.moments)?;
        columns.extend(
            [
                "stable",
                "max_real_part",
                "n_b",
                "n_a",
                "var_x_plus",
                "var_y_plus",
                "var_x_minus",
                "var_y_minus",
                "d_plus",
                "d_minus",
                "residual",
                "symmetrization_delta",
            ]
            .iter()
            .map(|c| format!("{c}_{m}")),
        );
        row.extend([
            Cell::Flag(ss.stability.stable),
            Cell::number(ss.stability.max_real_part),
            cell(phonon_number(&ss.moments), |x| x),
            cell(photon_number(&ss.moments), |x| x),
            Cell::number(v.var_x_plus),
            Cell::number(v.var_y_plus),
            Cell::number(v.var_x_minus),
            Cell::number(v.var_y_minus),
            Cell::Text(classify_field(&v, Field::Plus, tol).classification.name().into()),
            Cell::Text(classify_field(&v, Field::Minus, tol).classification.name().into()),
            Cell::number(ss.residual),
            Cell::number(ss.symmetrization_delta),
        ]);
        for mo in Moment::ALL {
            columns.extend(complex_columns(&format!("{}_{m}", mo.label())));
            row.extend(complex_cells(ss.moments[mo]));
        }
    }
    let n_gamma = p.n_bar * p.gamma_m;
    let asym = min_phonon_asymptotic(p.kappa, p.g, p.omega_m, n_gamma);
    let vasym = variance_asymptotic(p.kappa, p.g, p.omega_m, n_gamma);
    columns.extend(
        [
            "n_b_rwa_closed_form",
            "n_b_rwa_resonant",
            "n_b_asymptotic",
            "n_b_asymptotic_dissipation",
            "n_b_asymptotic_backaction",
            "var_y_plus_asymptotic",
            "var_x_minus_asymptotic",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    row.extend([
        cell(rwa_phonon_closed_form(&p), |x| x),
        cell(rwa_resonant_phonon(&p), |x| x),
        cell(asym.clone(), |a| a.total),
        cell(asym.clone(), |a| a.dissipation),
        cell(asym, |a| a.backaction),
        cell(vasym.clone(), |v| v.var_y_plus),
        cell(vasym, |v| v.var_x_minus),
    ]);
    let mut table = SweepTable::new(columns);
    table.rows.push(row);
    Ok(Artifact::plain(table))
}

pub fn sweep(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let spec = SweepSpec {
        axes: cfg.command.sweep.axes.clone(),
        base: cfg.params,
        model: cfg.command.model,
        outputs: cfg.command.sweep.outputs.clone(),
        allow_unstable: cfg.command.allow_unstable,
    };
    match run_sweep(&spec) {
        Ok(t) => Ok(Artifact::plain(t)),
        Err(SweepError::InvalidSpec(reason)) => Err(CliError::range("command.sweep", reason)),
        Err(e) => Err(e.into()),
    }
}

pub fn evolve(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let model = match cfg.command.model {
        ModelChoice::Rwa => Model::Rwa,
        ModelChoice::Full => Model::Full,
        ModelChoice::Both => return Err(CliError::range("command.model", "evolve needs a single model, not `both`")),
    };
    let p = cfg.params;
    let sys = model.system(&p);
    let e = cfg.command.evolve;
    let mu0 = match e.initial {
        InitialState::Vacuum => MomentVector::zero(),
        InitialState::Thermal => MomentVector::thermal(p.n_bar),
        InitialState::Steady => {
            steady_state_with(
                &sys,
                SteadyOptions {
                    allow_unstable: cfg.command.allow_unstable,
                },
            )?
            .moments
        }
    };
    let grid: Vec<f64> = (0..e.points).map(|i| e.t_end * i as f64 / (e.points - 1) as f64).collect();
    let traj = evolve_with(&sys, &mu0, &grid, e.method)?;

    let mut columns = vec!["t".to_string()];
    for mo in Moment::ALL {
        columns.extend(complex_columns(mo.label()));
    }
    let mut table = SweepTable::new(columns);
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![Cell::number(*t)];
        for mo in Moment::ALL {
            row.extend(complex_cells(s[mo]));
        }
        table.rows.push(row);
    }
    let mut extra = Map::new();
    extra.insert("method".into(), json!(traj.method));
    extra.insert("params_hash".into(), json!(format!("{:016x}", traj.params_hash)));
    extra.insert("model".into(), json!(model));
    Ok(Artifact { table, extra })
}

pub fn figure(cfg: &RunConfig, id: FigureId) -> Result<Artifact, CliError> {
    let mut opts = cfg.command.figure;
    opts.allow_unstable |= cfg.command.allow_unstable;
    let table = figure_dataset(id, &opts)?;
    let mut extra = Map::new();
    extra.insert("figure".into(), json!(id.name()));
    Ok(Artifact { table, extra })
}

/// Outcome of one self-check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub value: f64,
    pub bound: f64,
    pub note: String,
}

fn check(name: &'static str, value: f64, bound: f64, note: impl Into<String>) -> CheckResult {
    CheckResult {
        name,
        pass: value <= bound,
        value,
        bound,
        note: note.into(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn log_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Log-spaced grid over kappa, g in [1e-3, 1], gamma_m in [1e-7, 1e-3] and n_bar in [1, 1e4].
fn oracle_grid() -> Vec<PhysicalParams> {
    let mut out = Vec::new();
    for &k in &log_points(1e-3, 1.0, 4) {
        for &g in &log_points(1e-3, 1.0, 4) {
            for &gm in &log_points(1e-7, 1e-3, 3) {
                for &n in &log_points(1.0, 1e4, 3) {
                    out.push(PhysicalParams::normalized(k, gm, -1.0, g, n).expect("grid is valid"));
                }
            }
        }
    }
    out
}

/// Runs the oracle-equivalence and invariant checks around `cfg.params`.
pub fn self_check(cfg: &RunConfig) -> Result<Vec<CheckResult>, CliError> {
    let p = cfg.params;
    let mut out = Vec::new();

    let grid = oracle_grid();
    let mut worst = 0.0f64;
    let mut used = 0;
    for base in &grid {
        for d in [-1.7, -1.0, -0.4] {
            let q = base.with_delta(d);
            if let Ok(ss) = steady_state(&build_rwa_system(&q)) {
                used += 1;
                worst = worst.max(rel(phonon_number(&ss.moments)?, rwa_phonon_closed_form(&q)?));
            }
        }
    }
    out.push(check("rwa_oracle", worst, 1e-9, format!("{used} stable grid points")));

    let worst = grid
        .iter()
        .map(|q| Ok(rel(rwa_phonon_closed_form(q)?, rwa_resonant_phonon(q)?)))
        .collect::<Result<Vec<f64>, ObservableError>>()?
        .into_iter()
        .fold(0.0, f64::max);
    out.push(check("resonant_reduction", worst, 1e-12, format!("{} grid points", grid.len())));

    let red = p.with_delta(-p.omega_m);
    let n_gamma = p.n_bar * p.gamma_m;
    if validity_denominator(p.kappa, p.g, p.omega_m) > 0.0 && p.g > 0.0 {
        let ss = steady_state(&build_full_system(&red))?;
        let a = min_phonon_asymptotic(p.kappa, p.g, p.omega_m, n_gamma)?;
        let nb = phonon_number(&ss.moments)?;
        out.push(check("asymptotic_minimum", rel(nb, a.total), 0.05, format!("N_b = {nb:.6}, asymptotic {:.6}", a.total)));
        let v = variances(&ss.moments)?;
        let va = variance_asymptotic(p.kappa, p.g, p.omega_m, n_gamma)?;
        let dev = rel(v.var_y_plus, va.var_y_plus).max(rel(v.var_x_minus, va.var_x_minus));
        out.push(check(
            "variance_oracle",
            dev,
            0.05,
            format!("var_y_plus = {:.6}, var_x_minus = {:.6}", v.var_y_plus, v.var_x_minus),
        ));
    }

    let n = 21;
    let axis = |w: (f64, f64), i: usize| w.0 + (w.1 - w.0) * i as f64 / (n - 1) as f64;
    let mut floor = f64::INFINITY;
    let mut min_var = f64::INFINITY;
    for i in 0..n {
        for j in 0..n {
            let q = PhysicalParams::normalized(axis(SURFACE_KAPPA_WINDOW, j), FIGURE_GAMMA_M, -1.0, axis(SURFACE_G_WINDOW, i), p.n_bar)?;
            if let Ok(ss) = steady_state(&build_full_system(&q)) {
                let v = variances(&ss.moments)?;
                let (a, b) = v.uncertainty_products();
                floor = floor.min(a.min(b));
                min_var = min_var.min(v.min());
            }
        }
    }
    out.push(check(
        "uncertainty_floor",
        0.25 - floor,
        1e-9,
        format!("smallest product {floor:.9}, smallest variance {min_var:.6}"),
    ));

    let free = PhysicalParams { g: 0.0, ..p };
    let mu = steady_state(&build_full_system(&free))?.moments;
    let v = variances(&mu)?;
    let target = 0.5 * (1.0 + p.n_bar);
    let dev = [v.var_x_plus, v.var_y_plus, v.var_x_minus, v.var_y_minus]
        .into_iter()
        .map(|x| rel(x, target))
        .fold(rel(phonon_number(&mu)?, p.n_bar).max(photon_number(&mu)?.abs()), f64::max);
    out.push(check("decoupled_exactness", dev, 1e-12, "g = 0"));

    let sys = build_full_system(&p);
    let report = stability(&sys)?;
    if report.stable {
        let t_end = 20.0 / report.max_real_part.abs();
        let t: Vec<f64> = (0..50).map(|i| t_end * i as f64 / 49.0).collect();
        let ss = steady_state(&sys)?;
        let e = evolve_with(&sys, &MomentVector::zero(), &t, EvolveMethod::Eigen);
        let a = evolve_with(&sys, &MomentVector::zero(), &t, EvolveMethod::Adaptive)?;
        match e {
            Ok(e) => {
                let scale = 1.0 + e.states.iter().map(|s| s.max_abs()).fold(0.0, f64::max);
                let gap = e.states.iter().zip(&a.states).map(|(x, y)| x.sup_distance(y)).fold(0.0, f64::max);
                out.push(check("propagator_consistency", gap / scale, 1e-8, format!("t in [0, {t_end:.4}]")));
            }
            Err(SolveError::NotDiagonalizable { .. }) => {
                log::warn!("drift matrix not diagonalizable; propagator comparison skipped");
            }
            Err(err) => return Err(err.into()),
        }
        out.push(check(
            "relaxation_to_steady_state",
            a.last().sup_distance(&ss.moments),
            1e-6,
            "vacuum start, T = 20/|max Re lambda|",
        ));
        out.push(check("steady_residual", ss.residual, 1e-10 * (1.0 + p.gamma_m * p.n_bar + p.g), "|A mu + B|_inf"));
        let thermal = MomentVector::thermal(p.n_bar);
        let traj = optocool_core::evolve(&sys, &thermal, &t)?;
        let defect = traj
            .states
            .iter()
            .map(|s| s.pairing_defect() / (1.0 + s.max_abs()))
            .fold(0.0, f64::max);
        out.push(check("hermiticity_preservation", defect, 1e-8, "thermal start"));
    } else {
        log::warn!("configured point is unstable; dynamics checks skipped");
    }

    let vac = variances(&MomentVector::zero())?;
    let verdict = classify_field(&vac, Field::Plus, DEFAULT_SQUEEZING_TOL);
    out.push(CheckResult {
        name: "vacuum_classification",
        pass: verdict.classification == FieldKind::CoherentOrVacuum,
        value: verdict.margin.abs(),
        bound: DEFAULT_SQUEEZING_TOL,
        note: verdict.classification.name().into(),
    });
    Ok(out)
}

pub fn check_table(results: &[CheckResult]) -> SweepTable {
    let mut t = SweepTable::new(["check", "pass", "value", "bound"].iter().map(|s| s.to_string()).collect());
    for r in results {
        t.rows.push(vec![Cell::Text(r.name.into()), Cell::Flag(r.pass), Cell::number(r.value), Cell::number(r.bound)]);
    }
    t
}
