use std::path::Path;
use std::process::{Command, Output};

use optocool_cli::config::{Format, InitialState, ParamEntry, Units};
use optocool_cli::output::{from_csv, to_csv};
use optocool_cli::{parse_config, CliError};
use optocool_core::{to_effective, Cell, DriveConfig, EvolveMethod, ModelChoice, C64};

const MINIMAL: &str = r#"
[effective]
kappa = 0.5
g = 0.2
gamma_m = 1e-5
delta = -1.0
n_bar = 1000.0
"#;

fn optocool(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_optocool"))
        .args(args)
        .current_dir(dir)
        .env_remove("OPTOCOOL_THREADS")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn minimal_config_materializes_defaults() {
    let cfg = parse_config(MINIMAL).unwrap();
    assert_eq!(cfg.command.model, ModelChoice::Full);
    assert!(!cfg.command.allow_unstable);
    assert_eq!(cfg.command.tol, 1e-6);
    assert_eq!(cfg.command.evolve.initial, InitialState::Vacuum);
    assert_eq!(cfg.command.evolve.method, EvolveMethod::Auto);
    assert_eq!(cfg.command.figure.curve_points, 401);
    assert_eq!(cfg.output.format, Format::Csv);
    match cfg.entry {
        ParamEntry::Effective(b) => {
            assert_eq!(b.units, Units::Normalized);
            assert_eq!(b.omega_m, Some(1.0));
            assert_eq!(b.n_bar, Some(1000.0));
        }
        other => panic!("{other:?}"),
    }
    assert_eq!((cfg.params.kappa, cfg.params.g, cfg.params.delta), (0.5, 0.2, -1.0));
}

#[test]
fn both_parameter_blocks_are_a_schema_error() {
    let text = format!("{MINIMAL}\n[drive]\nkappa = 1.0\ngamma_m = 1e-5\ndelta_0 = 1.0\ng0 = 0.01\ndrive_strength = 1.0\nn_bar = 1.0\n");
    let err = parse_config(&text).unwrap_err();
    assert_eq!(err.name(), "SchemaError");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn unknown_keys_report_their_path() {
    let err = parse_config(&MINIMAL.replace("n_bar = 1000.0", "n_bar = 1000.0\ngama_m = 1.0")).unwrap_err();
    match err {
        CliError::Schema { path, reason } => {
            assert_eq!(path, "effective.gama_m");
            assert!(reason.contains("unknown field"));
        }
        other => panic!("{other:?}"),
    }
    let err = parse_config(&format!("{MINIMAL}\n[command.evolve]\npoints = 10\nstep = 1\n")).unwrap_err();
    assert!(matches!(err, CliError::Schema { ref path, .. } if path == "command.evolve.step"), "{err:?}");
}

#[test]
fn out_of_range_values_are_range_errors() {
    let err = parse_config(&MINIMAL.replace("kappa = 0.5", "kappa = -0.5")).unwrap_err();
    assert!(matches!(err, CliError::Range { ref path, .. } if path == "effective.kappa"), "{err:?}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn drive_mode_routes_through_the_working_point() {
    let text = r#"
[drive]
kappa = 0.5
gamma_m = 1e-5
delta_0 = -0.9
g0 = 0.01
drive_strength = 6.0
n_bar = 1000.0
"#;
    let cfg = parse_config(text).unwrap();
    let expected = to_effective(&DriveConfig {
        drive_strength: C64::new(6.0, 0.0),
        delta_0: -0.9,
        g0: 0.01,
        omega_m: 1.0,
        kappa: 0.5,
        gamma_m: 1e-5,
        n_bar: 1000.0,
    })
    .unwrap();
    assert_eq!(cfg.params, expected);
    assert!(cfg.params.delta < -0.9 && cfg.params.g > 0.0);
}

#[test]
fn si_units_with_a_temperature() {
    let text = r#"
[effective]
units = "si"
omega_m = 6.283185307179586e6
kappa = 3.141592653589793e6
gamma_m = 62.83185307179586
delta = -6.283185307179586e6
g = 1.2566370614359172e6
temperature = 0.01
"#;
    let cfg = parse_config(text).unwrap();
    assert!((cfg.params.kappa - 0.5).abs() < 1e-15);
    assert!((cfg.params.g - 0.2).abs() < 1e-15);
    assert!((cfg.params.n_bar - 207.867).abs() < 1e-2, "{}", cfg.params.n_bar);
    let err = parse_config(&MINIMAL.replace("n_bar = 1000.0", "temperature = 1.0")).unwrap_err();
    assert_eq!(err.name(), "SchemaError");
}

#[test]
fn figure2_csv_contract() {
    let dir = tempfile::tempdir().unwrap();
    let out = optocool(&["figure", "fig2", "--out", "fig2.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("fig2.csv")).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("delta_over_omega_m,g_over_omega_m,n_b_rwa"));
    assert_eq!(lines.count(), 2 * 401);
}

#[test]
fn csv_round_trip_keeps_fifteen_digits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sweep.toml",
        &format!(
            "{MINIMAL}\n[command]\nmodel = \"both\"\n[command.sweep]\noutputs = [\"phonon\", \"variances\", \"stability\", \"closed_forms\"]\naxes = [{{ param = \"g\", start = 0.01, stop = 0.7, count = 40 }}]\n"
        ),
    );
    let out = optocool(&["sweep", "--config", &cfg, "--out", "s.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let table = from_csv(&text).unwrap();
    assert_eq!(table.rows.len(), 40);
    assert!(table.rows.iter().flatten().any(|c| c.error_name() == Some("UnstableSystem")));
    let again = from_csv(&to_csv(&table)).unwrap();
    assert_eq!(table, again);
    // The library values survive to 15 significant digits.
    let spec_table = optocool_core::run_sweep(&optocool_core::SweepSpec {
        axes: vec![optocool_core::sweep::Axis::linear(optocool_core::sweep::SweepParam::G, 0.01, 0.7, 40)],
        base: parse_config(MINIMAL).unwrap().params,
        model: ModelChoice::Both,
        outputs: vec![
            optocool_core::sweep::Output::Phonon,
            optocool_core::sweep::Output::Variances,
            optocool_core::sweep::Output::Stability,
            optocool_core::sweep::Output::ClosedForms,
        ],
        allow_unstable: false,
    })
    .unwrap();
    assert_eq!(spec_table.columns, table.columns);
    for (ra, rb) in spec_table.rows.iter().zip(&table.rows) {
        for (a, b) in ra.iter().zip(rb) {
            match (a, b) {
                (Cell::Number(x), Cell::Number(y)) => assert!((x - y).abs() <= 1e-15 * x.abs().max(1e-300)),
                _ => assert_eq!(a, b),
            }
        }
    }
}

#[test]
fn reruns_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "e.toml",
        &format!("{MINIMAL}\n[command.evolve]\nt_end = 40.0\npoints = 21\ninitial = \"thermal\"\n[output]\npath = \"e.json\"\nformat = \"json\"\n"),
    );
    let first = optocool(&["evolve", "--config", &cfg], dir.path());
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    let a = std::fs::read(dir.path().join("e.json")).unwrap();
    assert_eq!(optocool(&["evolve", "--config", &cfg], dir.path()).status.code(), Some(0));
    let b = std::fs::read(dir.path().join("e.json")).unwrap();
    assert_eq!(a, b);
    let doc: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(doc["rows"].as_array().unwrap().len(), 21);
    assert_eq!(doc["meta"]["schema_version"], 1);
    assert_eq!(doc["meta"]["extra"]["method"], "eigen");
    assert_eq!(doc["meta"]["config"]["command"]["evolve"]["initial"], "thermal");
    assert!(doc["meta"]["git_describe"].is_string());
    assert_eq!(doc["columns"][1], "n_a_re");
}

#[test]
fn blue_detuned_steady_state_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "blue.toml",
        "[effective]\nkappa = 0.01\ng = 0.3\ngamma_m = 1e-5\ndelta = 1.0\nn_bar = 1000.0\n",
    );
    let out = optocool(&["steady", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("solve::UnstableSystem"), "{stderr}");
    let forced = optocool(&["steady", "--config", &cfg, "--allow-unstable"], dir.path());
    assert_eq!(forced.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&forced.stdout).contains(",false,"));
}

#[test]
fn check_passes_at_default_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let out = optocool(&["check"], dir.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout.lines().count() >= 8);
    assert!(stdout.lines().all(|l| l.starts_with("PASS")), "{stdout}");
}

#[test]
fn config_problems_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let both = write(
        dir.path(),
        "both.toml",
        &format!("{MINIMAL}\n[drive]\nkappa = 1.0\ngamma_m = 1e-5\ndelta_0 = 1.0\ng0 = 0.01\ndrive_strength = 1.0\nn_bar = 1.0\n"),
    );
    let out = optocool(&["steady", "--config", &both], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cli::SchemaError"));
    assert_eq!(optocool(&["steady"], dir.path()).status.code(), Some(2));
    assert_eq!(optocool(&["steady", "--config", "missing.toml"], dir.path()).status.code(), Some(2));
    assert_eq!(optocool(&["figure", "fig9"], dir.path()).status.code(), Some(2));
    let no_axes = write(dir.path(), "s.toml", MINIMAL);
    assert_eq!(optocool(&["sweep", "--config", &no_axes], dir.path()).status.code(), Some(2));
    let threads = Command::new(env!("CARGO_BIN_EXE_optocool"))
        .args(["check"])
        .current_dir(dir.path())
        .env("OPTOCOOL_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(2));
}

#[test]
fn n_bar_flag_overrides_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "m.toml", MINIMAL);
    let out = optocool(&["steady", "--config", &cfg, "--n-bar", "0", "--format", "json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let cols: Vec<&str> = doc["columns"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    let i = cols.iter().position(|c| *c == "n_bar").unwrap();
    assert_eq!(doc["rows"][0][i], 0.0);
    assert_eq!(doc["meta"]["config"]["params"]["n_bar"], 0.0);
}
