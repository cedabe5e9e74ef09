//! TOML run configuration.
//!
//! A document holds exactly one parameter block, `[effective]` or `[drive]`,
//! plus optional `[command]` and `[output]` tables. Unknown keys are
//! rejected everywhere. After parsing, every optional value is filled in so
//! the resolved [`RunConfig`] records exactly what was run.

use optocool_core::model::ModelError;
use optocool_core::sweep::{Axis, Output};
use optocool_core::{thermal_occupation, C64, to_effective, DriveConfig, EvolveMethod, FigureOptions, ModelChoice, PhysicalParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    /// Rates and detunings in units of the mechanical frequency.
    #[default]
    Normalized,
    /// Rates and detunings in rad/s; `omega_m` is required.
    Si,
}

/// Linearized parameters as written in `[effective]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectiveBlock {
    #[serde(default)]
    pub units: Units,
    pub omega_m: Option<f64>,
    pub kappa: f64,
    pub gamma_m: f64,
    pub delta: f64,
    pub g: f64,
    pub n_bar: Option<f64>,
    /// Bath temperature in kelvin; `units = "si"` only.
    pub temperature: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveBlock {
    #[serde(default)]
    pub units: Units,
    pub omega_m: Option<f64>,
    pub kappa: f64,
    pub gamma_m: f64,
    /// Bare detuning `omega_c - omega_l`.
    pub delta_0: f64,
    pub g0: f64,
    /// Drive amplitude `|E|`.
    pub drive_strength: f64,
    #[serde(default)]
    pub drive_phase: f64,
    pub n_bar: Option<f64>,
    pub temperature: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ParamEntry {
    Effective(EffectiveBlock),
    Drive(DriveBlock),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepBlock {
    pub axes: Vec<Axis>,
    pub outputs: Vec<Output>,
}

impl Default for SweepBlock {
    fn default() -> Self {
        Self {
            axes: Vec::new(),
            outputs: vec![Output::Phonon, Output::Stability],
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    #[default]
    Vacuum,
    /// Cavity empty, mirror at the bath occupation.
    Thermal,
    Steady,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveBlock {
    pub t_end: f64,
    pub points: usize,
    pub initial: InitialState,
    pub method: EvolveMethod,
}

impl Default for EvolveBlock {
    fn default() -> Self {
        Self {
            t_end: 100.0,
            points: 101,
            initial: InitialState::Vacuum,
            method: EvolveMethod::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CommandBlock {
    pub model: ModelChoice,
    pub allow_unstable: bool,
    /// Squeezing tolerance in normalized variance units.
    pub tol: f64,
    pub sweep: SweepBlock,
    pub evolve: EvolveBlock,
    pub figure: FigureOptions,
}

impl Default for CommandBlock {
    fn default() -> Self {
        Self {
            model: ModelChoice::Full,
            allow_unstable: false,
            tol: optocool_core::observables::DEFAULT_SQUEEZING_TOL,
            sweep: SweepBlock::default(),
            evolve: EvolveBlock::default(),
            figure: FigureOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub path: Option<String>,
    pub format: Format,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    effective: Option<EffectiveBlock>,
    drive: Option<DriveBlock>,
    #[serde(default)]
    command: CommandBlock,
    #[serde(default)]
    output: OutputBlock,
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// The parameter block as written, with units, `omega_m` and `n_bar` filled in.
    pub entry: ParamEntry,
    /// Normalized linearized parameters derived from `entry`.
    pub params: PhysicalParams,
    pub command: CommandBlock,
    pub output: OutputBlock,
}

impl RunConfig {
    /// Configuration used when no file is given: the red-sideband point
    /// kappa = 0.5, g = 0.2, gamma_m = 1e-5, n_bar = 1e3.
    pub fn default_point() -> Self {
        let block = EffectiveBlock {
            units: Units::Normalized,
            omega_m: Some(1.0),
            kappa: 0.5,
            gamma_m: 1e-5,
            delta: -1.0,
            g: 0.2,
            n_bar: Some(1e3),
            temperature: None,
        };
        Self {
            entry: ParamEntry::Effective(block),
            params: PhysicalParams::normalized(0.5, 1e-5, -1.0, 0.2, 1e3).expect("valid default"),
            command: CommandBlock::default(),
            output: OutputBlock::default(),
        }
    }

    /// Replaces the bath occupation everywhere it enters.
    pub fn set_n_bar(&mut self, n_bar: f64) -> Result<(), CliError> {
        if !(n_bar.is_finite() && n_bar >= 0.0) {
            return Err(CliError::range("n_bar", format!("{n_bar} must be finite and >= 0")));
        }
        match &mut self.entry {
            ParamEntry::Effective(b) => {
                b.n_bar = Some(n_bar);
                b.temperature = None;
            }
            ParamEntry::Drive(b) => {
                b.n_bar = Some(n_bar);
                b.temperature = None;
            }
        }
        self.params.n_bar = n_bar;
        self.command.figure.n_bar = n_bar;
        Ok(())
    }
}

fn schema(path: impl Into<String>, reason: impl Into<String>) -> CliError {
    CliError::Schema {
        path: path.into(),
        reason: reason.into(),
    }
}

/// Normalizing frequency and bath occupation shared by both blocks.
fn resolve_bath(
    block: &str,
    units: Units,
    omega_m: Option<f64>,
    n_bar: Option<f64>,
    temperature: Option<f64>,
) -> Result<(f64, f64), CliError> {
    let scale = match (units, omega_m) {
        (Units::Normalized, None) => 1.0,
        (Units::Normalized, Some(1.0)) => 1.0,
        (Units::Normalized, Some(_)) => {
            return Err(CliError::range(
                format!("{block}.omega_m"),
                "normalized units fix omega_m = 1; set units = \"si\" to give a physical frequency",
            ))
        }
        (Units::Si, None) => return Err(schema(format!("{block}.omega_m"), "required when units = \"si\"")),
        (Units::Si, Some(w)) if w.is_finite() && w > 0.0 => w,
        (Units::Si, Some(w)) => return Err(CliError::range(format!("{block}.omega_m"), format!("{w} must be > 0"))),
    };
    let n = match (n_bar, temperature) {
        (Some(_), Some(_)) => return Err(schema(block, "give either n_bar or temperature, not both")),
        (None, None) => return Err(schema(format!("{block}.n_bar"), "missing field (or give temperature)")),
        (Some(n), None) => n,
        (None, Some(t)) => {
            if units != Units::Si {
                return Err(schema(format!("{block}.temperature"), "requires units = \"si\" and a physical omega_m"));
            }
            if !(t.is_finite() && t >= 0.0) {
                return Err(CliError::range(format!("{block}.temperature"), format!("{t} must be >= 0")));
            }
            thermal_occupation(scale, t)
        }
    };
    Ok((scale, n))
}

fn range_from_model(block: &str, e: ModelError) -> CliError {
    match e {
        ModelError::InvalidParameter { name, value, reason } => CliError::range(format!("{block}.{name}"), format!("{value}: {reason}")),
        other => CliError::Domain(other.into()),
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let de = toml::Deserializer::parse(text).map_err(|e| schema("", e.message().to_string()))?;
    let doc: Document = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema(if path == "." { String::new() } else { path }, e.inner().message().to_string())
    })?;

    let (entry, params) = match (doc.effective, doc.drive) {
        (Some(_), Some(_)) => return Err(schema("", "exactly one of [effective] or [drive] may be given, found both")),
        (None, None) => return Err(schema("", "missing parameter block: give [effective] or [drive]")),
        (Some(b), None) => {
            let (w, n) = resolve_bath("effective", b.units, b.omega_m, b.n_bar, b.temperature)?;
            let p = PhysicalParams::normalized(b.kappa / w, b.gamma_m / w, b.delta / w, b.g / w, n)
                .map_err(|e| range_from_model("effective", e))?;
            let resolved = EffectiveBlock {
                omega_m: Some(b.omega_m.unwrap_or(1.0)),
                n_bar: Some(n),
                ..b
            };
            (ParamEntry::Effective(resolved), p)
        }
        (None, Some(b)) => {
            let (w, n) = resolve_bath("drive", b.units, b.omega_m, b.n_bar, b.temperature)?;
            if !(b.drive_strength.is_finite() && b.drive_strength >= 0.0) {
                return Err(CliError::range("drive.drive_strength", format!("{} must be >= 0", b.drive_strength)));
            }
            let cfg = DriveConfig {
                drive_strength: C64::from_polar(b.drive_strength / w, b.drive_phase),
                delta_0: b.delta_0 / w,
                g0: b.g0 / w,
                omega_m: 1.0,
                kappa: b.kappa / w,
                gamma_m: b.gamma_m / w,
                n_bar: n,
            };
            let p = to_effective(&cfg).map_err(|e| range_from_model("drive", e))?;
            let resolved = DriveBlock {
                omega_m: Some(b.omega_m.unwrap_or(1.0)),
                n_bar: Some(n),
                ..b
            };
            (ParamEntry::Drive(resolved), p)
        }
    };
    for w in params.warnings() {
        log::warn!("{w}");
    }

    let c = &doc.command;
    if !(c.tol.is_finite() && c.tol >= 0.0) {
        return Err(CliError::range("command.tol", format!("{} must be >= 0", c.tol)));
    }
    let e = &c.evolve;
    if !(e.t_end.is_finite() && e.t_end > 0.0) {
        return Err(CliError::range("command.evolve.t_end", format!("{} must be > 0", e.t_end)));
    }
    if e.points < 2 {
        return Err(CliError::range("command.evolve.points", format!("{} must be >= 2", e.points)));
    }
    let f = &c.figure;
    if !(f.n_bar.is_finite() && f.n_bar >= 0.0) {
        return Err(CliError::range("command.figure.n_bar", format!("{} must be >= 0", f.n_bar)));
    }
    if f.curve_points < 2 || f.surface_points < 2 {
        return Err(CliError::range("command.figure", "curve_points and surface_points must be >= 2"));
    }
    for (i, axis) in c.sweep.axes.iter().enumerate() {
        axis.validate().map_err(|e| CliError::range(format!("command.sweep.axes[{i}]"), e.to_string()))?;
    }

    Ok(RunConfig {
        entry,
        params,
        command: doc.command,
        output: doc.output,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "[effective]\nkappa = 0.5\ng = 0.2\ngamma_m = 1e-5\ndelta = -1.0\nn_bar = 1000.0\n";

    #[test]
    fn default_point_reparses_to_itself() {
        let cfg = RunConfig::default_point();
        let mut table = toml::Table::new();
        table.insert("command".into(), toml::Value::try_from(&cfg.command).unwrap());
        let parsed = parse_config(&format!("{BASE}\n{}", toml::to_string(&table).unwrap())).unwrap();
        assert_eq!(parsed.params, cfg.params);
        assert_eq!(parsed.command, cfg.command);
    }

    #[test]
    fn bath_resolution() {
        assert!(matches!(
            parse_config(&BASE.replace("n_bar = 1000.0", "")),
            Err(CliError::Schema { ref path, .. }) if path == "effective.n_bar"
        ));
        let both = BASE.replace("n_bar = 1000.0", "n_bar = 1.0\ntemperature = 1.0\nunits = \"si\"\nomega_m = 1.0");
        assert_eq!(parse_config(&both).unwrap_err().name(), "SchemaError");
        let normalized_w = BASE.replace("n_bar = 1000.0", "n_bar = 1.0\nomega_m = 2.0");
        assert!(matches!(parse_config(&normalized_w), Err(CliError::Range { ref path, .. }) if path == "effective.omega_m"));
        let si = BASE.replace("n_bar = 1000.0", "n_bar = 1.0\nunits = \"si\"");
        assert!(matches!(parse_config(&si), Err(CliError::Schema { ref path, .. }) if path == "effective.omega_m"));
    }

    #[test]
    fn command_ranges() {
        for (extra, path) in [
            ("[command]\ntol = -1.0\n", "command.tol"),
            ("[command.evolve]\npoints = 1\n", "command.evolve.points"),
            ("[command.evolve]\nt_end = 0.0\n", "command.evolve.t_end"),
        ] {
            let err = parse_config(&format!("{BASE}\n{extra}")).unwrap_err();
            assert!(matches!(err, CliError::Range { path: ref p, .. } if p == path), "{extra}: {err:?}");
        }
    }

    #[test]
    fn set_n_bar_updates_every_copy() {
        let mut cfg = parse_config(BASE).unwrap();
        cfg.set_n_bar(3.0).unwrap();
        assert_eq!((cfg.params.n_bar, cfg.command.figure.n_bar), (3.0, 3.0));
        assert!(matches!(cfg.entry, ParamEntry::Effective(EffectiveBlock { n_bar: Some(n), .. }) if n == 3.0));
        assert!(cfg.set_n_bar(f64::NAN).is_err());
    }
}
