//! Physical parameters of the linearized optomechanical model and the
//! classical working point about which the fluctuations are expanded.
//!
//! All rates and detunings are expressed in units of the mechanical
//! frequency. `omega_m` is carried explicitly so that formulas keep their
//! dimensions visible, but every shipped preset uses `omega_m = 1`.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Reduced Planck constant, J s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K (CODATA 2018, exact).
pub const K_B: f64 = 1.380_649e-23;

/// Below this mechanical quality factor the Markovian bath treatment is
/// questionable and callers should be warned.
pub const MIN_QUALITY_FACTOR: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("bistable working point: the mean-field cubic has {} distinct positive roots {roots:?}", roots.len())]
    BistableWorkingPoint { roots: Vec<f64> },
    #[error("no physical (real, non-negative) root of the mean-field cubic")]
    NoPhysicalRoot,
}

impl ModelError {
    pub fn name(&self) -> &'static str {
        match self {
            ModelError::InvalidParameter { .. } => "InvalidParameter",
            ModelError::BistableWorkingPoint { .. } => "BistableWorkingPoint",
            ModelError::NoPhysicalRoot => "NoPhysicalRoot",
        }
    }
}

fn require(cond: bool, name: &'static str, value: f64, reason: &'static str) -> Result<(), ModelError> {
    if cond && value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter { name, value, reason })
    }
}

/// Parameters of the linearized model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub omega_m: f64,
    pub kappa: f64,
    pub gamma_m: f64,
    /// Effective detuning. The red sideband sits at `delta = -omega_m`.
    pub delta: f64,
    /// Light-enhanced coupling, real and non-negative.
    pub g: f64,
    pub n_bar: f64,
}

impl PhysicalParams {
    pub fn new(
        omega_m: f64,
        kappa: f64,
        gamma_m: f64,
        delta: f64,
        g: f64,
        n_bar: f64,
    ) -> Result<Self, ModelError> {
        let p = Self {
            omega_m,
            kappa,
            gamma_m,
            delta,
            g,
            n_bar,
        };
        p.validate()?;
        Ok(p)
    }

    /// Normalized parameters (`omega_m = 1`).
    pub fn normalized(kappa: f64, gamma_m: f64, delta: f64, g: f64, n_bar: f64) -> Result<Self, ModelError> {
        Self::new(1.0, kappa, gamma_m, delta, g, n_bar)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        require(self.omega_m > 0.0, "omega_m", self.omega_m, "must be > 0")?;
        require(self.kappa > 0.0, "kappa", self.kappa, "must be > 0")?;
        require(self.gamma_m >= 0.0, "gamma_m", self.gamma_m, "must be >= 0")?;
        require(true, "delta", self.delta, "must be finite")?;
        require(self.g >= 0.0, "g", self.g, "must be >= 0")?;
        require(self.n_bar >= 0.0, "n_bar", self.n_bar, "must be >= 0")?;
        Ok(())
    }

    /// Mechanical quality factor `omega_m / gamma_m` (infinite for a lossless resonator).
    pub fn quality_factor(&self) -> f64 {
        self.omega_m / self.gamma_m
    }

    /// Human-readable warnings about regimes where the model is on shaky ground.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let q = self.quality_factor();
        if q < MIN_QUALITY_FACTOR {
            out.push(format!(
                "mechanical quality factor Q_m = {q:.3e} is below {MIN_QUALITY_FACTOR}; the Markovian bath approximation needs Q_m >> 1"
            ));
        }
        out
    }

    pub fn with_delta(self, delta: f64) -> Self {
        Self { delta, ..self }
    }

    pub fn with_g(self, g: f64) -> Self {
        Self { g, ..self }
    }

    pub fn with_kappa(self, kappa: f64) -> Self {
        Self { kappa, ..self }
    }
}

/// Drive-level description of the cavity before linearization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    pub drive_strength: Complex<f64>,
    /// Bare detuning `omega_c - omega_l`.
    pub delta_0: f64,
    pub g0: f64,
    pub omega_m: f64,
    pub kappa: f64,
    pub gamma_m: f64,
    pub n_bar: f64,
}

impl DriveConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        require(self.g0 >= 0.0, "g0", self.g0, "must be >= 0")?;
        require(self.drive_strength.norm().is_finite(), "drive_strength", self.drive_strength.norm(), "must be finite")?;
        require(true, "delta_0", self.delta_0, "must be finite")?;
        PhysicalParams {
            omega_m: self.omega_m,
            kappa: self.kappa,
            gamma_m: self.gamma_m,
            delta: self.delta_0,
            g: 0.0,
            n_bar: self.n_bar,
        }
        .validate()
    }

    /// Static radiation-pressure nonlinearity `g0^2 / omega_m`.
    fn shift_per_photon(&self) -> f64 {
        self.g0 * self.g0 / self.omega_m
    }

    /// Residual of the mean-field self-consistency condition for an
    /// intracavity photon number `n`:
    /// `n (kappa^2/4 + (delta_0 - g0^2 n / omega_m)^2) - |E|^2`.
    pub fn cubic_residual(&self, n: f64) -> f64 {
        let d = self.delta_0 - self.shift_per_photon() * n;
        n * (0.25 * self.kappa * self.kappa + d * d) - self.drive_strength.norm_sqr()
    }
}

/// Mean-field steady state of the driven cavity and mirror.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkingPoint {
    /// `E / (kappa/2 + i delta_eff)`, before the phase is rotated away.
    pub a_s: Complex<f64>,
    pub b_s: f64,
    pub delta_eff: f64,
    pub photon_occupancy: f64,
    pub g_enhanced: f64,
}

/// Bose-Einstein occupation at angular frequency `omega` (rad/s) and
/// temperature `temperature` (K). Zero temperature gives exactly zero.
pub fn thermal_occupation(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    let x = HBAR * omega / (K_B * temperature);
    1.0 / x.exp_m1()
}

/// Bose-Einstein occupation from the dimensionless ratio `hbar omega / (k_B T)`.
pub fn thermal_occupation_from_ratio(x: f64) -> f64 {
    if x.is_infinite() {
        return 0.0;
    }
    1.0 / x.exp_m1()
}

/// Real roots of the monic cubic `x^3 + a x^2 + b x + c`.
fn monic_cubic_real_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    use std::f64::consts::PI;
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = -(4.0 * p * p * p + 27.0 * q * q);
    if disc > 0.0 {
        // p < 0 whenever the discriminant is positive.
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (theta - 2.0 * PI * k as f64 / 3.0).cos() - shift)
            .collect()
    } else {
        let s = (q * q / 4.0 + p * p * p / 27.0).max(0.0).sqrt();
        let t = (-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt();
        vec![t - shift]
    }
}

/// Newton refinement of a root of the monic cubic.
fn polish(a: f64, b: f64, c: f64, mut x: f64) -> f64 {
    for _ in 0..60 {
        let f = ((x + a) * x + b) * x + c;
        let df = (3.0 * x + 2.0 * a) * x + b;
        if df == 0.0 || !f.is_finite() {
            break;
        }
        let step = f / df;
        x -= step;
        if step.abs() <= 1e-16 * x.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    x
}

/// All distinct non-negative roots of the mean-field cubic, ascending.
pub fn working_point_roots(cfg: &DriveConfig) -> Result<Vec<f64>, ModelError> {
    cfg.validate()?;
    let e2 = cfg.drive_strength.norm_sqr();
    let lorentz = 0.25 * cfg.kappa * cfg.kappa + cfg.delta_0 * cfg.delta_0;
    if e2 == 0.0 {
        return Ok(vec![0.0]);
    }
    let chi = cfg.shift_per_photon();
    if chi == 0.0 {
        return Ok(vec![e2 / lorentz]);
    }
    // Rescale n = s x / chi so the monic coefficients are O(1).
    let s = cfg.delta_0.abs().max(0.5 * cfg.kappa);
    let a = -2.0 * cfg.delta_0 / s;
    let b = lorentz / (s * s);
    let c = -chi * e2 / (s * s * s);
    let mut roots: Vec<f64> = monic_cubic_real_roots(a, b, c)
        .into_iter()
        .map(|x| polish(a, b, c, x))
        .filter(|x| x.is_finite() && *x >= 0.0)
        .map(|x| s * x / chi)
        .collect();
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-9 * x.abs().max(y.abs()));
    if roots.is_empty() {
        return Err(ModelError::NoPhysicalRoot);
    }
    Ok(roots)
}

/// Solves the mean-field equations for the unique working point.
pub fn classical_working_point(cfg: &DriveConfig) -> Result<WorkingPoint, ModelError> {
    let roots = working_point_roots(cfg)?;
    if roots.len() > 1 {
        return Err(ModelError::BistableWorkingPoint { roots });
    }
    let n_c = roots[0];
    let chi = cfg.shift_per_photon();
    let delta_eff = cfg.delta_0 - chi * n_c;
    let a_s = if n_c == 0.0 {
        Complex::new(0.0, 0.0)
    } else {
        cfg.drive_strength / Complex::new(0.5 * cfg.kappa, delta_eff)
    };
    Ok(WorkingPoint {
        a_s,
        b_s: cfg.g0 * n_c / cfg.omega_m,
        delta_eff,
        photon_occupancy: n_c,
        g_enhanced: cfg.g0 * n_c.sqrt(),
    })
}

/// Linearized parameters about the unique working point of `cfg`.
pub fn to_effective(cfg: &DriveConfig) -> Result<PhysicalParams, ModelError> {
    let wp = classical_working_point(cfg)?;
    PhysicalParams::new(
        cfg.omega_m,
        cfg.kappa,
        cfg.gamma_m,
        wp.delta_eff,
        wp.g_enhanced,
        cfg.n_bar,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn drive(e: f64, delta_0: f64, g0: f64) -> DriveConfig {
        DriveConfig {
            drive_strength: Complex::new(e, 0.0),
            delta_0,
            g0,
            omega_m: 1.0,
            kappa: 1.0,
            gamma_m: 1e-5,
            n_bar: 10.0,
        }
    }

    #[test]
    fn zero_temperature_is_empty() {
        assert_eq!(thermal_occupation(1.0e7, 0.0), 0.0);
    }

    #[test]
    fn ln2_ratio_gives_one() {
        assert_relative_eq!(thermal_occupation_from_ratio(std::f64::consts::LN_2), 1.0, epsilon = 1e-15);
        let omega = 1.0e9;
        let t = HBAR * omega / (K_B * std::f64::consts::LN_2);
        assert_relative_eq!(thermal_occupation(omega, t), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn room_temperature_megahertz_resonator() {
        let omega = 2.0 * std::f64::consts::PI * 1.0e7;
        let n = thermal_occupation(omega, 300.0);
        let high_t = K_B * 300.0 / (HBAR * omega) - 0.5;
        assert!((n - high_t).abs() / high_t < 1e-3);
        assert!((n - 6.25e5).abs() / 6.25e5 < 5e-3);
    }

    #[test]
    fn decoupled_cavity_is_lorentzian() {
        let cfg = drive(3.0, 0.7, 0.0);
        let wp = classical_working_point(&cfg).unwrap();
        assert_relative_eq!(wp.photon_occupancy, 9.0 / (0.25 + 0.49), max_relative = 1e-15);
        assert_eq!(wp.delta_eff, 0.7);
        assert_eq!(wp.b_s, 0.0);
        let p = to_effective(&cfg).unwrap();
        assert_eq!(p.g, 0.0);
        assert_eq!(p.delta, 0.7);
    }

    #[test]
    fn undriven_cavity() {
        let cfg = drive(0.0, -0.4, 0.3);
        let wp = classical_working_point(&cfg).unwrap();
        assert_eq!(wp.a_s, Complex::new(0.0, 0.0));
        assert_eq!(wp.b_s, 0.0);
        assert_eq!(wp.delta_eff, -0.4);
        assert_eq!(to_effective(&cfg).unwrap().g, 0.0);
    }

    #[test]
    fn working_point_invariants() {
        let cfg = drive(40.0, -1.0, 0.01);
        let wp = classical_working_point(&cfg).unwrap();
        let n = wp.photon_occupancy;
        assert!(cfg.cubic_residual(n).abs() <= 1e-12 * 1600.0);
        assert_relative_eq!(wp.a_s.norm_sqr(), n, max_relative = 1e-12);
        assert_eq!(wp.b_s, cfg.g0 * n / cfg.omega_m);
        assert_eq!(wp.delta_eff, cfg.delta_0 - cfg.g0 * cfg.g0 * n / cfg.omega_m);
        assert!(wp.delta_eff <= cfg.delta_0);
        assert_relative_eq!(wp.g_enhanced, cfg.g0 * wp.a_s.norm(), max_relative = 1e-12);
    }

    #[test]
    fn weak_nonlinearity_keeps_relative_accuracy() {
        let cfg = drive(1.0e-3, 0.5, 1.0e-7);
        let wp = classical_working_point(&cfg).unwrap();
        let linear = 1.0e-6 / (0.25 + 0.25);
        assert_relative_eq!(wp.photon_occupancy, linear, max_relative = 1e-12);
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(matches!(
            PhysicalParams::normalized(0.0, 1e-5, -1.0, 0.1, 1.0),
            Err(ModelError::InvalidParameter { name: "kappa", .. })
        ));
        assert!(matches!(
            PhysicalParams::normalized(0.5, 1e-5, -1.0, -0.1, 1.0),
            Err(ModelError::InvalidParameter { name: "g", .. })
        ));
        assert!(classical_working_point(&drive(1.0, 0.0, -1.0)).is_err());
    }

    #[test]
    fn low_q_warns() {
        let p = PhysicalParams::normalized(0.5, 0.1, -1.0, 0.1, 1.0).unwrap();
        assert_eq!(p.warnings().len(), 1);
        let p = PhysicalParams::normalized(0.5, 1e-5, -1.0, 0.1, 1.0).unwrap();
        assert!(p.warnings().is_empty());
    }
}
