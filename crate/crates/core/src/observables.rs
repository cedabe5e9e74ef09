//! Physical read-outs of a moment vector and closed-form limits of the
//! steady state used to cross-check the numerics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::PhysicalParams;
use crate::moments::{pairing_tolerance, Moment, MomentVector, C64};

/// Allowed negative excursion of an occupation number.
pub const OCCUPATION_FLOOR: f64 = -1e-9;
/// Relative tolerance of the hermiticity and reality checks.
pub const HERMITICITY_TOL: f64 = 1e-9;
pub const DEFAULT_SQUEEZING_TOL: f64 = 1e-6;
/// Vacuum level of a quadrature variance.
pub const VACUUM_VARIANCE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObservableError {
    #[error("negative occupation {value:.3e}")]
    NegativeOccupation { value: f64 },
    #[error("closed form denominator {value:.3e} is degenerate")]
    DegenerateDenominator { value: f64 },
    #[error("outside validity of the asymptotic expression: {reason}")]
    OutsideValidity { reason: String },
    #[error("moment vector violates conjugate pairing (defect {defect:.3e}, tolerance {tolerance:.3e})")]
    NonHermitianInput { defect: f64, tolerance: f64 },
}

impl ObservableError {
    pub fn name(&self) -> &'static str {
        match self {
            ObservableError::NegativeOccupation { .. } => "NegativeOccupation",
            ObservableError::DegenerateDenominator { .. } => "DegenerateDenominator",
            ObservableError::OutsideValidity { .. } => "OutsideValidity",
            ObservableError::NonHermitianInput { .. } => "NonHermitianInput",
        }
    }
}

/// Mean phonon number `<b^dag b>`.
pub fn phonon_number(mu: &MomentVector) -> Result<f64, ObservableError> {
    occupation(mu, Moment::PhononNumber)
}

/// Mean intracavity photon number `<a^dag a>`.
pub fn photon_number(mu: &MomentVector) -> Result<f64, ObservableError> {
    occupation(mu, Moment::PhotonNumber)
}

fn occupation(mu: &MomentVector, m: Moment) -> Result<f64, ObservableError> {
    let value = mu[m].re;
    if value < OCCUPATION_FLOOR {
        return Err(ObservableError::NegativeOccupation { value });
    }
    Ok(value)
}

/// Steady-state phonon number of the beam-splitter model at arbitrary detuning.
pub fn rwa_phonon_closed_form(p: &PhysicalParams) -> Result<f64, ObservableError> {
    let PhysicalParams {
        omega_m,
        kappa: k,
        gamma_m: gm,
        delta,
        g,
        n_bar,
    } = *p;
    let d = delta + omega_m;
    let g2 = g * g;
    let num = k * k * (k + 2.0 * gm) + k * (gm * gm + 4.0 * g2 + 4.0 * d * d) + 4.0 * g2 * gm;
    let den = gm * k.powi(3)
        + (4.0 * g2 + 2.0 * gm * gm) * k * k
        + (gm * gm + 8.0 * g2 + 4.0 * d * d) * gm * k
        + 4.0 * g2 * gm * gm;
    if den < 1e-30 {
        return Err(ObservableError::DegenerateDenominator { value: den });
    }
    Ok(n_bar * gm * num / den)
}

/// The same closed form on the red sideband, `delta = -omega_m`.
pub fn rwa_resonant_phonon(p: &PhysicalParams) -> Result<f64, ObservableError> {
    let PhysicalParams {
        kappa: k,
        gamma_m: gm,
        g,
        n_bar,
        ..
    } = *p;
    let den = 4.0 * g * g + gm * k;
    if den == 0.0 {
        return Err(ObservableError::DegenerateDenominator { value: den });
    }
    Ok(n_bar * gm / (gm + k) * (1.0 + k * k / den))
}

/// `4 omega_m^2 + kappa^2 - 16 g^2`; the asymptotic expressions need it positive.
pub fn validity_denominator(kappa: f64, g: f64, omega_m: f64) -> f64 {
    4.0 * omega_m * omega_m + kappa * kappa - 16.0 * g * g
}

fn check_asymptotic_domain(kappa: f64, g: f64, omega_m: f64) -> Result<f64, ObservableError> {
    if !(kappa > 0.0) {
        return Err(ObservableError::OutsideValidity {
            reason: format!("kappa = {kappa} must be > 0"),
        });
    }
    if !(g > 0.0) {
        return Err(ObservableError::OutsideValidity {
            reason: format!("g = {g} must be > 0"),
        });
    }
    let d = validity_denominator(kappa, g, omega_m);
    if !(d > 0.0) {
        return Err(ObservableError::OutsideValidity {
            reason: format!("4 omega_m^2 + kappa^2 - 16 g^2 = {d:.6e} <= 0"),
        });
    }
    Ok(d)
}

/// Red-sideband phonon number for `gamma_m -> 0` at fixed `gamma_m n_bar`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticPhonon {
    /// Contribution of the mechanical bath, proportional to `gamma_m n_bar`.
    pub dissipation: f64,
    /// Quantum backaction heating from the cavity.
    pub backaction: f64,
    pub total: f64,
    pub beta: f64,
}

pub fn min_phonon_asymptotic(kappa: f64, g: f64, omega_m: f64, n_gamma: f64) -> Result<AsymptoticPhonon, ObservableError> {
    let d = check_asymptotic_domain(kappa, g, omega_m)?;
    let (k2, g2, w2) = (kappa * kappa, g * g, omega_m * omega_m);
    let beta = 8.0 * g2 * (k2 + 4.0 * w2) / d;
    let dissipation = n_gamma / (64.0 * kappa * g2 * w2) * (k2 * k2 + 16.0 * w2 * (k2 + 4.0 * g2) + 8.0 * g2 * beta);
    let backaction = (k2 + beta) / (16.0 * w2);
    Ok(AsymptoticPhonon {
        dissipation,
        backaction,
        total: dissipation + backaction,
        beta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceSet {
    pub var_x_plus: f64,
    pub var_y_plus: f64,
    pub var_x_minus: f64,
    pub var_y_minus: f64,
}

impl VarianceSet {
    /// `(Var X_{d+} Var Y_{d+}, Var X_{d-} Var Y_{d-})`.
    pub fn uncertainty_products(&self) -> (f64, f64) {
        (self.var_x_plus * self.var_y_plus, self.var_x_minus * self.var_y_minus)
    }

    pub fn pair(&self, field: Field) -> (f64, f64) {
        match field {
            Field::Plus => (self.var_x_plus, self.var_y_plus),
            Field::Minus => (self.var_x_minus, self.var_y_minus),
        }
    }

    pub fn min(&self) -> f64 {
        [self.var_x_plus, self.var_y_plus, self.var_x_minus, self.var_y_minus]
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Quadrature variances of the hybrid modes `d+- = (a +- b)/sqrt 2`.
pub fn variances(mu: &MomentVector) -> Result<VarianceSet, ObservableError> {
    let tolerance = pairing_tolerance(mu, HERMITICITY_TOL);
    let defect = mu.pairing_defect();
    if defect > tolerance {
        return Err(ObservableError::NonHermitianInput { defect, tolerance });
    }
    let m = |k: usize| mu.0[k - 1];
    let sum = |r: std::ops::RangeInclusive<usize>| r.map(m).sum::<C64>();
    let occupations = sum(1..=2);
    let beam = sum(3..=4);
    let pair = sum(5..=6);
    let single = sum(7..=10);

    let one = C64::new(1.0, 0.0);
    let raw = [
        (one + occupations + beam + pair + single * 0.5) * 0.5,
        (one + occupations + beam - pair - single * 0.5) * 0.5,
        (one + occupations - beam - pair + single * 0.5) * 0.5,
        (one + occupations - beam + pair - single * 0.5) * 0.5,
    ];
    for z in &raw {
        if z.im.abs() > tolerance {
            return Err(ObservableError::NonHermitianInput {
                defect: z.im.abs(),
                tolerance,
            });
        }
    }
    Ok(VarianceSet {
        var_x_plus: raw[0].re,
        var_y_plus: raw[1].re,
        var_x_minus: raw[2].re,
        var_y_minus: raw[3].re,
    })
}

/// Red-sideband variances of `Y_{d+}` and `X_{d-}` for `gamma_m -> 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticVariances {
    pub var_y_plus: f64,
    pub var_x_minus: f64,
    pub h1: f64,
    pub h2: f64,
    pub d: f64,
    /// Coupling-induced reduction below vacuum shared by both expressions.
    pub reduction: f64,
}

pub fn variance_asymptotic(kappa: f64, g: f64, omega_m: f64, n_gamma: f64) -> Result<AsymptoticVariances, ObservableError> {
    let d = check_asymptotic_domain(kappa, g, omega_m)?;
    let (k2, g2, w2) = (kappa * kappa, g * g, omega_m * omega_m);
    let reduction = g / (2.0 * omega_m) - k2 / (32.0 * w2) * (1.0 + 16.0 * g2 / d);
    let beam = 4.0 * g2 / d * (omega_m - 2.0 * g);
    let h1 = (1.0 - g / omega_m) / kappa
        + kappa / (8.0 * g) * (1.0 / g - 1.0 / omega_m)
        + kappa / (16.0 * w2) * (1.0 + k2 / (8.0 * g2) + 16.0 * g2 / d);
    let h2 = h1 + 8.0 * g2 * (omega_m - 2.0 * g) / (kappa * omega_m * d);
    Ok(AsymptoticVariances {
        var_y_plus: VACUUM_VARIANCE - reduction + n_gamma * h1,
        var_x_minus: VACUUM_VARIANCE - (reduction - beam) + n_gamma * h2,
        h1,
        h2,
        d,
        reduction,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Field {
    #[serde(rename = "d+")]
    Plus,
    #[serde(rename = "d-")]
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Squeezed,
    CoherentOrVacuum,
    Chaotic,
    Mixed,
}

impl FieldKind {
    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Squeezed => "squeezed",
            FieldKind::CoherentOrVacuum => "coherent_or_vacuum",
            FieldKind::Chaotic => "chaotic",
            FieldKind::Mixed => "mixed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quadrature {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezingVerdict {
    pub field: Field,
    pub classification: FieldKind,
    pub squeezed_quadrature: Option<Quadrature>,
    /// `1/2 - min(Var X, Var Y)`; positive when squeezed.
    pub margin: f64,
}

pub fn classify_field(vs: &VarianceSet, field: Field, tol: f64) -> SqueezingVerdict {
    let (vx, vy) = vs.pair(field);
    let lo = vx.min(vy);
    let near = |v: f64| (v - VACUUM_VARIANCE).abs() <= tol;
    let classification = if lo < VACUUM_VARIANCE - tol {
        FieldKind::Squeezed
    } else if near(vx) && near(vy) {
        FieldKind::CoherentOrVacuum
    } else if vx > VACUUM_VARIANCE + tol && vy > VACUUM_VARIANCE + tol {
        FieldKind::Chaotic
    } else {
        FieldKind::Mixed
    };
    let squeezed_quadrature = (classification == FieldKind::Squeezed).then_some(if vx <= vy {
        Quadrature::X
    } else {
        Quadrature::Y
    });
    SqueezingVerdict {
        field,
        classification,
        squeezed_quadrature,
        margin: VACUUM_VARIANCE - lo,
    }
}
