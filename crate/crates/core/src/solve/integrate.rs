//! Embedded Dormand-Prince 5(4) integrator for the linear moment flow.

use super::SolveError;
use crate::moments::{DriftSystem, MomentColumn, C64};

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Step floor relative to the integration span.
    pub min_step_fraction: f64,
    pub max_steps: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            min_step_fraction: 1e-14,
            max_steps: 50_000_000,
        }
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Fifth-order weights minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Dormand-Prince stepper bound to one drift system.
pub struct DormandPrince<'a> {
    system: &'a DriftSystem,
    opts: AdaptiveOptions,
    step: f64,
    /// First-same-as-last derivative carried between accepted steps.
    k1: Option<MomentColumn>,
}

impl<'a> DormandPrince<'a> {
    pub fn new(system: &'a DriftSystem, opts: AdaptiveOptions) -> Self {
        Self {
            system,
            opts,
            step: 0.0,
            k1: None,
        }
    }

    fn f(&self, y: &MomentColumn) -> MomentColumn {
        self.system.a * y + self.system.b
    }

    fn error_norm(&self, y: &MomentColumn, y_new: &MomentColumn, err: &MomentColumn) -> f64 {
        let sum: f64 = (0..y.len())
            .map(|i| {
                let sc = self.opts.atol + self.opts.rtol * y[i].norm().max(y_new[i].norm());
                (err[i].norm() / sc).powi(2)
            })
            .sum();
        (sum / y.len() as f64).sqrt()
    }

    /// Advances `y` from `t0` to exactly `t1`. `span` is the full
    /// integration interval used for the step floor.
    pub fn advance(&mut self, y: &mut MomentColumn, t0: f64, t1: f64, span: f64) -> Result<(), SolveError> {
        let min_step = self.opts.min_step_fraction * span;
        if self.step == 0.0 {
            let scale = super::inf_norm(&self.system.a).max(1e-300);
            self.step = (0.01 / scale).min(t1 - t0);
        }
        let mut t = t0;
        let mut steps = 0usize;
        while t < t1 {
            let last = self.step >= t1 - t;
            let h = if last { t1 - t } else { self.step };
            let k1 = self.k1.unwrap_or_else(|| self.f(y));
            let k2 = self.f(&(*y + k1 * c(h * A21)));
            let k3 = self.f(&(*y + k1 * c(h * A31) + k2 * c(h * A32)));
            let k4 = self.f(&(*y + k1 * c(h * A41) + k2 * c(h * A42) + k3 * c(h * A43)));
            let k5 = self.f(&(*y + k1 * c(h * A51) + k2 * c(h * A52) + k3 * c(h * A53) + k4 * c(h * A54)));
            let k6 = self.f(
                &(*y + k1 * c(h * A61) + k2 * c(h * A62) + k3 * c(h * A63) + k4 * c(h * A64) + k5 * c(h * A65)),
            );
            let y_new = *y + k1 * c(h * A71) + k3 * c(h * A73) + k4 * c(h * A74) + k5 * c(h * A75) + k6 * c(h * A76);
            let k7 = self.f(&y_new);
            let err = (k1 * c(E1) + k3 * c(E3) + k4 * c(E4) + k5 * c(E5) + k6 * c(E6) + k7 * c(E7)) * c(h);
            let en = self.error_norm(y, &y_new, &err);

            let factor = if en == 0.0 {
                5.0
            } else {
                (0.9 * en.powf(-0.2)).clamp(0.2, 5.0)
            };
            if en <= 1.0 {
                t = if last { t1 } else { t + h };
                *y = y_new;
                self.k1 = Some(k7);
                // Keep the controller step when the last step was clipped to the target.
                if !last || h >= self.step {
                    self.step = h * factor;
                }
            } else {
                self.k1 = Some(k1);
                self.step = h * factor.min(1.0);
                if self.step < min_step {
                    return Err(SolveError::StiffnessFailure { time: t, step: self.step });
                }
            }
            steps += 1;
            if steps > self.opts.max_steps {
                return Err(SolveError::StiffnessFailure { time: t, step: self.step });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PhysicalParams;
    use crate::moments::build_full_system;

    #[test]
    fn scalar_relaxation_matches_exponential() {
        let p = PhysicalParams::normalized(1.0, 0.3, -1.0, 0.0, 5.0).unwrap();
        let sys = build_full_system(&p);
        let mut y = MomentColumn::zeros();
        let mut dp = DormandPrince::new(&sys, AdaptiveOptions::default());
        dp.advance(&mut y, 0.0, 4.0, 4.0).unwrap();
        let exact = 5.0 * (1.0 - (-0.3f64 * 4.0).exp());
        assert!((y[1] - C64::new(exact, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn step_floor_reports_stiffness() {
        let p = PhysicalParams::normalized(1.0, 0.3, -1.0, 0.0, 5.0).unwrap();
        let sys = build_full_system(&p);
        let mut y = MomentColumn::zeros();
        let opts = AdaptiveOptions {
            rtol: 0.0,
            atol: 1e-300,
            min_step_fraction: 0.5,
            ..AdaptiveOptions::default()
        };
        let mut dp = DormandPrince::new(&sys, opts);
        let err = dp.advance(&mut y, 0.0, 10.0, 10.0).unwrap_err();
        assert_eq!(err.name(), "StiffnessFailure");
    }
}
