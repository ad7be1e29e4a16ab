//! Dynamic feedback linearisation baseline.
//!
//! The longitudinal acceleration `ζ = η̇1` is promoted to a controller state so
//! that the control point obeys `ξ⃛ = D (ζ̇, ū2)ᵀ + h` with
//! `D = [R e1, η1 R e2]`. Each inertial axis is then driven as a triple
//! integrator with its own `(kp, kv, ka)`. `D` is singular when `η1 = 0`.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::control::backstepping::control_point;
use crate::dynamics::{rotation, FullState};
use crate::error::{ConfigError, ControlError};
use crate::reduced::ControlInput;
use crate::trajectory::ReferenceSample;

/// Default singularity guard on |η1| (m/s).
pub const DEFAULT_ETA_MIN: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DflGains {
    pub kp1: f64,
    pub kv1: f64,
    pub ka1: f64,
    pub kp2: f64,
    pub kv2: f64,
    pub ka2: f64,
}

impl DflGains {
    /// Gains tuned on the 5 m circle for the ATRV-2 (axis 1 = X, axis 2 = Y).
    pub fn atrv2_circle() -> Self {
        Self { kp1: 325.0, kv1: 131.0, ka1: 20.0, kp2: 580.0, kv2: 210.0, ka2: 67.0 }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let named = [
            ("kp1", self.kp1),
            ("kv1", self.kv1),
            ("ka1", self.ka1),
            ("kp2", self.kp2),
            ("kv2", self.kv2),
            ("ka2", self.ka2),
        ];
        for (name, v) in named {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::Invalid(format!("controller.{name} must be strictly positive, got {v}")));
            }
        }
        for (axis, kp, kv, ka) in [(1, self.kp1, self.kv1, self.ka1), (2, self.kp2, self.kv2, self.ka2)] {
            if ka * kv <= kp {
                return Err(ConfigError::Invalid(format!(
                    "controller axis {axis}: s^3 + {ka} s^2 + {kv} s + {kp} is not Hurwitz (ka*kv must exceed kp)"
                )));
            }
        }
        Ok(())
    }

    fn kp(&self) -> Vector2<f64> {
        Vector2::new(self.kp1, self.kp2)
    }
    fn kv(&self) -> Vector2<f64> {
        Vector2::new(self.kv1, self.kv2)
    }
    fn ka(&self) -> Vector2<f64> {
        Vector2::new(self.ka1, self.ka2)
    }
}

/// Dynamic-extension state carried between calls.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DflState {
    /// Longitudinal acceleration command `ζ` (m/s²).
    pub zeta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DflController {
    pub gains: DflGains,
    pub d0: f64,
    pub eta_min: f64,
}

impl DflController {
    pub fn new(gains: DflGains, d0: f64) -> Self {
        Self { gains, d0, eta_min: DEFAULT_ETA_MIN }
    }

    /// Computes `(u1, u2)` and advances `ζ` by one control period `dt`.
    pub fn control(
        &self,
        measured: &FullState,
        reference: &ReferenceSample,
        state: DflState,
        dt: f64,
    ) -> Result<(ControlInput, DflState), ControlError> {
        let body = measured.body_velocity();
        let eta1 = body.x_dot;
        if !(eta1.abs() >= self.eta_min) {
            return Err(ControlError::SingularVelocity { eta1, eta_min: self.eta_min });
        }
        let omega = body.theta_dot;
        let zeta = state.zeta;
        let rot = rotation(measured.theta);
        let e1 = rot.column(0).into_owned();
        let e2 = rot.column(1).into_owned();

        // Flat output and its model-based derivatives; ξ̈ needs the internal ζ.
        let xi = control_point(measured.x, measured.y, measured.theta, self.d0);
        let xi_dot = eta1 * e1;
        let xi_ddot = zeta * e1 + eta1 * omega * e2;

        let g = &self.gains;
        let command = reference.jerk
            + g.ka().component_mul(&(reference.acceleration - xi_ddot))
            + g.kv().component_mul(&(reference.velocity - xi_dot))
            + g.kp().component_mul(&(reference.position - xi));
        let drift = 2.0 * zeta * omega * e2 - eta1 * omega * omega * e1;
        let w = rot.transpose() * (command - drift);
        let zeta_dot = w.x;
        let u2_bar = w.y / eta1;

        let next = DflState { zeta: zeta + dt * zeta_dot };
        Ok((ControlInput::new(next.zeta, -self.d0 * u2_bar), next))
    }
}
