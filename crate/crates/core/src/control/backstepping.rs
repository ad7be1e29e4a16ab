//! Lyapunov-based backstepping tracking law for the control point.
//!
//! The controller works on the error system of the constrained model
//!
//! ```text
//! ξ̄' = -ω S ξ̄ + η1 e1 - Rᵀ ξ̇r,   R' = ω R S,   η1' = u1,   ω' = ū2 = -u2 / d0
//! ```
//!
//! The time derivatives of the virtual inputs `η1d` and `ωd` are evaluated in
//! closed form along these error dynamics, so no signal is differentiated
//! numerically.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::dynamics::{rotation, FullState};
use crate::error::{ConfigError, ControlError};
use crate::reduced::ControlInput;
use crate::trajectory::ReferenceSample;

/// Default floor on the reference speed (m/s).
pub const DEFAULT_DELTA_R: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BacksteppingGains {
    pub k1: f64,
    pub k2: f64,
    pub kappa3: f64,
    pub k4: f64,
    pub kappa5: f64,
    pub k6: f64,
    pub kappa7: f64,
}

impl BacksteppingGains {
    /// Gains tuned on the 5 m circle for the ATRV-2.
    pub fn atrv2_circle() -> Self {
        Self { k1: 3.0, k2: 15.8, kappa3: 7.95, k4: 1.0, kappa5: 0.0005, k6: 5.0, kappa7: 4.05 }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let named = [
            ("k1", self.k1),
            ("k2", self.k2),
            ("kappa3", self.kappa3),
            ("k4", self.k4),
            ("kappa5", self.kappa5),
            ("k6", self.k6),
            ("kappa7", self.kappa7),
        ];
        for (name, v) in named {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::Invalid(format!("controller.{name} must be strictly positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Speed-dependent gains `(k3, k5, k7)` for reference speed `speed`.
    pub fn scaled(&self, speed: f64) -> ScaledGains {
        ScaledGains { k3: self.kappa3 / speed, k5: speed * speed * self.kappa5, k7: speed * self.kappa7 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledGains {
    pub k3: f64,
    pub k5: f64,
    pub k7: f64,
}

/// Position error of the control point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingError {
    /// `ξ - ξr` in the inertial frame.
    pub xi_tilde: Vector2<f64>,
    /// Same error in the body frame, `Rᵀ ξ̃`.
    pub xi_bar: Vector2<f64>,
    /// Heading relative to the reference velocity direction (rad, wrapped).
    pub theta_tilde: f64,
}

pub fn control_point(x: f64, y: f64, theta: f64, d0: f64) -> Vector2<f64> {
    let (s, c) = theta.sin_cos();
    Vector2::new(x + d0 * c, y + d0 * s)
}

pub fn tracking_error(state: &FullState, reference: &ReferenceSample, d0: f64) -> TrackingError {
    let xi = control_point(state.x, state.y, state.theta, d0);
    let xi_tilde = xi - reference.position;
    let rt = rotation(state.theta).transpose();
    let xi_bar = rt * xi_tilde;
    let p = rt * reference.velocity;
    TrackingError { xi_tilde, xi_bar, theta_tilde: (-p.y).atan2(p.x) }
}

fn cross(a: Vector2<f64>, b: Vector2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}

fn check_speed(reference: &ReferenceSample, floor: f64) -> Result<f64, ControlError> {
    let speed = reference.speed();
    if speed < floor || speed == 0.0 {
        return Err(ControlError::DegenerateReference { speed, floor });
    }
    Ok(speed)
}

/// Reference turn rate `ωr = -(ξ̇rᵀ S ξ̈r) / |ξ̇r|²`.
pub fn omega_r(reference: &ReferenceSample, delta_r: f64) -> Result<f64, ControlError> {
    let speed = check_speed(reference, delta_r)?;
    Ok(cross(reference.velocity, reference.acceleration) / (speed * speed))
}

/// Virtual inputs `(η1d, ωd)` for body-frame error `xi_bar` at heading `theta`.
pub fn aux_velocities(
    xi_bar: Vector2<f64>,
    theta: f64,
    reference: &ReferenceSample,
    gains: &BacksteppingGains,
    delta_r: f64,
) -> Result<(f64, f64), ControlError> {
    let speed = check_speed(reference, delta_r)?;
    let p = rotation(theta).transpose() * reference.velocity;
    let w_r = omega_r(reference, delta_r)?;
    let k3 = gains.scaled(speed).k3;
    let eta1d = p.x - gains.k1 * xi_bar.x;
    let omega_d = w_r - gains.k2 * speed * xi_bar.y + k3 * speed * p.y;
    Ok((eta1d, omega_d))
}

/// Storage value, Lyapunov value and its closed-form time derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovDiagnostics {
    pub storage: f64,
    pub lyapunov: f64,
    pub lyapunov_rate: f64,
}

/// Everything the control law and the diagnostics share at one instant.
#[derive(Debug, Clone, Copy)]
struct Terms {
    speed: f64,
    scaled: ScaledGains,
    /// `Rᵀ ξ̇r`
    p: Vector2<f64>,
    xi_bar: Vector2<f64>,
    eta1: f64,
    omega: f64,
    eta1d: f64,
    omega_d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BacksteppingController {
    pub gains: BacksteppingGains,
    pub d0: f64,
    pub delta_r: f64,
}

impl BacksteppingController {
    pub fn new(gains: BacksteppingGains, d0: f64) -> Self {
        Self { gains, d0, delta_r: DEFAULT_DELTA_R }
    }

    fn terms(&self, state: &FullState, reference: &ReferenceSample) -> Result<Terms, ControlError> {
        let speed = check_speed(reference, self.delta_r)?;
        let err = tracking_error(state, reference, self.d0);
        let body = state.body_velocity();
        let p = rotation(state.theta).transpose() * reference.velocity;
        let (eta1d, omega_d) = aux_velocities(err.xi_bar, state.theta, reference, &self.gains, self.delta_r)?;
        Ok(Terms {
            speed,
            scaled: self.gains.scaled(speed),
            p,
            xi_bar: err.xi_bar,
            eta1: body.x_dot,
            omega: body.theta_dot,
            eta1d,
            omega_d,
        })
    }

    /// Control inputs `(u1, u2)` from the measured state.
    pub fn control(&self, state: &FullState, reference: &ReferenceSample) -> Result<ControlInput, ControlError> {
        let g = &self.gains;
        let Terms { speed, scaled, p, xi_bar, eta1, omega, eta1d, omega_d } = self.terms(state, reference)?;
        let v = reference.velocity;
        let a = reference.acceleration;
        let j = reference.jerk;
        let ra = rotation(state.theta).transpose() * a;

        // Error dynamics along the constrained model.
        let p_dot = Vector2::new(omega * p.y + ra.x, -omega * p.x + ra.y);
        let xi_bar_dot = Vector2::new(omega * xi_bar.y + eta1 - p.x, -omega * xi_bar.x - p.y);

        let eta1d_dot = p_dot.x - g.k1 * xi_bar_dot.x;

        let speed_sq = speed * speed;
        let v_dot_a = v.dot(&a);
        let turn = cross(v, a);
        let omega_r = turn / speed_sq;
        let omega_r_dot = cross(v, j) / speed_sq - 2.0 * turn * v_dot_a / (speed_sq * speed_sq);
        let speed_dot = v_dot_a / speed;
        // k3·|ξ̇r| = κ3, so its derivative carries no gain-rate term.
        let omega_d_dot = omega_r_dot - g.k2 * (speed_dot * xi_bar.y + speed * xi_bar_dot.y) + g.kappa3 * p_dot.y;
        debug_assert!(
            (omega_d - (omega_r - g.k2 * speed * xi_bar.y + g.kappa3 * p.y)).abs() < 1e-9 * (1.0 + omega_d.abs())
        );

        // k̇5 / (2 k5) with k5 = |ξ̇r|² κ5.
        let k5_rate = v_dot_a / speed_sq;

        let u1 = eta1d_dot - g.k4 * xi_bar.x - g.k6 * (eta1 - eta1d);
        let u2_bar = omega_d_dot + (scaled.k5 / g.k2) * p.y / speed + (k5_rate - scaled.k7) * (omega - omega_d);
        Ok(ControlInput::new(u1, -self.d0 * u2_bar))
    }

    pub fn diagnostics(
        &self,
        state: &FullState,
        reference: &ReferenceSample,
    ) -> Result<LyapunovDiagnostics, ControlError> {
        let g = &self.gains;
        let Terms { speed, scaled, p, xi_bar, eta1, omega, eta1d, omega_d } = self.terms(state, reference)?;
        let storage = 0.5 * xi_bar.norm_squared() + (1.0 - p.x / speed) / g.k2;
        let eta_err = eta1 - eta1d;
        let omega_err = omega - omega_d;
        let lyapunov = storage + eta_err * eta_err / (2.0 * g.k4) + omega_err * omega_err / (2.0 * scaled.k5);
        let lyapunov_rate = -g.k1 * xi_bar.x * xi_bar.x
            - (scaled.k3 / g.k2) * p.y * p.y
            - (g.k6 / g.k4) * eta_err * eta_err
            - (scaled.k7 / scaled.k5) * omega_err * omega_err;
        Ok(LyapunovDiagnostics { storage, lyapunov, lyapunov_rate })
    }
}
