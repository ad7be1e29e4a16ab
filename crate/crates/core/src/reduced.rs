//! Constrained model used for control design.
//!
//! The virtual constraint `ẏ + d0 θ̇ = 0` pins the ICR at `x = d0`. Admissible
//! velocities are `q̇ = N(q) η` and, after the input change of variables, the
//! pseudo-velocities obey `η̇ = u`.

use nalgebra::{Matrix2, Matrix3x2, RowVector3};

use crate::dynamics::{resistive_terms, BodyVelocity, FullState, RobotParams, WheelTorques};
use crate::error::ControlError;

/// Threshold below which `NᵀE` is treated as singular.
pub const INPUT_MAP_DET_TOL: f64 = 1e-12;

/// Pose plus the two pseudo-velocities of the constrained model.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReducedState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    /// Longitudinal pseudo-velocity (m/s).
    pub eta1: f64,
    /// Lateral-channel pseudo-velocity (m/s).
    pub eta2: f64,
}

impl ReducedState {
    pub fn omega(&self, d0: f64) -> f64 {
        -self.eta2 / d0
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.x, self.y, self.theta, self.eta1, self.eta2]
    }

    pub fn from_array(v: [f64; 5]) -> Self {
        Self { x: v[0], y: v[1], theta: v[2], eta1: v[3], eta2: v[4] }
    }

    /// Embeds the reduced state into the full coordinates via `q̇ = N η`.
    pub fn to_full(&self, d0: f64) -> FullState {
        FullState::from_body(self.x, self.y, self.theta, BodyVelocity::new(self.eta1, self.eta2, self.omega(d0)))
    }

    /// Pseudo-velocities read off the body velocity (`η1 = ẋ`, `η2 = ẏ`).
    pub fn from_full(s: &FullState) -> Self {
        let v = s.body_velocity();
        Self { x: s.x, y: s.y, theta: s.theta, eta1: v.x_dot, eta2: v.y_dot }
    }
}

/// Design inputs of the constrained model, `η̇ = u`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlInput {
    pub u1: f64,
    pub u2: f64,
}

impl ControlInput {
    pub fn new(u1: f64, u2: f64) -> Self {
        Self { u1, u2 }
    }

    pub fn is_finite(&self) -> bool {
        self.u1.is_finite() && self.u2.is_finite()
    }
}

/// Constraint row `A(q) = [-sin θ, cos θ, d0]`.
pub fn constraint_row(theta: f64, d0: f64) -> RowVector3<f64> {
    let (s, c) = theta.sin_cos();
    RowVector3::new(-s, c, d0)
}

/// Basis of the null space of `A(q)`.
pub fn n_matrix(theta: f64, d0: f64) -> Matrix3x2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix3x2::new(c, -s, s, c, 0.0, -1.0 / d0)
}

/// `Ṅ` for yaw rate `theta_dot`.
pub fn n_matrix_dot(theta: f64, theta_dot: f64) -> Matrix3x2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix3x2::new(-s, -c, c, -s, 0.0, 0.0) * theta_dot
}

/// `NᵀMN`, constant and diagonal.
pub fn reduced_mass(params: &RobotParams) -> Matrix2<f64> {
    Matrix2::new(params.m, 0.0, 0.0, params.m + params.inertia_z / (params.d0 * params.d0))
}

/// `NᵀE`; independent of the heading.
pub fn input_map(params: &RobotParams) -> Matrix2<f64> {
    let r = params.wheel_radius;
    let k = params.half_track / (r * params.d0);
    Matrix2::new(1.0 / r, 1.0 / r, -k, k)
}

/// Fails if `NᵀE` cannot be inverted for these parameters.
pub fn check_input_map(params: &RobotParams) -> Result<f64, ControlError> {
    let det = input_map(params).determinant();
    if !det.is_finite() || det.abs() < INPUT_MAP_DET_TOL {
        return Err(ControlError::SingularInputMap { det });
    }
    Ok(det)
}

pub fn reduced_dynamics(s: &ReducedState, u: ControlInput, d0: f64) -> [f64; 5] {
    let (sin, cos) = s.theta.sin_cos();
    [cos * s.eta1 - sin * s.eta2, sin * s.eta1 + cos * s.eta2, -s.eta2 / d0, u.u1, u.u2]
}

/// Wheel torques realising `η̇ = u` on the constrained model,
/// `τ = (NᵀE)⁻¹ (NᵀMN u + NᵀMṄη + Nᵀc)`.
///
/// `η` is taken from the measured body velocity and `Ṅ` from the measured yaw rate.
pub fn torque_from_u(
    params: &RobotParams,
    measured: &FullState,
    u: ControlInput,
) -> Result<WheelTorques, ControlError> {
    check_input_map(params)?;
    let RobotParams { m, inertia_z, d0, wheel_radius: r, half_track: t, .. } = *params;
    let v = measured.body_velocity();
    let (eta1, eta2, w) = (v.x_dot, v.y_dot, v.theta_dot);
    let friction = resistive_terms(params, v);

    // NᵀMN u + NᵀMṄη + Nᵀc, written out component-wise.
    let w1 = m * u.u1 - m * w * eta2 + friction.r_x;
    let w2 = (m + inertia_z / (d0 * d0)) * u.u2 + m * w * eta1 + friction.f_y - friction.m_r / d0;

    let common = 0.5 * r * w1;
    let diff = 0.5 * r * d0 * w2 / t;
    Ok(WheelTorques::new(common - diff, common + diff))
}

/// `ẏ + d0 θ̇`, zero exactly when the virtual constraint holds.
pub fn constraint_residual(v: BodyVelocity, d0: f64) -> f64 {
    v.y_dot + d0 * v.theta_dot
}
