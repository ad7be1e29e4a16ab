//! Full (unconstrained) planar dynamics of a four-wheel skid-steering robot.
//!
//! This is the simulated "physical" vehicle: `M q̈ + c(q, q̇) = E(q) τ` with
//! Coulomb-style rolling and lateral friction at each wheel contact.

use nalgebra::{Matrix2, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Physical constants of the vehicle and its ground contact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotParams {
    /// Mass (kg).
    pub m: f64,
    /// Yaw inertia about the body z axis (kg·m²).
    pub inertia_z: f64,
    /// Centre of mass to front axle (m).
    pub a: f64,
    /// Centre of mass to rear axle (m).
    pub b: f64,
    /// Lateral wheel offset from the longitudinal axis (m).
    pub half_track: f64,
    pub wheel_radius: f64,
    /// Longitudinal offset of the virtual ICR / control point (m).
    pub d0: f64,
    /// Rolling friction coefficient.
    pub f_r: f64,
    /// Lateral friction coefficient.
    pub mu: f64,
    pub g: f64,
    /// Width of the tanh regularisation of sgn (m/s). Zero selects the exact sign.
    pub sgn_epsilon: f64,
}

impl RobotParams {
    pub const DEFAULT_F_R: f64 = 0.05;
    pub const DEFAULT_MU: f64 = 0.5;
    pub const DEFAULT_G: f64 = 9.81;
    pub const DEFAULT_SGN_EPSILON: f64 = 1e-3;

    /// ATRV-2 geometry and inertia with the default friction coefficients.
    pub fn atrv2() -> Self {
        Self {
            m: 116.0,
            inertia_z: 20.0,
            a: 0.37,
            b: 0.55,
            half_track: 0.315,
            wheel_radius: 0.2,
            d0: 0.18,
            f_r: Self::DEFAULT_F_R,
            mu: Self::DEFAULT_MU,
            g: Self::DEFAULT_G,
            sgn_epsilon: Self::DEFAULT_SGN_EPSILON,
        }
    }

    pub fn with_exact_sign(mut self) -> Self {
        self.sgn_epsilon = 0.0;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("m", self.m),
            ("inertia_z", self.inertia_z),
            ("a", self.a),
            ("b", self.b),
            ("half_track", self.half_track),
            ("wheel_radius", self.wheel_radius),
            ("d0", self.d0),
            ("f_r", self.f_r),
            ("mu", self.mu),
            ("g", self.g),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(ConfigError::Invalid(format!("robot.{name} must be strictly positive, got {value}")));
            }
        }
        if self.d0 >= self.a {
            return Err(ConfigError::Invalid(format!(
                "robot.d0 must satisfy 0 < d0 < a, got d0 = {} with a = {}",
                self.d0, self.a
            )));
        }
        if !(self.sgn_epsilon.is_finite() && self.sgn_epsilon >= 0.0) {
            return Err(ConfigError::Invalid(format!("robot.sgn_epsilon must be >= 0, got {}", self.sgn_epsilon)));
        }
        Ok(())
    }
}

/// Generalised coordinates and their rates in the inertial frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FullState {
    pub x: f64,
    pub y: f64,
    /// Yaw (rad), never wrapped.
    pub theta: f64,
    pub x_dot: f64,
    pub y_dot: f64,
    pub theta_dot: f64,
}

impl FullState {
    pub fn to_array(&self) -> [f64; 6] {
        [self.x, self.y, self.theta, self.x_dot, self.y_dot, self.theta_dot]
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        Self { x: v[0], y: v[1], theta: v[2], x_dot: v[3], y_dot: v[4], theta_dot: v[5] }
    }

    /// Builds a state from a pose and a body-frame velocity.
    pub fn from_body(x: f64, y: f64, theta: f64, v: BodyVelocity) -> Self {
        let inertial = inertial_from_body(theta, v);
        Self { x, y, theta, x_dot: inertial.x, y_dot: inertial.y, theta_dot: v.theta_dot }
    }

    pub fn body_velocity(&self) -> BodyVelocity {
        body_from_inertial(self.theta, Vector2::new(self.x_dot, self.y_dot), self.theta_dot)
    }

    pub fn kinetic_energy(&self, params: &RobotParams) -> f64 {
        0.5 * params.m * (self.x_dot * self.x_dot + self.y_dot * self.y_dot)
            + 0.5 * params.inertia_z * self.theta_dot * self.theta_dot
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Velocity expressed in the body frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyVelocity {
    pub x_dot: f64,
    pub y_dot: f64,
    pub theta_dot: f64,
}

impl BodyVelocity {
    pub fn new(x_dot: f64, y_dot: f64, theta_dot: f64) -> Self {
        Self { x_dot, y_dot, theta_dot }
    }
}

impl std::ops::Neg for BodyVelocity {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x_dot, -self.y_dot, -self.theta_dot)
    }
}

/// Left (`tau1`) and right (`tau2`) side torques (N·m).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WheelTorques {
    pub tau1: f64,
    pub tau2: f64,
}

impl WheelTorques {
    pub fn new(tau1: f64, tau2: f64) -> Self {
        Self { tau1, tau2 }
    }
}

/// Longitudinal and lateral contact-point velocities of the four wheels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WheelVelocities {
    pub longitudinal: [f64; 4],
    pub lateral: [f64; 4],
}

/// Rotation from body to inertial frame.
pub fn rotation(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

pub fn body_from_inertial(theta: f64, inertial: Vector2<f64>, theta_dot: f64) -> BodyVelocity {
    let v = rotation(theta).transpose() * inertial;
    BodyVelocity::new(v.x, v.y, theta_dot)
}

pub fn inertial_from_body(theta: f64, v: BodyVelocity) -> Vector2<f64> {
    rotation(theta) * Vector2::new(v.x_dot, v.y_dot)
}

pub fn wheel_velocities(params: &RobotParams, v: BodyVelocity) -> WheelVelocities {
    let left = v.x_dot - params.half_track * v.theta_dot;
    let right = v.x_dot + params.half_track * v.theta_dot;
    let front = v.y_dot + params.a * v.theta_dot;
    let rear = v.y_dot - params.b * v.theta_dot;
    WheelVelocities { longitudinal: [left, right, right, left], lateral: [front, front, rear, rear] }
}

/// Sign function, optionally regularised as `tanh(v / epsilon)`.
pub fn smooth_sgn(v: f64, epsilon: f64) -> f64 {
    if epsilon == 0.0 {
        if v > 0.0 {
            1.0
        } else if v < 0.0 {
            -1.0
        } else {
            0.0
        }
    } else {
        (v / epsilon).tanh()
    }
}

/// Resistive longitudinal force, lateral force and moment `(R_x, F_y, M_r)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ResistiveTerms {
    pub r_x: f64,
    pub f_y: f64,
    pub m_r: f64,
}

pub fn resistive_terms(params: &RobotParams, v: BodyVelocity) -> ResistiveTerms {
    let w = wheel_velocities(params, v);
    let eps = params.sgn_epsilon;
    let sx1 = smooth_sgn(w.longitudinal[0], eps);
    let sx2 = smooth_sgn(w.longitudinal[1], eps);
    let sy1 = smooth_sgn(w.lateral[0], eps);
    let sy3 = smooth_sgn(w.lateral[2], eps);

    let RobotParams { m, a, b, half_track: t, g, f_r, mu, .. } = *params;
    let r_x = f_r * (m * g / 2.0) * (sx1 + sx2);
    let f_y = mu * (m * g / (a + b)) * (b * sy1 + a * sy3);
    let m_r = mu * (a * b * m * g / (a + b)) * (sy1 - sy3) + f_r * (t * m * g / 2.0) * (sx2 - sx1);
    ResistiveTerms { r_x, f_y, m_r }
}

/// Resistive generalised force `c(q, q̇)` in the inertial frame.
pub fn resistive_vector(params: &RobotParams, s: &FullState) -> Vector3<f64> {
    let ResistiveTerms { r_x, f_y, m_r } = resistive_terms(params, s.body_velocity());
    let (sin, cos) = s.theta.sin_cos();
    Vector3::new(r_x * cos - f_y * sin, r_x * sin + f_y * cos, m_r)
}

/// Generalised input force `E(q) τ`.
pub fn input_vector(params: &RobotParams, theta: f64, tau: WheelTorques) -> Vector3<f64> {
    let (sin, cos) = theta.sin_cos();
    let r = params.wheel_radius;
    let sum = tau.tau1 + tau.tau2;
    Vector3::new(cos * sum / r, sin * sum / r, params.half_track * (tau.tau1 - tau.tau2) / r)
}

/// Inertial accelerations `q̈ = M⁻¹ (E τ − c)`. `M` is diagonal, so the solve is per component.
pub fn full_dynamics(params: &RobotParams, s: &FullState, tau: WheelTorques) -> Vector3<f64> {
    let rhs = input_vector(params, s.theta, tau) - resistive_vector(params, s);
    Vector3::new(rhs.x / params.m, rhs.y / params.m, rhs.z / params.inertia_z)
}

/// Time derivative of the six-component state `[X, Y, θ, Ẋ, Ẏ, θ̇]`.
pub fn full_state_derivative(params: &RobotParams, s: &FullState, tau: WheelTorques) -> [f64; 6] {
    let acc = full_dynamics(params, s, tau);
    [s.x_dot, s.y_dot, s.theta_dot, acc.x, acc.y, acc.z]
}

/// Rate of change of kinetic energy, `q̇ᵀ(E τ − c)`.
pub fn kinetic_power(params: &RobotParams, s: &FullState, tau: WheelTorques) -> f64 {
    let rhs = input_vector(params, s.theta, tau) - resistive_vector(params, s);
    s.x_dot * rhs.x + s.y_dot * rhs.y + s.theta_dot * rhs.z
}

/// Longitudinal position of the instantaneous centre of rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IcrLocation {
    Defined(f64),
    /// Yaw rate below tolerance: straight-line motion.
    Undefined,
}

impl IcrLocation {
    pub fn value(self) -> Option<f64> {
        match self {
            IcrLocation::Defined(x) => Some(x),
            IcrLocation::Undefined => None,
        }
    }
}

pub fn x_icr(v: BodyVelocity, tol: f64) -> IcrLocation {
    if v.theta_dot.abs() >= tol && v.theta_dot != 0.0 {
        IcrLocation::Defined(-v.y_dot / v.theta_dot)
    } else {
        IcrLocation::Undefined
    }
}
