//! Pole-placement synthesis of the backstepping gains.
//!
//! Linearising the error system about the aligned equilibrium on a constant
//! speed reference splits it into a longitudinal pair `(ξ̄1, η̃1)` with matrix
//! `A1` and a lateral triple `(ξ̄2, θ̃, ω̃)` with matrix `A2`.

use nalgebra::{Matrix2, Matrix3};
use num_complex::Complex64;

use crate::control::BacksteppingGains;
use crate::error::TuningError;
use crate::poly::{char_poly3, eigenvalues2, eigenvalues3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LongitudinalPoles {
    pub lambda1: f64,
    pub lambda2: f64,
}

/// Scale-free lateral poles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LateralPoles {
    pub lambda_bar: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LongitudinalGains {
    pub k1: f64,
    pub k4: f64,
    pub k6: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LateralGains {
    pub k2: f64,
    pub kappa3: f64,
    pub kappa5: f64,
    pub kappa7: f64,
}

fn check_negative(poles: &[f64]) -> Result<(), TuningError> {
    match poles.iter().find(|p| !(p.is_finite() && **p < 0.0)) {
        Some(&p) => Err(TuningError::NonNegativePole(p)),
        None => Ok(()),
    }
}

/// `k6 = -λ1 - λ2 - k1`, `k4 = (k1 + λ1)(k1 + λ2)`; requires `0 < k1 < -max(λ1, λ2)`.
pub fn tune_longitudinal(poles: LongitudinalPoles, k1: f64) -> Result<LongitudinalGains, TuningError> {
    let LongitudinalPoles { lambda1: l1, lambda2: l2 } = poles;
    check_negative(&[l1, l2])?;
    if !(k1 > 0.0 && k1 < -l1.max(l2)) {
        return Err(TuningError::InfeasibleK1 { k1, l1, l2 });
    }
    let k6 = -l1 - l2 - k1;
    let k4 = (k1 + l1) * (k1 + l2);
    Ok(LongitudinalGains { k1, k4, k6 })
}

/// Scale-free gains from `k2` and the lateral poles.
pub fn tune_lateral(k2: f64, poles: LateralPoles) -> Result<LateralGains, TuningError> {
    let [l1, l2, l3] = poles.lambda_bar;
    check_negative(&poles.lambda_bar)?;
    if !(k2 > 0.0 && k2.is_finite()) {
        return Err(TuningError::InfeasibleGains(format!("k2 = {k2} must be > 0")));
    }
    let kappa7 = -l1 * l2 * l3 / k2;
    let kappa3 = -l1 - l2 - l3 - kappa7;
    let kappa5 = k2 * (l1 * l2 + l1 * l3 + l2 * l3 - kappa3 * kappa7 - k2);
    for (name, v) in [("kappa3", kappa3), ("kappa5", kappa5), ("kappa7", kappa7)] {
        if !(v > 0.0) {
            return Err(TuningError::InfeasibleGains(format!("{name} = {v} is not positive")));
        }
    }
    Ok(LateralGains { k2, kappa3, kappa5, kappa7 })
}

/// Sufficient condition for positive lateral gains when `λ̄1 = λ̄2`:
/// `k2 < λ̄1²` and `λ̄3 > 2 λ̄1 k2 / (λ̄1² - k2)`. Only `λ̄1` and `λ̄3` are read.
pub fn feasibility_check(k2: f64, poles: LateralPoles) -> bool {
    let [l1, _, l3] = poles.lambda_bar;
    let sq = l1 * l1;
    k2 > 0.0 && k2 < sq && l3 > 2.0 * l1 * k2 / (sq - k2)
}

/// Routh–Hurwitz test for a monic polynomial given its non-leading
/// coefficients in descending order (`[a2, a1, a0]` for `s³ + a2 s² + a1 s + a0`).
pub fn hurwitz_check(coefficients: &[f64]) -> Result<bool, TuningError> {
    match *coefficients {
        [] => Ok(true),
        [a0] => Ok(a0 > 0.0),
        [a1, a0] => Ok(a1 > 0.0 && a0 > 0.0),
        [a2, a1, a0] => Ok(a2 > 0.0 && a1 > 0.0 && a0 > 0.0 && a2 * a1 > a0),
        _ => Err(TuningError::UnsupportedDegree(coefficients.len())),
    }
}

/// The alternative longitudinal condition `(k1 + k6) k1 k6 > k4` that is sometimes
/// quoted for `A1`. Reported alongside [`hurwitz_check`], never used to accept gains.
pub fn longitudinal_cross_condition(g: &LongitudinalGains) -> bool {
    (g.k1 + g.k6) * g.k1 * g.k6 > g.k4
}

pub fn longitudinal_matrix(g: &LongitudinalGains) -> Matrix2<f64> {
    Matrix2::new(-g.k1, 1.0, -g.k4, -g.k6)
}

/// `λ² + (k1 + k6) λ + k1 k6 + k4`, as `[c1, c0]`.
pub fn longitudinal_polynomial(g: &LongitudinalGains) -> [f64; 2] {
    [g.k1 + g.k6, g.k1 * g.k6 + g.k4]
}

pub fn longitudinal_eigenvalues(g: &LongitudinalGains) -> [Complex64; 2] {
    eigenvalues2(&longitudinal_matrix(g))
}

/// `A2` at reference speed `speed` with the runtime scaling of `k3`, `k5`, `k7`.
pub fn lateral_matrix(g: &LateralGains, speed: f64) -> Matrix3<f64> {
    let k3 = g.kappa3 / speed;
    let k5 = speed * speed * g.kappa5;
    let k7 = speed * g.kappa7;
    Matrix3::new(0.0, speed, 0.0, -g.k2 * speed, -k3 * speed * speed, 1.0, 0.0, -k5 / g.k2, -k7)
}

/// Factorised lateral characteristic polynomial at `speed`, as `[c2, c1, c0]`.
pub fn lateral_polynomial(g: &LateralGains, speed: f64) -> [f64; 3] {
    [
        speed * (g.kappa3 + g.kappa7),
        speed * speed * (g.kappa3 * g.kappa7 + g.kappa5 / g.k2 + g.k2),
        speed.powi(3) * g.k2 * g.kappa7,
    ]
}

/// Characteristic polynomial coefficients of the lateral matrix itself.
pub fn lateral_matrix_polynomial(g: &LateralGains, speed: f64) -> [f64; 3] {
    char_poly3(&lateral_matrix(g, speed))
}

pub fn lateral_eigenvalues(g: &LateralGains, speed: f64) -> [Complex64; 3] {
    eigenvalues3(&lateral_matrix(g, speed))
}

/// How the closed-loop lateral poles move with reference speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleScaling {
    pub poles_at_unit_speed: [Complex64; 3],
    pub speed: f64,
    pub poles_at_speed: [Complex64; 3],
    /// Largest `|p(speed) - speed·p(1)|`.
    pub linear_residual: f64,
    /// Largest `|p(speed) - speed²·p(1)|`.
    pub quadratic_residual: f64,
}

pub fn lateral_pole_scaling(g: &LateralGains, speed: f64) -> PoleScaling {
    let unit = sorted(lateral_eigenvalues(g, 1.0));
    let at = sorted(lateral_eigenvalues(g, speed));
    let residual = |factor: f64| unit.iter().zip(&at).map(|(u, p)| (p - u * factor).norm()).fold(0.0, f64::max);
    PoleScaling {
        poles_at_unit_speed: unit,
        speed,
        poles_at_speed: at,
        linear_residual: residual(speed),
        quadratic_residual: residual(speed * speed),
    }
}

fn sorted(mut z: [Complex64; 3]) -> [Complex64; 3] {
    z.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    z
}

pub fn combine(long: &LongitudinalGains, lat: &LateralGains) -> BacksteppingGains {
    BacksteppingGains {
        k1: long.k1,
        k2: lat.k2,
        kappa3: lat.kappa3,
        k4: long.k4,
        kappa5: lat.kappa5,
        k6: long.k6,
        kappa7: lat.kappa7,
    }
}

impl From<&BacksteppingGains> for LongitudinalGains {
    fn from(g: &BacksteppingGains) -> Self {
        Self { k1: g.k1, k4: g.k4, k6: g.k6 }
    }
}

impl From<&BacksteppingGains> for LateralGains {
    fn from(g: &BacksteppingGains) -> Self {
        Self { k2: g.k2, kappa3: g.kappa3, kappa5: g.kappa5, kappa7: g.kappa7 }
    }
}
