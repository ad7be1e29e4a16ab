//! Closed-form roots of monic quadratics and cubics.

use nalgebra::{Matrix2, Matrix3};
use num_complex::Complex64;

/// Roots of `x² + b x + c`.
pub fn quadratic_roots(b: f64, c: f64) -> [Complex64; 2] {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        // Avoid cancellation: compute the larger-magnitude root first.
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        if q == 0.0 {
            return [Complex64::new(0.0, 0.0); 2];
        }
        let (r1, r2) = (q, c / q);
        [Complex64::new(r1.min(r2), 0.0), Complex64::new(r1.max(r2), 0.0)]
    } else {
        let re = -0.5 * b;
        let im = 0.5 * (-disc).sqrt();
        [Complex64::new(re, -im), Complex64::new(re, im)]
    }
}

/// Roots of `x³ + a2 x² + a1 x + a0` (Cardano / trigonometric form).
pub fn cubic_roots(a2: f64, a1: f64, a0: f64) -> [Complex64; 3] {
    let shift = a2 / 3.0;
    let p = a1 - a2 * a2 / 3.0;
    let q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);

    let polish = |x: f64| {
        // One Newton step on the original cubic.
        let f = ((x + a2) * x + a1) * x + a0;
        let df = (3.0 * x + 2.0 * a2) * x + a1;
        if df.abs() > 1e-300 {
            x - f / df
        } else {
            x
        }
    };

    if disc > 0.0 {
        let sq = disc.sqrt();
        let u = (-q / 2.0 + sq).cbrt();
        let v = (-q / 2.0 - sq).cbrt();
        let real = polish(u + v - shift);
        let re = -(u + v) / 2.0 - shift;
        let im = (3.0f64).sqrt() / 2.0 * (u - v);
        [Complex64::new(real, 0.0), Complex64::new(re, -im.abs()), Complex64::new(re, im.abs())]
    } else if p == 0.0 {
        [Complex64::new(-shift, 0.0); 3]
    } else {
        let r = 2.0 * (-p / 3.0).sqrt();
        let arg = ((3.0 * q) / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        let mut roots = [0.0; 3];
        for (k, root) in roots.iter_mut().enumerate() {
            let t = r * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
            *root = polish(t - shift);
        }
        roots.sort_by(|a, b| a.total_cmp(b));
        roots.map(|x| Complex64::new(x, 0.0))
    }
}

/// Non-leading coefficients `[c1, c0]` of `det(λI - m)`.
pub fn char_poly2(m: &Matrix2<f64>) -> [f64; 2] {
    [-m.trace(), m.determinant()]
}

/// Non-leading coefficients `[c2, c1, c0]` of `det(λI - m)`.
pub fn char_poly3(m: &Matrix3<f64>) -> [f64; 3] {
    let minors = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)] + m[(0, 0)] * m[(2, 2)] - m[(0, 2)] * m[(2, 0)]
        + m[(1, 1)] * m[(2, 2)]
        - m[(1, 2)] * m[(2, 1)];
    [-m.trace(), minors, -m.determinant()]
}

pub fn eigenvalues2(m: &Matrix2<f64>) -> [Complex64; 2] {
    let [b, c] = char_poly2(m);
    quadratic_roots(b, c)
}

pub fn eigenvalues3(m: &Matrix3<f64>) -> [Complex64; 3] {
    let [a2, a1, a0] = char_poly3(m);
    cubic_roots(a2, a1, a0)
}
