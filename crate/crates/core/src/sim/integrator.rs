//! Fixed-step fifth-order Dormand–Prince Runge–Kutta.

use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
#[error("integration produced a non-finite state")]
pub struct NonFiniteStep;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

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

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

fn combine<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (w, k) in terms {
            acc += w * k[i];
        }
        *o += h * acc;
    }
    out
}

/// Advances `y' = f(t, y)` by one step of size `dt` with no error control.
///
/// Anything the caller captures in `f` (e.g. a control input) is constant across
/// the six stage evaluations.
pub fn dopri5_step<const N: usize, F>(mut f: F, t: f64, y: &[f64; N], dt: f64) -> Result<[f64; N], NonFiniteStep>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let h = dt;
    let k1 = f(t, y);
    let k2 = f(t + C2 * h, &combine(y, h, &[(A21, &k1)]));
    let k3 = f(t + C3 * h, &combine(y, h, &[(A31, &k1), (A32, &k2)]));
    let k4 = f(t + C4 * h, &combine(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(t + C5 * h, &combine(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f(t + h, &combine(y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let next = combine(y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    if next.iter().all(|v| v.is_finite()) {
        Ok(next)
    } else {
        Err(NonFiniteStep)
    }
}
