//! Reference trajectories for the control point, with exact derivatives up to jerk.

use nalgebra::Vector2;

use crate::error::ConfigError;

/// Reference position and its first three time derivatives at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSample {
    pub t: f64,
    pub position: Vector2<f64>,
    pub velocity: Vector2<f64>,
    pub acceleration: Vector2<f64>,
    pub jerk: Vector2<f64>,
}

impl ReferenceSample {
    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }

    pub fn is_finite(&self) -> bool {
        [self.position, self.velocity, self.acceleration, self.jerk].iter().all(|v| v.iter().all(|c| c.is_finite()))
    }

    /// Same sample with the position shifted by `offset`.
    pub fn translated(mut self, offset: Vector2<f64>) -> Self {
        self.position += offset;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrajectorySpec {
    /// `center + radius·(cos(rate·t + phase), sin(rate·t + phase))`.
    Circle {
        radius: f64,
        angular_rate: f64,
        center: Vector2<f64>,
        phase: f64,
    },
    /// `offset + amplitude·(sin(rate·t), sin(rate·t / 2))`: a figure eight.
    Lissajous {
        amplitude: f64,
        base_rate: f64,
        offset: Vector2<f64>,
    },
    StraightLine {
        start: Vector2<f64>,
        velocity: Vector2<f64>,
    },
}

impl TrajectorySpec {
    /// Circle of 5 m radius about the origin traversed at 1 m/s.
    pub fn default_circle() -> Self {
        TrajectorySpec::Circle { radius: 5.0, angular_rate: 0.2, center: Vector2::zeros(), phase: 0.0 }
    }

    /// Eight-shaped curve `5(1 + sin(√0.4 t)), 5(1 + sin(√0.4 t / 2))`.
    pub fn figure_eight() -> Self {
        TrajectorySpec::Lissajous { amplitude: 5.0, base_rate: 0.4f64.sqrt(), offset: Vector2::new(5.0, 5.0) }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::Invalid(format!("trajectory.{name} must be finite")))
            }
        };
        match *self {
            TrajectorySpec::Circle { radius, angular_rate, center, phase } => {
                if !(radius > 0.0 && radius.is_finite()) {
                    return Err(ConfigError::Invalid(format!("trajectory.radius must be > 0, got {radius}")));
                }
                finite("angular_rate", angular_rate)?;
                finite("phase", phase)?;
                finite("center", center.x + center.y)
            }
            TrajectorySpec::Lissajous { amplitude, base_rate, offset } => {
                if !(amplitude > 0.0 && amplitude.is_finite()) {
                    return Err(ConfigError::Invalid(format!("trajectory.amplitude must be > 0, got {amplitude}")));
                }
                finite("base_rate", base_rate)?;
                finite("offset", offset.x + offset.y)
            }
            TrajectorySpec::StraightLine { start, velocity } => {
                finite("start", start.x + start.y)?;
                finite("velocity", velocity.x + velocity.y)
            }
        }
    }

    pub fn sample(&self, t: f64) -> ReferenceSample {
        match *self {
            TrajectorySpec::Circle { radius, angular_rate: w, center, phase } => {
                let (s, c) = (w * t + phase).sin_cos();
                let dir = Vector2::new(c, s);
                let perp = Vector2::new(-s, c);
                ReferenceSample {
                    t,
                    position: center + radius * dir,
                    velocity: radius * w * perp,
                    acceleration: -radius * w * w * dir,
                    jerk: -radius * w * w * w * perp,
                }
            }
            TrajectorySpec::Lissajous { amplitude: a, base_rate: w, offset } => {
                let (s1, c1) = (w * t).sin_cos();
                let h = 0.5 * w;
                let (s2, c2) = (h * t).sin_cos();
                ReferenceSample {
                    t,
                    position: offset + a * Vector2::new(s1, s2),
                    velocity: a * Vector2::new(w * c1, h * c2),
                    acceleration: -a * Vector2::new(w * w * s1, h * h * s2),
                    jerk: -a * Vector2::new(w * w * w * c1, h * h * h * c2),
                }
            }
            TrajectorySpec::StraightLine { start, velocity } => ReferenceSample {
                t,
                position: start + velocity * t,
                velocity,
                acceleration: Vector2::zeros(),
                jerk: Vector2::zeros(),
            },
        }
    }
}

/// Outcome of checking the speed floor / acceleration ceiling over a horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssumptionReport {
    pub min_speed: f64,
    pub max_acceleration: f64,
    pub delta_r: f64,
    pub a_r: f64,
    pub pass: bool,
}

/// Grid spacing used by [`validate_assumption1`] (s).
pub const ASSUMPTION_GRID: f64 = 1e-3;

/// Samples speed and acceleration magnitude on a 1 ms grid over `[0, horizon]`.
pub fn validate_assumption1(spec: &TrajectorySpec, horizon: f64, delta_r: f64, a_r: f64) -> AssumptionReport {
    let n = (horizon / ASSUMPTION_GRID).ceil() as usize;
    let mut min_speed = f64::INFINITY;
    let mut max_acceleration: f64 = 0.0;
    for i in 0..=n {
        let t = (i as f64 * ASSUMPTION_GRID).min(horizon);
        let r = spec.sample(t);
        min_speed = min_speed.min(r.velocity.norm());
        max_acceleration = max_acceleration.max(r.acceleration.norm());
    }
    AssumptionReport {
        min_speed,
        max_acceleration,
        delta_r,
        a_r,
        pass: min_speed >= delta_r && max_acceleration <= a_r,
    }
}

/// Signed curvature of the reference path, `(v × a) / |v|³`.
pub fn curvature(r: &ReferenceSample) -> f64 {
    let v = r.velocity;
    let a = r.acceleration;
    (v.x * a.y - v.y * a.x) / v.norm().powi(3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lissajous_at_origin_time() {
        let r = TrajectorySpec::figure_eight().sample(0.0);
        assert_eq!(r.position, Vector2::new(5.0, 5.0));
        let w = 0.4f64.sqrt();
        assert_abs_diff_eq!(r.velocity, Vector2::new(5.0 * w, 2.5 * w), epsilon = 1e-15);
        assert_abs_diff_eq!(r.velocity.x, 3.1623, epsilon = 1e-4);
        assert_abs_diff_eq!(r.velocity.y, 1.5811, epsilon = 1e-4);
    }

    #[test]
    fn circle_at_origin_time() {
        let r = TrajectorySpec::default_circle().sample(0.0);
        assert_eq!(r.position, Vector2::new(5.0, 0.0));
        assert_abs_diff_eq!(r.velocity, Vector2::new(0.0, 1.0), epsilon = 1e-15);
        assert_abs_diff_eq!(r.acceleration, Vector2::new(-0.2, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn straight_line_sample() {
        let spec = TrajectorySpec::StraightLine { start: Vector2::zeros(), velocity: Vector2::new(1.0, 0.0) };
        let r = spec.sample(7.0);
        assert_eq!(r.position, Vector2::new(7.0, 0.0));
        assert_eq!(r.velocity, Vector2::new(1.0, 0.0));
        assert_eq!(r.acceleration, Vector2::zeros());
        assert_eq!(r.jerk, Vector2::zeros());
    }

    #[test]
    fn assumption_reports() {
        let rep = validate_assumption1(&TrajectorySpec::figure_eight(), 60.0, 0.01, 10.0);
        assert!(rep.pass);
        // The two cosines never vanish together, so the floor sits well above zero.
        assert!(rep.min_speed > 1.0);

        let rep = validate_assumption1(&TrajectorySpec::default_circle(), 10.0, 0.01, 10.0);
        assert_abs_diff_eq!(rep.min_speed, 1.0, epsilon = 1e-12);
        assert!(rep.pass);

        let line = TrajectorySpec::StraightLine { start: Vector2::zeros(), velocity: Vector2::zeros() };
        assert!(!validate_assumption1(&line, 5.0, 0.01, 10.0).pass);
    }

    #[test]
    fn lissajous_speed_floor_matches_analysis() {
        // With z = cos²(wt/2): |v|² = 0.4·(25 (2z - 1)² + 6.25 z), minimised at z = 1/2 - 6.25/200.
        let z = 0.5 - 6.25 / 200.0;
        let floor = (0.4 * (25.0 * (2.0 * z - 1.0f64).powi(2) + 6.25 * z)).sqrt();
        let rep = validate_assumption1(&TrajectorySpec::figure_eight(), 60.0, 0.01, 10.0);
        assert_abs_diff_eq!(rep.min_speed, floor, epsilon = 1e-5);
    }

    fn specs() -> Vec<TrajectorySpec> {
        vec![
            TrajectorySpec::default_circle(),
            TrajectorySpec::Circle { radius: 2.0, angular_rate: -0.7, center: Vector2::new(1.0, -3.0), phase: 0.4 },
            TrajectorySpec::figure_eight(),
            TrajectorySpec::StraightLine { start: Vector2::new(1.0, 2.0), velocity: Vector2::new(0.3, -0.5) },
        ]
    }

    #[test]
    fn derivatives_match_central_differences() {
        let h = 1e-5;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for spec in specs() {
            for _ in 0..100 {
                let t = rng.random_range(0.0..100.0);
                let (lo, mid, hi) = (spec.sample(t - h), spec.sample(t), spec.sample(t + h));
                let checks = [
                    ((hi.position - lo.position) / (2.0 * h), mid.velocity),
                    ((hi.velocity - lo.velocity) / (2.0 * h), mid.acceleration),
                    ((hi.acceleration - lo.acceleration) / (2.0 * h), mid.jerk),
                ];
                for (fd, exact) in checks {
                    let scale = exact.norm().max(1.0);
                    assert!((fd - exact).norm() / scale < 1e-6, "{spec:?} t={t}: {fd:?} vs {exact:?}");
                }
            }
        }
    }

    #[test]
    fn circle_geometry() {
        let spec =
            TrajectorySpec::Circle { radius: 3.0, angular_rate: 0.5, center: Vector2::new(1.0, 2.0), phase: 0.3 };
        for i in 0..200 {
            let r = spec.sample(i as f64 * 0.37);
            let rel = r.position - Vector2::new(1.0, 2.0);
            assert!((rel.norm() - 3.0).abs() < 1e-12);
            assert!(r.velocity.dot(&rel).abs() < 1e-12);
        }
    }

    #[test]
    fn circle_curvature_is_inverse_radius() {
        let r = TrajectorySpec::default_circle().sample(3.0);
        assert_abs_diff_eq!(curvature(&r), 0.2, epsilon = 1e-12);
    }

    #[test]
    fn validation_rejects_bad_shapes() {
        let bad = TrajectorySpec::Circle { radius: 0.0, angular_rate: 0.2, center: Vector2::zeros(), phase: 0.0 };
        assert!(bad.validate().is_err());
        let bad = TrajectorySpec::Lissajous { amplitude: -1.0, base_rate: 0.2, offset: Vector2::zeros() };
        assert!(bad.validate().is_err());
        assert!(TrajectorySpec::figure_eight().validate().is_ok());
    }
}
