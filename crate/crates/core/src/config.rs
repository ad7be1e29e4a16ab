//! Experiment files.
//!
//! An experiment is a TOML document with the sections `[robot]`,
//! `[trajectory]`, `[controller]`, `[noise]`, `[timing]` and `[output]`.
//! `[noise]` may be omitted for a noise-free run. Unknown keys, and keys that
//! do not belong to the selected `kind`, are rejected.
//!
//! ```toml
//! [robot]
//! model = "full"            # or "reduced"
//! f_r = 0.05                # required
//! mu = 0.5                  # required
//! initial_pose = [8.0, 5.0, 1.5707963267948966]
//! initial_velocity = [0.5, 0.5, 0.1]   # body frame
//!
//! [trajectory]
//! kind = "circle"           # circle | lissajous | straight_line
//! radius = 5.0
//! angular_rate = 0.2
//!
//! [controller]
//! kind = "backstepping"     # backstepping | dfl
//! k1 = 3.0
//! k2 = 15.8
//! kappa3 = 7.95
//! k4 = 1.0
//! kappa5 = 0.0005
//! k6 = 5.0
//! kappa7 = 4.05
//!
//! [timing]
//! t_end = 60.0
//! ```
//!
//! Omitted keys take the defaults written out by [`render_experiment`].

use std::path::Path;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::control::backstepping::DEFAULT_DELTA_R;
use crate::control::dfl::DEFAULT_ETA_MIN;
use crate::control::{BacksteppingGains, DflGains};
use crate::dynamics::{BodyVelocity, RobotParams};
use crate::error::ConfigError;
use crate::sim::{
    ControllerConfig, InitialCondition, NoiseSpec, PlantModel, SimConfig, DEFAULT_ABORT_ERROR, DEFAULT_A_R, DEFAULT_DT,
};
use crate::trajectory::TrajectorySpec;

pub const DEFAULT_STEADY_WINDOW: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputSettings {
    /// Length of the final window used for the steady-state RMS (s).
    pub steady_window: f64,
    /// Also write `series.svg` next to the CSV files.
    pub plot: bool,
}

impl Default for OutputSettings {
    fn default() -> Self {
        Self { steady_window: DEFAULT_STEADY_WINDOW, plot: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub sim: SimConfig,
    pub output: OutputSettings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ModelKey {
    Full,
    Reduced,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RobotSection {
    model: Option<ModelKey>,
    m: Option<f64>,
    inertia_z: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
    half_track: Option<f64>,
    wheel_radius: Option<f64>,
    d0: Option<f64>,
    f_r: Option<f64>,
    mu: Option<f64>,
    g: Option<f64>,
    sgn_epsilon: Option<f64>,
    initial_pose: Option<[f64; 3]>,
    initial_velocity: Option<[f64; 3]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum TrajectorySection {
    Circle { radius: f64, angular_rate: f64, center: Option<[f64; 2]>, phase: Option<f64> },
    Lissajous { amplitude: f64, base_rate: f64, offset: Option<[f64; 2]> },
    StraightLine { start: [f64; 2], velocity: [f64; 2] },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ControllerSection {
    Backstepping { k1: f64, k2: f64, kappa3: f64, k4: f64, kappa5: f64, k6: f64, kappa7: f64, delta_r: Option<f64> },
    Dfl { kp1: f64, kv1: f64, ka1: f64, kp2: f64, kv2: f64, ka2: f64, eta_min: Option<f64> },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseSection {
    mean: Option<[f64; 6]>,
    std_dev: [f64; 6],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TimingSection {
    t_end: f64,
    dt_integrator: Option<f64>,
    dt_control: Option<f64>,
    delay: Option<f64>,
    seed: Option<u64>,
    a_r: Option<f64>,
    abort_error: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    steady_window: Option<f64>,
    plot: Option<bool>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentFile {
    robot: RobotSection,
    trajectory: TrajectorySection,
    controller: ControllerSection,
    noise: Option<NoiseSection>,
    timing: TimingSection,
    #[serde(default)]
    output: OutputSection,
}

fn vec2(v: [f64; 2]) -> Vector2<f64> {
    Vector2::new(v[0], v[1])
}

fn required(value: Option<f64>, key: &str) -> Result<f64, ConfigError> {
    value.ok_or_else(|| ConfigError::Invalid(format!("missing required key {key}")))
}

impl ExperimentFile {
    fn resolve(self) -> Result<Experiment, ConfigError> {
        let r = self.robot;
        let base = RobotParams::atrv2();
        let robot = RobotParams {
            m: r.m.unwrap_or(base.m),
            inertia_z: r.inertia_z.unwrap_or(base.inertia_z),
            a: r.a.unwrap_or(base.a),
            b: r.b.unwrap_or(base.b),
            half_track: r.half_track.unwrap_or(base.half_track),
            wheel_radius: r.wheel_radius.unwrap_or(base.wheel_radius),
            d0: r.d0.unwrap_or(base.d0),
            f_r: required(r.f_r, "robot.f_r")?,
            mu: required(r.mu, "robot.mu")?,
            g: r.g.unwrap_or(RobotParams::DEFAULT_G),
            sgn_epsilon: r.sgn_epsilon.unwrap_or(RobotParams::DEFAULT_SGN_EPSILON),
        };
        let standard = InitialCondition::standard();
        let [x, y, theta] = r.initial_pose.unwrap_or([standard.x, standard.y, standard.theta]);
        let [vx, vy, w] = r.initial_velocity.unwrap_or([
            standard.velocity.x_dot,
            standard.velocity.y_dot,
            standard.velocity.theta_dot,
        ]);
        let plant = match r.model.unwrap_or(ModelKey::Full) {
            ModelKey::Full => PlantModel::Full,
            ModelKey::Reduced => PlantModel::Reduced,
        };

        let trajectory = match self.trajectory {
            TrajectorySection::Circle { radius, angular_rate, center, phase } => TrajectorySpec::Circle {
                radius,
                angular_rate,
                center: vec2(center.unwrap_or([0.0, 0.0])),
                phase: phase.unwrap_or(0.0),
            },
            TrajectorySection::Lissajous { amplitude, base_rate, offset } => {
                TrajectorySpec::Lissajous { amplitude, base_rate, offset: vec2(offset.unwrap_or([0.0, 0.0])) }
            }
            TrajectorySection::StraightLine { start, velocity } => {
                TrajectorySpec::StraightLine { start: vec2(start), velocity: vec2(velocity) }
            }
        };

        let controller = match self.controller {
            ControllerSection::Backstepping { k1, k2, kappa3, k4, kappa5, k6, kappa7, delta_r } => {
                ControllerConfig::Backstepping {
                    gains: BacksteppingGains { k1, k2, kappa3, k4, kappa5, k6, kappa7 },
                    delta_r: delta_r.unwrap_or(DEFAULT_DELTA_R),
                }
            }
            ControllerSection::Dfl { kp1, kv1, ka1, kp2, kv2, ka2, eta_min } => ControllerConfig::Dfl {
                gains: DflGains { kp1, kv1, ka1, kp2, kv2, ka2 },
                eta_min: eta_min.unwrap_or(DEFAULT_ETA_MIN),
            },
        };

        let noise = self.noise.map(|n| NoiseSpec { mean: n.mean.unwrap_or([0.0; 6]), std_dev: n.std_dev });
        let t = self.timing;
        let dt_integrator = t.dt_integrator.unwrap_or(DEFAULT_DT);
        let sim = SimConfig {
            plant,
            controller,
            trajectory,
            a_r: t.a_r.unwrap_or(DEFAULT_A_R),
            t_end: t.t_end,
            dt_integrator,
            dt_control: t.dt_control.unwrap_or(dt_integrator),
            delay: t.delay.unwrap_or(0.0),
            noise,
            seed: t.seed.unwrap_or(0),
            initial: InitialCondition { x, y, theta, velocity: BodyVelocity::new(vx, vy, w) },
            robot,
            abort_error: t.abort_error.unwrap_or(DEFAULT_ABORT_ERROR),
        };
        let output = OutputSettings {
            steady_window: self.output.steady_window.unwrap_or(DEFAULT_STEADY_WINDOW),
            plot: self.output.plot.unwrap_or(false),
        };
        if !(output.steady_window > 0.0 && output.steady_window < sim.t_end) {
            return Err(ConfigError::Invalid(format!(
                "output.steady_window must lie in (0, timing.t_end), got {}",
                output.steady_window
            )));
        }
        Ok(Experiment { sim, output })
    }

    fn from_experiment(e: &Experiment) -> Self {
        let s = &e.sim;
        let p = &s.robot;
        let robot = RobotSection {
            model: Some(match s.plant {
                PlantModel::Full => ModelKey::Full,
                PlantModel::Reduced => ModelKey::Reduced,
            }),
            m: Some(p.m),
            inertia_z: Some(p.inertia_z),
            a: Some(p.a),
            b: Some(p.b),
            half_track: Some(p.half_track),
            wheel_radius: Some(p.wheel_radius),
            d0: Some(p.d0),
            f_r: Some(p.f_r),
            mu: Some(p.mu),
            g: Some(p.g),
            sgn_epsilon: Some(p.sgn_epsilon),
            initial_pose: Some([s.initial.x, s.initial.y, s.initial.theta]),
            initial_velocity: Some([s.initial.velocity.x_dot, s.initial.velocity.y_dot, s.initial.velocity.theta_dot]),
        };
        let trajectory = match s.trajectory {
            TrajectorySpec::Circle { radius, angular_rate, center, phase } => TrajectorySection::Circle {
                radius,
                angular_rate,
                center: Some([center.x, center.y]),
                phase: Some(phase),
            },
            TrajectorySpec::Lissajous { amplitude, base_rate, offset } => {
                TrajectorySection::Lissajous { amplitude, base_rate, offset: Some([offset.x, offset.y]) }
            }
            TrajectorySpec::StraightLine { start, velocity } => {
                TrajectorySection::StraightLine { start: [start.x, start.y], velocity: [velocity.x, velocity.y] }
            }
        };
        let controller = match s.controller {
            ControllerConfig::Backstepping { gains: g, delta_r } => ControllerSection::Backstepping {
                k1: g.k1,
                k2: g.k2,
                kappa3: g.kappa3,
                k4: g.k4,
                kappa5: g.kappa5,
                k6: g.k6,
                kappa7: g.kappa7,
                delta_r: Some(delta_r),
            },
            ControllerConfig::Dfl { gains: g, eta_min } => ControllerSection::Dfl {
                kp1: g.kp1,
                kv1: g.kv1,
                ka1: g.ka1,
                kp2: g.kp2,
                kv2: g.kv2,
                ka2: g.ka2,
                eta_min: Some(eta_min),
            },
        };
        ExperimentFile {
            robot,
            trajectory,
            controller,
            noise: s.noise.map(|n| NoiseSection { mean: Some(n.mean), std_dev: n.std_dev }),
            timing: TimingSection {
                t_end: s.t_end,
                dt_integrator: Some(s.dt_integrator),
                dt_control: Some(s.dt_control),
                delay: Some(s.delay),
                seed: Some(s.seed),
                a_r: Some(s.a_r),
                abort_error: Some(s.abort_error),
            },
            output: OutputSection { steady_window: Some(e.output.steady_window), plot: Some(e.output.plot) },
        }
    }
}

/// Parses an experiment without validating it against the simulator.
pub fn parse_experiment(text: &str) -> Result<Experiment, ConfigError> {
    let file: ExperimentFile = toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))?;
    file.resolve()
}

/// Reads, parses and validates an experiment file.
pub fn load_experiment(path: &Path) -> Result<Experiment, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Invalid(format!("cannot read {}: {e}", path.display())))?;
    let experiment = parse_experiment(&text)?;
    experiment.sim.validate()?;
    Ok(experiment)
}

/// Writes every field, defaults included.
pub fn render_experiment(experiment: &Experiment) -> String {
    toml::to_string(&ExperimentFile::from_experiment(experiment)).expect("experiment sections are plain TOML tables")
}
