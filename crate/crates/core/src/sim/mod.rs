//! Fixed-step closed-loop simulation with sampled noisy measurements,
//! zero-order hold and a pure transport delay on the actuator command.

pub mod integrator;
pub mod metrics;
pub mod noise;

use std::collections::VecDeque;

use log::{debug, warn};
use nalgebra::Vector2;

use crate::control::{
    tracking_error, BacksteppingController, BacksteppingGains, Controller, DflController, DflGains,
    LyapunovDiagnostics, TrackingError,
};
use crate::dynamics::{full_state_derivative, x_icr, BodyVelocity, FullState, IcrLocation, RobotParams, WheelTorques};
use crate::error::{ConfigError, SimError};
use crate::reduced::{
    check_input_map, constraint_residual, reduced_dynamics, torque_from_u, ControlInput, ReducedState,
};
use crate::trajectory::{validate_assumption1, TrajectorySpec};

pub use integrator::{dopri5_step, NonFiniteStep};
pub use metrics::{compute_metrics, error_metrics, Metrics};
pub use noise::{GaussianNoise, NoiseSpec};

/// Yaw-rate threshold below which the ICR is reported as undefined (rad/s).
pub const ICR_YAW_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlantModel {
    /// Unconstrained dynamics with friction.
    Full,
    /// Constrained model `q̇ = N η`, `η̇ = u`.
    Reduced,
}

impl PlantModel {
    pub fn name(&self) -> &'static str {
        match self {
            PlantModel::Full => "full",
            PlantModel::Reduced => "reduced",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControllerConfig {
    Backstepping { gains: BacksteppingGains, delta_r: f64 },
    Dfl { gains: DflGains, eta_min: f64 },
}

impl ControllerConfig {
    pub fn build(&self, d0: f64) -> Controller {
        match *self {
            ControllerConfig::Backstepping { gains, delta_r } => {
                Controller::Backstepping(BacksteppingController { gains, d0, delta_r })
            }
            ControllerConfig::Dfl { gains, eta_min } => Controller::Dfl(DflController { gains, d0, eta_min }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ControllerConfig::Backstepping { .. } => "backstepping",
            ControllerConfig::Dfl { .. } => "dfl",
        }
    }
}

/// Initial pose and body-frame velocity `(ẋ, ẏ, θ̇)`.
///
/// On the reduced plant `η = (ẋ, ẏ)` and the yaw rate follows from the constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialCondition {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub velocity: BodyVelocity,
}

impl InitialCondition {
    /// `(8 m, 5 m, π/2)` with body velocity `(0.5, 0.5, 0.1)`.
    pub fn standard() -> Self {
        Self { x: 8.0, y: 5.0, theta: std::f64::consts::FRAC_PI_2, velocity: BodyVelocity::new(0.5, 0.5, 0.1) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub plant: PlantModel,
    pub controller: ControllerConfig,
    pub trajectory: TrajectorySpec,
    /// Ceiling on reference acceleration checked before the run (m/s²).
    pub a_r: f64,
    pub t_end: f64,
    pub dt_integrator: f64,
    pub dt_control: f64,
    pub delay: f64,
    pub noise: Option<NoiseSpec>,
    pub seed: u64,
    pub initial: InitialCondition,
    pub robot: RobotParams,
    /// Tracking error beyond which the run is stopped and flagged divergent (m).
    pub abort_error: f64,
}

pub const DEFAULT_DT: f64 = 0.005;
pub const DEFAULT_A_R: f64 = 10.0;
pub const DEFAULT_ABORT_ERROR: f64 = 100.0;

impl SimConfig {
    /// Backstepping on the full plant, 5 m circle, no noise or delay.
    pub fn circle_default() -> Self {
        Self {
            plant: PlantModel::Full,
            controller: ControllerConfig::Backstepping {
                gains: BacksteppingGains::atrv2_circle(),
                delta_r: crate::control::backstepping::DEFAULT_DELTA_R,
            },
            trajectory: TrajectorySpec::default_circle(),
            a_r: DEFAULT_A_R,
            t_end: 60.0,
            dt_integrator: DEFAULT_DT,
            dt_control: DEFAULT_DT,
            delay: 0.0,
            noise: None,
            seed: 0,
            initial: InitialCondition::standard(),
            robot: RobotParams::atrv2(),
            abort_error: DEFAULT_ABORT_ERROR,
        }
    }

    fn ratio(numerator: f64, denominator: f64, what: &str) -> Result<usize, ConfigError> {
        let r = numerator / denominator;
        let n = r.round();
        if !(r.is_finite() && (r - n).abs() <= 1e-9 * n.max(1.0)) {
            return Err(ConfigError::Invalid(format!(
                "{what} must be an integer multiple ({numerator} / {denominator})"
            )));
        }
        Ok(n as usize)
    }

    /// Integrator steps, integrator steps per control period, control periods of delay.
    pub fn schedule(&self) -> Result<(usize, usize, usize), ConfigError> {
        if !(self.dt_integrator > 0.0 && self.dt_integrator.is_finite()) {
            return Err(ConfigError::Invalid("timing.dt_integrator must be > 0".into()));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(ConfigError::Invalid("timing.t_end must be > 0".into()));
        }
        if !(self.dt_control >= self.dt_integrator * (1.0 - 1e-12)) {
            return Err(ConfigError::Invalid("timing.dt_control must be >= timing.dt_integrator".into()));
        }
        if !(self.delay >= 0.0) {
            return Err(ConfigError::Invalid("timing.delay must be >= 0".into()));
        }
        let steps = Self::ratio(self.t_end, self.dt_integrator, "timing.t_end / timing.dt_integrator")?;
        let per_control = Self::ratio(self.dt_control, self.dt_integrator, "timing.dt_control / timing.dt_integrator")?;
        let delay = Self::ratio(self.delay, self.dt_control, "timing.delay / timing.dt_control")?;
        Ok((steps, per_control.max(1), delay))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.robot.validate()?;
        self.trajectory.validate()?;
        self.schedule()?;
        match &self.controller {
            ControllerConfig::Backstepping { gains, delta_r } => {
                gains.validate()?;
                if !(*delta_r > 0.0) {
                    return Err(ConfigError::Invalid("controller.delta_r must be > 0".into()));
                }
            }
            ControllerConfig::Dfl { gains, eta_min } => {
                gains.validate()?;
                if !(*eta_min > 0.0) {
                    return Err(ConfigError::Invalid("controller.eta_min must be > 0".into()));
                }
            }
        }
        if let Some(noise) = &self.noise {
            noise.validate()?;
        }
        if !(self.abort_error > 0.0) {
            return Err(ConfigError::Invalid("timing.abort_error must be > 0".into()));
        }
        check_input_map(&self.robot).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let delta_r = match self.controller {
            ControllerConfig::Backstepping { delta_r, .. } => delta_r,
            ControllerConfig::Dfl { .. } => crate::control::backstepping::DEFAULT_DELTA_R,
        };
        let report = validate_assumption1(&self.trajectory, self.t_end, delta_r, self.a_r);
        if !report.pass {
            return Err(ConfigError::Invalid(format!(
                "trajectory violates the speed/acceleration bounds over the horizon: min speed {} (floor {}), max acceleration {} (ceiling {})",
                report.min_speed, report.delta_r, report.max_acceleration, report.a_r
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FailureKind {
    NonFiniteState,
    ErrorBoundExceeded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Failure {
    pub step: usize,
    pub t: f64,
    pub kind: FailureKind,
}

/// Everything logged at one integrator grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub t: f64,
    pub truth: FullState,
    /// Latest sampled measurement seen by the controller.
    pub measured: FullState,
    pub reference: Vector2<f64>,
    /// Design input applied over `[t, t + dt)`.
    pub control: ControlInput,
    pub torques: WheelTorques,
    pub error: TrackingError,
    pub lyapunov: Option<LyapunovDiagnostics>,
    pub x_icr: IcrLocation,
    pub constraint_residual: f64,
    /// Integrator step at which the applied command was computed; `None` inside the initial delay window.
    pub command_origin: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub records: Vec<Record>,
    pub failure: Option<Failure>,
    /// Control instants at which the DFL singularity guard tripped.
    pub singular_events: usize,
    /// `(-b, a)`: admissible range of the ICR.
    pub icr_bounds: (f64, f64),
}

impl TimeSeries {
    pub fn duration(&self) -> f64 {
        match (self.records.first(), self.records.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum PlantState {
    Full(FullState),
    Reduced(ReducedState),
}

impl PlantState {
    fn truth(&self, d0: f64) -> FullState {
        match self {
            PlantState::Full(s) => *s,
            PlantState::Reduced(s) => s.to_full(d0),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Command {
    u: ControlInput,
    tau: WheelTorques,
    origin: Option<usize>,
}

/// Runs the closed loop. Configuration problems are errors; a diverging
/// state ends the run early and is reported through [`TimeSeries::failure`].
pub fn run(config: &SimConfig) -> Result<TimeSeries, SimError> {
    config.validate()?;
    let (steps, per_control, delay_periods) = config.schedule()?;
    let params = config.robot;
    let d0 = params.d0;
    let dt = config.dt_integrator;
    let dt_control = per_control as f64 * dt;
    let controller = config.controller.build(d0);
    let mut ctrl_state = controller.initial_state();
    let mut noise = GaussianNoise::new(config.seed);

    let init = config.initial;
    let mut plant = match config.plant {
        PlantModel::Full => PlantState::Full(FullState::from_body(init.x, init.y, init.theta, init.velocity)),
        PlantModel::Reduced => PlantState::Reduced(ReducedState {
            x: init.x,
            y: init.y,
            theta: init.theta,
            eta1: init.velocity.x_dot,
            eta2: init.velocity.y_dot,
        }),
    };

    let mut queue: VecDeque<Command> = VecDeque::with_capacity(delay_periods + 1);
    let mut applied = Command::default();
    let mut last_computed = Command::default();
    let mut measured = plant.truth(d0);
    let mut records = Vec::with_capacity(steps + 1);
    let mut failure = None;
    let mut singular_events = 0;

    for step in 0..=steps {
        let t = step as f64 * dt;
        let truth = plant.truth(d0);
        let reference = config.trajectory.sample(t);

        if step % per_control == 0 {
            let draw = noise.sample(&config.noise.unwrap_or_else(NoiseSpec::zero));
            let mut m = truth.to_array();
            if config.noise.is_some() {
                for (v, n) in m.iter_mut().zip(draw) {
                    *v += n;
                }
            }
            measured = FullState::from_array(m);

            let u = match controller.compute(&measured, &reference, ctrl_state, dt_control) {
                Ok((u, next)) => {
                    ctrl_state = next;
                    u
                }
                Err(e) => {
                    singular_events += 1;
                    debug!("t = {t:.3} s: {e}; holding previous command");
                    last_computed.u
                }
            };
            // Logged on the reduced plant too, where it is the torque the real robot would need.
            let tau = torque_from_u(&params, &measured, u)?;
            last_computed = Command { u, tau, origin: Some(step) };
            queue.push_back(last_computed);
            applied =
                if queue.len() > delay_periods { queue.pop_front().unwrap_or_default() } else { Command::default() };
        }

        let error = tracking_error(&truth, &reference, d0);
        let body = truth.body_velocity();
        records.push(Record {
            t,
            truth,
            measured,
            reference: reference.position,
            control: applied.u,
            torques: applied.tau,
            error,
            lyapunov: controller.diagnostics(&truth, &reference),
            x_icr: x_icr(body, ICR_YAW_TOL),
            constraint_residual: constraint_residual(body, d0),
            command_origin: applied.origin,
        });

        if error.xi_tilde.norm() > config.abort_error {
            warn!("tracking error exceeded {} m at t = {t:.3} s; stopping", config.abort_error);
            failure = Some(Failure { step, t, kind: FailureKind::ErrorBoundExceeded });
            break;
        }
        if step == steps {
            break;
        }

        let next = match plant {
            PlantState::Full(s) => {
                let tau = applied.tau;
                dopri5_step(
                    |_, y| full_state_derivative(&params, &FullState::from_array(*y), tau),
                    t,
                    &s.to_array(),
                    dt,
                )
                .map(|y| PlantState::Full(FullState::from_array(y)))
            }
            PlantState::Reduced(s) => {
                let u = applied.u;
                dopri5_step(|_, y| reduced_dynamics(&ReducedState::from_array(*y), u, d0), t, &s.to_array(), dt)
                    .map(|y| PlantState::Reduced(ReducedState::from_array(y)))
            }
        };
        match next {
            Ok(p) => plant = p,
            Err(_) => {
                warn!("non-finite state after step {step} (t = {t:.3} s)");
                failure = Some(Failure { step: step + 1, t: t + dt, kind: FailureKind::NonFiniteState });
                break;
            }
        }
    }

    Ok(TimeSeries { records, failure, singular_events, icr_bounds: (-params.b, params.a) })
}
