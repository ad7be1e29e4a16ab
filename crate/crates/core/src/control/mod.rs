//! Tracking controllers producing the design inputs `(u1, u2)`.

pub mod backstepping;
pub mod dfl;

pub use backstepping::{
    aux_velocities, control_point, omega_r, tracking_error, BacksteppingController, BacksteppingGains,
    LyapunovDiagnostics, TrackingError,
};
pub use dfl::{DflController, DflGains, DflState};

use crate::dynamics::FullState;
use crate::error::ControlError;
use crate::reduced::ControlInput;
use crate::trajectory::ReferenceSample;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Controller {
    Backstepping(BacksteppingController),
    Dfl(DflController),
}

/// Per-run controller memory. Only the DFL baseline has any.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ControllerState {
    #[default]
    Stateless,
    Dfl(DflState),
}

impl Controller {
    pub fn name(&self) -> &'static str {
        match self {
            Controller::Backstepping(_) => "backstepping",
            Controller::Dfl(_) => "dfl",
        }
    }

    pub fn initial_state(&self) -> ControllerState {
        match self {
            Controller::Backstepping(_) => ControllerState::Stateless,
            Controller::Dfl(_) => ControllerState::Dfl(DflState::default()),
        }
    }

    /// Evaluates the law once; `dt` is the control period.
    pub fn compute(
        &self,
        measured: &FullState,
        reference: &ReferenceSample,
        state: ControllerState,
        dt: f64,
    ) -> Result<(ControlInput, ControllerState), ControlError> {
        match (self, state) {
            (Controller::Backstepping(c), s) => Ok((c.control(measured, reference)?, s)),
            (Controller::Dfl(c), ControllerState::Dfl(s)) => {
                let (u, next) = c.control(measured, reference, s, dt)?;
                Ok((u, ControllerState::Dfl(next)))
            }
            (Controller::Dfl(c), ControllerState::Stateless) => {
                let (u, next) = c.control(measured, reference, DflState::default(), dt)?;
                Ok((u, ControllerState::Dfl(next)))
            }
        }
    }

    pub fn diagnostics(&self, state: &FullState, reference: &ReferenceSample) -> Option<LyapunovDiagnostics> {
        match self {
            Controller::Backstepping(c) => c.diagnostics(state, reference).ok(),
            Controller::Dfl(_) => None,
        }
    }
}
