use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
    #[error("failed to parse experiment file: {0}")]
    Parse(String),
    #[error("configurations differ in {0}")]
    Mismatch(String),
}

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum ControlError {
    #[error("reference speed {speed} is below the floor {floor}")]
    DegenerateReference { speed: f64, floor: f64 },
    #[error("longitudinal velocity {eta1} is below the singularity guard {eta_min}")]
    SingularVelocity { eta1: f64, eta_min: f64 },
    #[error("input map N^T E is singular (|det| = {det})")]
    SingularInputMap { det: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TuningError {
    #[error("k1 < -max(poles) violated: k1 = {k1}, poles = ({l1}, {l2})")]
    InfeasibleK1 { k1: f64, l1: f64, l2: f64 },
    #[error("poles must be strictly negative reals, got {0}")]
    NonNegativePole(f64),
    #[error("gains must be strictly positive: {0}")]
    InfeasibleGains(String),
    #[error("unsupported polynomial degree {0}; only degree <= 3 is handled")]
    UnsupportedDegree(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("non-finite state at step {step} (t = {t} s)")]
    NonFiniteState { step: usize, t: f64 },
    #[error(transparent)]
    Control(#[from] ControlError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("time series is empty")]
    EmptySeries,
    #[error("steady window {window} s is not shorter than the series duration {duration} s")]
    WindowTooLong { window: f64, duration: f64 },
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("plot rendering failed: {0}")]
    Render(String),
}
