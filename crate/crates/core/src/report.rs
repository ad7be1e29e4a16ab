//! CSV and manifest output of simulation runs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::config::{render_experiment, Experiment};
use crate::error::ReportError;
use crate::sim::{FailureKind, Metrics, TimeSeries};

/// Bumped whenever the column set or order of `series.csv` changes.
pub const SCHEMA_VERSION: u32 = 1;

pub const SERIES_COLUMNS: [&str; 28] = [
    "t",
    "X",
    "Y",
    "theta",
    "Xdot",
    "Ydot",
    "thetadot",
    "X_meas",
    "Y_meas",
    "theta_meas",
    "Xdot_meas",
    "Ydot_meas",
    "thetadot_meas",
    "xi_r_x",
    "xi_r_y",
    "u1",
    "u2",
    "tau1",
    "tau2",
    "err_x",
    "err_y",
    "err_body_1",
    "err_body_2",
    "theta_err",
    "L",
    "Ldot",
    "x_icr",
    "constraint_residual",
];

pub const METRICS_COLUMNS: [&str; 8] = [
    "rise_time",
    "max_peak",
    "decay_ratio",
    "rms_error_steady",
    "max_error",
    "icr_violation_fraction",
    "diverged",
    "singular_events",
];

/// Shortest round-trip decimal; `NaN` for missing values.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn fmt_opt(v: Option<f64>) -> String {
    fmt_f64(v.unwrap_or(f64::NAN))
}

pub fn series_rows(series: &TimeSeries) -> impl Iterator<Item = [f64; 28]> + '_ {
    series.records.iter().map(|r| {
        let s = r.truth;
        let m = r.measured;
        let (l, ldot) = r.lyapunov.map_or((f64::NAN, f64::NAN), |d| (d.lyapunov, d.lyapunov_rate));
        [
            r.t,
            s.x,
            s.y,
            s.theta,
            s.x_dot,
            s.y_dot,
            s.theta_dot,
            m.x,
            m.y,
            m.theta,
            m.x_dot,
            m.y_dot,
            m.theta_dot,
            r.reference.x,
            r.reference.y,
            r.control.u1,
            r.control.u2,
            r.torques.tau1,
            r.torques.tau2,
            r.error.xi_tilde.x,
            r.error.xi_tilde.y,
            r.error.xi_bar.x,
            r.error.xi_bar.y,
            r.error.theta_tilde,
            l,
            ldot,
            r.x_icr.value().unwrap_or(f64::NAN),
            r.constraint_residual,
        ]
    })
}

pub fn write_series<W: Write>(out: W, series: &TimeSeries) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SERIES_COLUMNS)?;
    for row in series_rows(series) {
        w.write_record(row.iter().map(|v| fmt_f64(*v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn metrics_row(m: &Metrics) -> [String; 8] {
    [
        fmt_opt(m.rise_time),
        fmt_opt(m.max_peak),
        fmt_f64(m.decay_ratio),
        fmt_f64(m.rms_error_steady),
        fmt_f64(m.max_error),
        fmt_f64(m.icr_violation_fraction),
        m.diverged.to_string(),
        m.singular_events.to_string(),
    ]
}

pub fn write_metrics<W: Write>(out: W, m: &Metrics) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(METRICS_COLUMNS)?;
    w.write_record(metrics_row(m))?;
    w.flush()?;
    Ok(())
}

pub fn status(series: &TimeSeries) -> &'static str {
    match series.failure.map(|f| f.kind) {
        None => "completed",
        Some(FailureKind::NonFiniteState) => "non_finite_state",
        Some(FailureKind::ErrorBoundExceeded) => "error_bound_exceeded",
    }
}

/// Key-value header followed by the fully resolved experiment.
pub fn write_manifest<W: Write>(mut out: W, experiment: &Experiment, series: &TimeSeries) -> Result<(), ReportError> {
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    writeln!(out, "schema_version = {SCHEMA_VERSION}")?;
    writeln!(out, "version = \"{}\"", env!("CARGO_PKG_VERSION"))?;
    writeln!(out, "timestamp = {timestamp}")?;
    writeln!(out, "noise_policy = \"one draw per control instant, measurement only\"")?;
    writeln!(out, "delay_window_policy = \"zero control until the first delayed command\"")?;
    writeln!(out, "integrator = \"dormand-prince 5(4), fixed step, no error control\"")?;
    writeln!(out, "status = \"{}\"", status(series))?;
    if let Some(f) = series.failure {
        writeln!(out, "failure_step = {}", f.step)?;
        writeln!(out, "failure_time = {:?}", f.t)?;
    }
    writeln!(out, "records = {}", series.records.len())?;
    writeln!(out, "singular_events = {}", series.singular_events)?;
    let columns: Vec<String> = SERIES_COLUMNS.iter().map(|c| format!("\"{c}\"")).collect();
    writeln!(out, "series_columns = [{}]", columns.join(", "))?;
    writeln!(out)?;
    out.write_all(render_experiment(experiment).as_bytes())?;
    Ok(())
}

/// Writes `series.csv`, `metrics.csv` and `manifest` into `dir`.
pub fn write_run(
    dir: &Path,
    experiment: &Experiment,
    series: &TimeSeries,
    metrics: &Metrics,
) -> Result<(), ReportError> {
    std::fs::create_dir_all(dir)?;
    write_series(BufWriter::new(File::create(dir.join("series.csv"))?), series)?;
    write_metrics(BufWriter::new(File::create(dir.join("metrics.csv"))?), metrics)?;
    write_manifest(BufWriter::new(File::create(dir.join("manifest"))?), experiment, series)?;
    Ok(())
}
