//! Command-line front end.
//!
//! Exit status: 0 on success, 1 on configuration or I/O errors and infeasible
//! tuning requests, 2 when a simulation stops early because its state diverged.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{load_experiment, Experiment};
use crate::error::{ConfigError, ReportError};
use crate::plot::plot_series;
use crate::report::{fmt_f64, metrics_row, write_run, METRICS_COLUMNS};
use crate::sim::{compute_metrics, run, Metrics, TimeSeries};
use crate::tuning::{
    feasibility_check, hurwitz_check, lateral_eigenvalues, lateral_polynomial, longitudinal_eigenvalues,
    longitudinal_polynomial, tune_lateral, tune_longitudinal, LateralPoles, LongitudinalPoles,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_DIVERGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "skidsteer", version, about = "Skid-steering robot tracking simulations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment and write series.csv, metrics.csv and manifest.
    Simulate {
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run two experiments on the same trajectory and timing and tabulate them.
    Compare {
        config_a: PathBuf,
        config_b: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Compute controller gains from desired closed-loop poles.
    Tune(TuneArgs),
    /// Render a series.csv as SVG.
    Plot {
        csv: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TuneMode {
    Longitudinal,
    Lateral,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    pub mode: TuneMode,
    #[arg(long, num_args = 1.., required = true, allow_negative_numbers = true)]
    pub poles: Vec<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub k1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub k2: Option<f64>,
}

/// Parses `args` (program name first) and executes the command.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Simulate { config, output } => cmd_simulate(&config, &output, out),
        Command::Compare { config_a, config_b, output } => cmd_compare(&config_a, &config_b, &output, out),
        Command::Tune(args) => cmd_tune(&args, out),
        Command::Plot { csv, output } => plot_series(&csv, &output).map(|_| EXIT_OK).map_err(|e| e.to_string()),
    };
    match result {
        Ok(code) => code,
        Err(message) => {
            let _ = writeln!(err, "error: {message}");
            EXIT_ERROR
        }
    }
}

fn simulate_experiment(experiment: &Experiment) -> Result<(TimeSeries, Metrics), String> {
    let series = run(&experiment.sim).map_err(|e| e.to_string())?;
    let metrics = compute_metrics(&series, experiment.output.steady_window).map_err(|e| e.to_string())?;
    Ok((series, metrics))
}

fn load(path: &Path) -> Result<Experiment, String> {
    load_experiment(path).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn cmd_simulate(config: &Path, output: &Path, out: &mut dyn Write) -> Result<i32, String> {
    let experiment = load(config)?;
    let (series, metrics) = simulate_experiment(&experiment)?;
    write_run(output, &experiment, &series, &metrics).map_err(|e| e.to_string())?;
    if experiment.output.plot {
        plot_series(&output.join("series.csv"), &output.join("series.svg")).map_err(|e| e.to_string())?;
    }
    match series.failure {
        None => {
            let _ = writeln!(out, "wrote {} records to {}", series.records.len(), output.display());
            Ok(EXIT_OK)
        }
        Some(f) => {
            log::warn!("run stopped at t = {} s ({:?})", f.t, f.kind);
            let _ = writeln!(out, "run diverged at t = {} s; partial series written to {}", f.t, output.display());
            Ok(EXIT_DIVERGED)
        }
    }
}

/// Trajectory and timing must agree for a side-by-side comparison.
pub fn check_comparable(a: &Experiment, b: &Experiment) -> Result<(), ConfigError> {
    let (a, b) = (&a.sim, &b.sim);
    if a.trajectory != b.trajectory {
        return Err(ConfigError::Mismatch("trajectory".into()));
    }
    let timing = [
        ("timing.t_end", a.t_end, b.t_end),
        ("timing.dt_integrator", a.dt_integrator, b.dt_integrator),
        ("timing.dt_control", a.dt_control, b.dt_control),
        ("timing.delay", a.delay, b.delay),
    ];
    for (name, x, y) in timing {
        if x != y {
            return Err(ConfigError::Mismatch(format!("{name} ({x} vs {y})")));
        }
    }
    Ok(())
}

fn run_labels(a: &Path, b: &Path) -> (String, String) {
    let stem = |p: &Path| p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let (la, lb) = (stem(a), stem(b));
    if la == lb || la.is_empty() || lb.is_empty() {
        (format!("{la}_a"), format!("{lb}_b"))
    } else {
        (la, lb)
    }
}

fn write_error_table(
    path: &Path,
    labels: (&str, &str),
    a: &TimeSeries,
    b: &TimeSeries,
    component: impl Fn(&crate::sim::Record) -> f64,
) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(["t", labels.0, labels.1])?;
    let longer = if a.records.len() >= b.records.len() { a } else { b };
    for (i, r) in longer.records.iter().enumerate() {
        let va = a.records.get(i).map_or(f64::NAN, &component);
        let vb = b.records.get(i).map_or(f64::NAN, &component);
        w.write_record([fmt_f64(r.t), fmt_f64(va), fmt_f64(vb)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_compare(config_a: &Path, config_b: &Path, output: &Path, out: &mut dyn Write) -> Result<i32, String> {
    let a = load(config_a)?;
    let b = load(config_b)?;
    check_comparable(&a, &b).map_err(|e| e.to_string())?;

    let (ra, rb) = std::thread::scope(|scope| {
        let ha = scope.spawn(|| simulate_experiment(&a));
        let hb = scope.spawn(|| simulate_experiment(&b));
        (ha.join(), hb.join())
    });
    let (sa, ma) = ra.map_err(|_| "simulation thread panicked".to_string())??;
    let (sb, mb) = rb.map_err(|_| "simulation thread panicked".to_string())??;

    let (la, lb) = run_labels(config_a, config_b);
    let write = || -> Result<(), ReportError> {
        std::fs::create_dir_all(output)?;
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(output.join("metrics.csv"))?));
        w.write_record(["metric", la.as_str(), lb.as_str()])?;
        for ((name, va), vb) in METRICS_COLUMNS.iter().zip(metrics_row(&ma)).zip(metrics_row(&mb)) {
            w.write_record([name.to_string(), va, vb])?;
        }
        w.flush()?;
        write_error_table(&output.join("errors_x.csv"), (&la, &lb), &sa, &sb, |r| r.error.xi_tilde.x)?;
        write_error_table(&output.join("errors_y.csv"), (&la, &lb), &sa, &sb, |r| r.error.xi_tilde.y)?;
        Ok(())
    };
    write().map_err(|e| e.to_string())?;

    let _ = writeln!(out, "{:<24} {:>24} {:>24}", "metric", la, lb);
    for ((name, va), vb) in METRICS_COLUMNS.iter().zip(metrics_row(&ma)).zip(metrics_row(&mb)) {
        let _ = writeln!(out, "{name:<24} {va:>24} {vb:>24}");
    }
    Ok(EXIT_OK)
}

fn fmt_poles(poles: &[num_complex::Complex64]) -> String {
    poles
        .iter()
        .map(|z| if z.im == 0.0 { format!("{:.6}", z.re) } else { format!("{:.6}{:+.6}i", z.re, z.im) })
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn cmd_tune(args: &TuneArgs, out: &mut dyn Write) -> Result<i32, String> {
    match args.mode {
        TuneMode::Longitudinal => {
            let [l1, l2] = args.poles[..] else {
                return Err(format!("longitudinal tuning takes 2 poles, got {}", args.poles.len()));
            };
            let k1 = args.k1.ok_or("longitudinal tuning needs --k1")?;
            let gains =
                tune_longitudinal(LongitudinalPoles { lambda1: l1, lambda2: l2 }, k1).map_err(|e| e.to_string())?;
            let poly = longitudinal_polynomial(&gains);
            if !hurwitz_check(&poly).map_err(|e| e.to_string())? {
                return Err(format!("Hurwitz condition violated for s^2 + {} s + {}", poly[0], poly[1]));
            }
            let _ = writeln!(out, "# closed-loop poles: {}", fmt_poles(&longitudinal_eigenvalues(&gains)));
            let _ = writeln!(out, "[controller]\nkind = \"backstepping\"");
            let _ = writeln!(out, "k1 = {:?}\nk4 = {:?}\nk6 = {:?}", gains.k1, gains.k4, gains.k6);
        }
        TuneMode::Lateral => {
            let [l1, l2, l3] = args.poles[..] else {
                return Err(format!("lateral tuning takes 3 poles, got {}", args.poles.len()));
            };
            let k2 = args.k2.ok_or("lateral tuning needs --k2")?;
            let poles = LateralPoles { lambda_bar: [l1, l2, l3] };
            if l1 == l2 && !feasibility_check(k2, poles) {
                return Err(format!(
                    "k2 < lambda1^2 and lambda3 > 2 lambda1 k2 / (lambda1^2 - k2) violated: k2 = {k2}, poles = ({l1}, {l2}, {l3})"
                ));
            }
            let gains = tune_lateral(k2, poles).map_err(|e| e.to_string())?;
            let poly = lateral_polynomial(&gains, 1.0);
            if !hurwitz_check(&poly).map_err(|e| e.to_string())? {
                return Err(format!(
                    "Hurwitz condition violated for s^3 + {} s^2 + {} s + {}",
                    poly[0], poly[1], poly[2]
                ));
            }
            let _ = writeln!(
                out,
                "# closed-loop poles at unit reference speed: {}",
                fmt_poles(&lateral_eigenvalues(&gains, 1.0))
            );
            let _ = writeln!(out, "[controller]\nkind = \"backstepping\"");
            let _ = writeln!(
                out,
                "k2 = {:?}\nkappa3 = {:?}\nkappa5 = {:?}\nkappa7 = {:?}",
                gains.k2, gains.kappa3, gains.kappa5, gains.kappa7
            );
        }
    }
    Ok(EXIT_OK)
}
