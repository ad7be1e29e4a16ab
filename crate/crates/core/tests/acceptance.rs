//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use skidsteer::config::{load_experiment, Experiment};
use skidsteer::dynamics::{full_dynamics, RobotParams};
use skidsteer::reduced::{n_matrix, n_matrix_dot, reduced_mass, torque_from_u, ControlInput, ReducedState};
use skidsteer::sim::{compute_metrics, dopri5_step, run, PlantModel, TimeSeries};
use skidsteer::trajectory::curvature;
use skidsteer::tuning::{
    lateral_matrix, lateral_polynomial, longitudinal_matrix, tune_lateral, tune_longitudinal, LateralPoles,
    LongitudinalPoles,
};

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn scenario(name: &str) -> Experiment {
    load_experiment(&root().join("scenarios").join(format!("{name}.cfg"))).expect("shipped scenario loads")
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_skidsteer"))
}

fn error_norms(series: &TimeSeries) -> Vec<(f64, f64)> {
    series.records.iter().map(|r| (r.t, r.error.xi_tilde.norm())).collect()
}

fn tail_max(series: &TimeSeries, window: f64) -> f64 {
    let end = series.records.last().map_or(0.0, |r| r.t);
    error_norms(series).into_iter().filter(|(t, _)| *t >= end - window).map(|(_, e)| e).fold(0.0, f64::max)
}

fn gain_value(stdout: &str, key: &str) -> Option<f64> {
    stdout.lines().find_map(|l| {
        let (k, v) = l.split_once('=')?;
        (k.trim() == key).then(|| v.trim().parse().ok()).flatten()
    })
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let long = bin().args(["tune", "longitudinal", "--poles", "-4", "-4", "--k1", "3"]).output().unwrap();
    let lat = bin().args(["tune", "lateral", "--k2", "15.8", "--poles", "-4", "-4", "-4"]).output().unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let long_out = String::from_utf8_lossy(&long.stdout);
    let lat_out = String::from_utf8_lossy(&lat.stdout);
    let k4 = gain_value(&long_out, "k4");
    let k6 = gain_value(&long_out, "k6");
    let k3 = gain_value(&lat_out, "kappa3").unwrap_or(f64::NAN);
    let k5 = gain_value(&lat_out, "kappa5").unwrap_or(f64::NAN);
    let k7 = gain_value(&lat_out, "kappa7").unwrap_or(f64::NAN);
    let pass = long.status.success()
        && lat.status.success()
        && k4 == Some(1.0)
        && k6 == Some(5.0)
        && (k3 - 7.95).abs() <= 0.01
        && (k7 - 4.05).abs() <= 0.01
        && (4e-4..=7e-4).contains(&k5)
        && elapsed < 1.0;
    outcome(pass, format!("k4 = {k4:?}, k6 = {k6:?}, kappa3 = {k3}, kappa5 = {k5}, kappa7 = {k7}, {elapsed:.3} s"))
}

fn sorted_re(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_long = 0.0f64;
    let mut worst_lat = 0.0f64;
    let mut worst_vieta = 0.0f64;
    for _ in 0..1000 {
        // Real distinct poles keep the eigenvalue comparison well conditioned.
        let l1 = -rng.random_range(0.5..10.0);
        let l2 = l1 - rng.random_range(0.1..5.0);
        let k1 = rng.random_range(0.05..0.95) * -l1;
        let g = tune_longitudinal(LongitudinalPoles { lambda1: l1, lambda2: l2 }, k1).unwrap();
        let eig = longitudinal_matrix(&g).complex_eigenvalues();
        let imag = eig.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        let got = sorted_re(eig.iter().map(|z| z.re).collect());
        let want = sorted_re(vec![l1, l2]);
        let err = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(imag, f64::max);
        worst_long = worst_long.max(err);

        // Repeated pair satisfying the sufficient feasibility bound.
        let lb = -rng.random_range(1.0..8.0);
        let k2 = rng.random_range(0.05..0.95) * lb * lb;
        let bound = 2.0 * lb * k2 / (lb * lb - k2);
        let l3 = bound * rng.random_range(0.05..0.95);
        let g = tune_lateral(k2, LateralPoles { lambda_bar: [lb, lb, l3] }).unwrap();
        let c = lateral_polynomial(&g, 1.0);
        let vieta = [-(2.0 * lb + l3), lb * lb + 2.0 * lb * l3, -lb * lb * l3];
        let err = c.iter().zip(&vieta).map(|(a, b)| (a - b).abs() / b.abs().max(1.0)).fold(0.0, f64::max);
        worst_vieta = worst_vieta.max(err);

        // Distinct lateral poles: eigenvalues of A2 at unit speed.
        let m1 = -rng.random_range(1.0..6.0);
        let m2 = m1 - rng.random_range(0.5..3.0);
        let m3 = m2 - rng.random_range(0.5..3.0);
        let k2 = rng.random_range(0.05..1.0);
        let Ok(g) = tune_lateral(k2, LateralPoles { lambda_bar: [m1, m2, m3] }) else { continue };
        let a2: Matrix3<f64> = lateral_matrix(&g, 1.0);
        let eig = a2.complex_eigenvalues();
        let imag = eig.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        let got = sorted_re(eig.iter().map(|z| z.re).collect());
        let want = sorted_re(vec![m1, m2, m3]);
        let err = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(imag, f64::max);
        worst_lat = worst_lat.max(err);
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst_long < 1e-9 && worst_lat < 1e-9 && worst_vieta < 1e-9 && elapsed < 5.0;
    outcome(
        pass,
        format!(
            "max error A1 eigenvalues {worst_long:.2e}, A2 eigenvalues {worst_lat:.2e}, lateral Vieta {worst_vieta:.2e}, {elapsed:.2} s"
        ),
    )
}

/// Worst relative mismatch between the central difference of L and the closed-form rate.
fn lyapunov_fd_error(series: &TimeSeries, dt: f64) -> (f64, f64) {
    let l: Vec<f64> = series.records.iter().map(|r| r.lyapunov.map_or(f64::NAN, |d| d.lyapunov)).collect();
    let ldot: Vec<f64> = series.records.iter().map(|r| r.lyapunov.map_or(f64::NAN, |d| d.lyapunov_rate)).collect();
    let mut worst = (0.0f64, 0.0);
    for i in 1..l.len() - 1 {
        if ldot[i].abs() > 1e-6 {
            let fd = (l[i + 1] - l[i - 1]) / (2.0 * dt);
            let rel = (fd - ldot[i]).abs() / ldot[i].abs();
            if rel.is_nan() || rel > worst.0 {
                worst = (rel, series.records[i].t);
            }
        }
    }
    worst
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut e = scenario("circle_tune");
    e.sim.plant = PlantModel::Reduced;
    let series = run(&e.sim).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let l: Vec<f64> = series.records.iter().map(|r| r.lyapunov.map_or(f64::NAN, |d| d.lyapunov)).collect();
    let max_increase = l.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let (worst_rel, worst_t) = lyapunov_fd_error(&series, e.sim.dt_integrator);
    let final_error = series.records.last().unwrap().error.xi_tilde.norm();
    let pass = series.failure.is_none()
        && max_increase <= 1e-8
        && worst_rel < 0.05
        && final_error < 1e-3
        && l.iter().all(|v| v.is_finite())
        && elapsed < 10.0;

    // Reported only: the same check with a 0.2 ms sample-and-hold period.
    let mut fine = e.sim.clone();
    fine.dt_integrator = 2e-4;
    fine.dt_control = 2e-4;
    fine.t_end = 10.0;
    let (fine_rel, _) = lyapunov_fd_error(&run(&fine).unwrap(), fine.dt_integrator);
    outcome(
        pass,
        format!(
            "max L increase {max_increase:.3e}, worst dL/dt relative error {worst_rel:.3e} at t = {worst_t:.3} s \
             ({fine_rel:.3e} with 0.2 ms hold), final error {final_error:.3e} m, {elapsed:.2} s"
        ),
    )
}

fn criterion_4() -> Outcome {
    let p = RobotParams::atrv2();
    let d0 = p.d0;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mass = Matrix3::from_diagonal(&Vector3::new(p.m, p.m, p.inertia_z));
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let s = ReducedState {
            x: rng.random_range(-10.0..10.0),
            y: rng.random_range(-10.0..10.0),
            theta: rng.random_range(-4.0..4.0),
            eta1: rng.random_range(-2.0..2.0),
            eta2: rng.random_range(-0.5..0.5),
        };
        let u = ControlInput::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let full = s.to_full(d0);
        let tau = torque_from_u(&p, &full, u).unwrap();
        // Project the full-plant acceleration onto the constrained coordinates.
        let n = n_matrix(s.theta, d0);
        let ndot = n_matrix_dot(s.theta, full.theta_dot);
        let eta = Vector2::new(s.eta1, s.eta2);
        let qdd = full_dynamics(&p, &full, tau);
        let nmn: Matrix2<f64> = n.transpose() * mass * n;
        let eta_dot = nmn.try_inverse().unwrap() * (n.transpose() * mass * (qdd - ndot * eta));
        worst = worst.max((eta_dot - Vector2::new(u.u1, u.u2)).abs().max());
        assert!((nmn - reduced_mass(&p)).abs().max() < 1e-9);
    }
    outcome(worst < 1e-10, format!("max |eta_dot - u| = {worst:.3e}"))
}

fn criterion_5() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for name in ["circle_tune", "circle_tune_dfl"] {
        let e = scenario(name);
        let series = run(&e.sim).unwrap();
        let m = tail_max(&series, 20.0);
        let ok = series.failure.is_none() && m > 1e-4 && m < 0.5;
        pass &= ok;
        let status = series.failure.map_or("completed".to_string(), |f| format!("diverged at {} s", f.t));
        details.push(format!("{name}: final-20 s max error {m:.4} m ({status})"));
    }
    outcome(pass, details.join("; "))
}

/// Times of local maxima of |curvature| of the reference over `[t0, t1]`.
fn curvature_peaks(e: &Experiment, t0: f64, t1: f64) -> Vec<f64> {
    let dt = 1e-3;
    let n = ((t1 - t0) / dt) as usize;
    let k: Vec<f64> = (0..=n).map(|i| curvature(&e.sim.trajectory.sample(t0 + i as f64 * dt)).abs()).collect();
    (1..n).filter(|&i| k[i] > k[i - 1] && k[i] >= k[i + 1]).map(|i| t0 + i as f64 * dt).collect()
}

fn largest_local_maxima(points: &[(f64, f64)], count: usize) -> Vec<(f64, f64)> {
    let mut peaks: Vec<(f64, f64)> =
        points.windows(3).filter(|w| w[1].1 > w[0].1 && w[1].1 >= w[2].1).map(|w| w[1]).collect();
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
    peaks.truncate(count);
    peaks
}

fn criterion_6() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for name in ["lissajous_noise_backstepping", "lissajous_noise_dfl"] {
        let e = scenario(name);
        let series = run(&e.sim).unwrap();
        let metrics = compute_metrics(&series, e.output.steady_window).unwrap();
        let rms = metrics.rms_error_steady;
        let rms_ok = !metrics.diverged && rms.is_finite() && rms < 0.5;

        // Peaks are compared over the same final window the steady RMS uses.
        let end = series.records.last().unwrap().t;
        let from = end - e.output.steady_window;
        let tail: Vec<(f64, f64)> = error_norms(&series).into_iter().filter(|(t, _)| *t >= from).collect();
        let k_peaks = curvature_peaks(&e, from - 2.0, end + 2.0);
        let peaks = largest_local_maxima(&tail, 4);
        let colocated = peaks.len() == 4 && peaks.iter().all(|(t, _)| k_peaks.iter().any(|tk| (tk - t).abs() <= 2.0));
        pass &= rms_ok && colocated && !metrics.diverged;
        let status = series.failure.map_or("completed".to_string(), |f| format!("diverged at {} s", f.t));
        let times: Vec<String> = peaks.iter().map(|(t, _)| format!("{t:.2}")).collect();
        details.push(format!(
            "{name}: steady RMS {rms:.4} m, error peaks at [{}] s, colocated {colocated} ({status})",
            times.join(", ")
        ));
    }
    outcome(pass, details.join("; "))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let bs = scenario("lissajous_noise_delay_backstepping");
    let dfl = scenario("lissajous_noise_delay_dfl");
    assert_eq!(bs.sim.seed, dfl.sim.seed);
    let sb = run(&bs.sim).unwrap();
    let sd = run(&dfl.sim).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let max_b = error_norms(&sb).iter().map(|p| p.1).fold(0.0, f64::max);
    let max_d = error_norms(&sd).iter().map(|p| p.1).fold(0.0, f64::max);
    let after_20 = error_norms(&sb).iter().filter(|p| p.0 >= 20.0).map(|p| p.1).fold(0.0, f64::max);
    let bs_ok = sb.failure.is_none() && max_b < 1.0;
    let dfl_ok = sd.failure.is_some() || max_d > 5.0 * max_b;
    let dfl_status = sd.failure.map_or("completed".to_string(), |f| format!("diverged at {} s", f.t));
    outcome(
        bs_ok && dfl_ok && elapsed < 60.0,
        format!(
            "backstepping max error {max_b:.4} m (initial {:.4} m, {after_20:.4} m after t = 20 s); dfl max error {max_d:.4} m ({dfl_status}); {elapsed:.2} s",
            sb.records[0].error.xi_tilde.norm()
        ),
    )
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut mismatched = Vec::new();
    let names = [
        "circle_tune",
        "circle_tune_dfl",
        "lissajous_noise_backstepping",
        "lissajous_noise_dfl",
        "lissajous_noise_delay_backstepping",
        "lissajous_noise_delay_dfl",
    ];
    for name in names {
        let cfg = root().join("scenarios").join(format!("{name}.cfg"));
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("{name}_{run}"));
            let status = bin().arg("simulate").arg(&cfg).arg("-o").arg(&out).output().unwrap().status;
            assert!(matches!(status.code(), Some(0) | Some(2)), "{name}: {status}");
            outputs.push(std::fs::read(out.join("series.csv")).unwrap());
        }
        if outputs[0] != outputs[1] || outputs[0].is_empty() {
            mismatched.push(name);
        }
    }
    outcome(mismatched.is_empty(), format!("{} scenarios run twice, mismatched: {mismatched:?}", names.len()))
}

fn criterion_9() -> Outcome {
    let solve = |dt: f64| {
        let steps = (1.0 / dt).round() as usize;
        let mut y = [1.0];
        for i in 0..steps {
            y = dopri5_step(|_, y: &[f64; 1]| [-y[0]], i as f64 * dt, &y, dt).unwrap();
        }
        (y[0] - (-1.0f64).exp()).abs()
    };
    let e1 = solve(0.005);
    let e2 = solve(0.0025);
    let ratio = e1 / e2;
    // At 5 ms the error already sits at the rounding floor, where the ratio carries
    // no information; the order is then read off steps where truncation dominates.
    let rounding_floor = 1e-14;
    let (c1, c2) = (solve(0.1), solve(0.05));
    let coarse_ratio = c1 / c2;
    let order_ok = ratio >= 16.0 || (e1 < rounding_floor && coarse_ratio >= 16.0);
    outcome(
        e1 < 1e-10 && order_ok,
        format!(
            "error {e1:.3e} at 5 ms, {e2:.3e} at 2.5 ms (ratio {ratio:.1}); {c1:.3e} at 100 ms, {c2:.3e} at 50 ms (ratio {coarse_ratio:.1})"
        ),
    )
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = root().join("scenarios/circle_tune.cfg");
    let status = bin().arg("simulate").arg(&cfg).arg("-o").arg(dir.path()).status().unwrap();

    let mut metrics = csv::Reader::from_path(dir.path().join("metrics.csv")).unwrap();
    let has_fraction = metrics.headers().unwrap().iter().any(|h| h == "icr_violation_fraction");
    let mut reader = csv::Reader::from_path(dir.path().join("series.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(ti), Some(xi), Some(ri)) = (col("t"), col("x_icr"), col("constraint_residual")) else {
        return outcome(false, "x_icr or constraint_residual column missing".into());
    };
    let rows: Vec<[f64; 3]> = reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            [ti, xi, ri].map(|i| r[i].parse::<f64>().unwrap())
        })
        .collect();
    let end = rows.last().map_or(0.0, |r| r[0]);
    let tail: Vec<&[f64; 3]> = rows.iter().filter(|r| r[0] >= end - 20.0).collect();
    let icr: Vec<f64> = tail.iter().map(|r| r[1]).filter(|v| v.is_finite()).collect();
    let mean_icr = icr.iter().sum::<f64>() / icr.len() as f64;
    let residual: Vec<f64> = tail.iter().map(|r| r[2].abs()).collect();
    let finite = residual.iter().all(|v| v.is_finite());
    let mean_res = residual.iter().sum::<f64>() / residual.len() as f64;
    let spread = (residual.iter().map(|v| (v - mean_res).powi(2)).sum::<f64>() / residual.len() as f64).sqrt();
    let a = RobotParams::atrv2().a;
    let pass =
        status.success() && has_fraction && (0.0..=a).contains(&mean_icr) && finite && mean_res > 1e-6 && spread > 1e-6;
    outcome(
        pass,
        format!(
            "mean x_ICR over final 20 s {mean_icr:.4} m (a = {a}), |residual| mean {mean_res:.3e} std {spread:.3e}, exit {:?}",
            status.code()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "gain reproduction", criterion_1),
        (2, "pole-placement oracle", criterion_2),
        (3, "Lyapunov decrease on the reduced plant", criterion_3),
        (4, "change-of-variables identity", criterion_4),
        (5, "full-plant circle tracking", criterion_5),
        (6, "noise robustness", criterion_6),
        (7, "delay experiment", criterion_7),
        (8, "determinism", criterion_8),
        (9, "integrator order", criterion_9),
        (10, "ICR diagnostic", criterion_10),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| outcome(false, "panicked".into()));
        let tag = if result.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {tag}: {name}: {}", result.detail);
        failed += usize::from(!result.pass);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
