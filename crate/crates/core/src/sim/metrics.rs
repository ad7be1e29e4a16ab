//! Scalar performance measures of a tracking run.

use crate::dynamics::IcrLocation;
use crate::error::MetricsError;
use crate::sim::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// First time `|ξ̃|` drops to 10 % of its initial value, if it does.
    pub rise_time: Option<f64>,
    /// Largest error after the rise time.
    pub max_peak: Option<f64>,
    /// Second local error peak over the first, 0 with fewer than two peaks.
    pub decay_ratio: f64,
    /// RMS error over the final window.
    pub rms_error_steady: f64,
    pub max_error: f64,
    /// Fraction of samples with a defined ICR outside `[-b, a]`.
    pub icr_violation_fraction: f64,
    pub diverged: bool,
    pub singular_events: usize,
}

/// Error-only measures from a sampled error signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorMetrics {
    pub rise_time: Option<f64>,
    pub max_peak: Option<f64>,
    pub decay_ratio: f64,
    pub rms_error_steady: f64,
    pub max_error: f64,
}

fn local_peaks(errors: &[f64], from: usize) -> Vec<f64> {
    (from.max(1)..errors.len().saturating_sub(1))
        .filter(|&i| errors[i] > errors[i - 1] && errors[i] >= errors[i + 1])
        .map(|i| errors[i])
        .collect()
}

/// `window` is the length in seconds of the final averaging interval.
pub fn error_metrics(times: &[f64], errors: &[f64], window: f64) -> Result<ErrorMetrics, MetricsError> {
    let n = times.len().min(errors.len());
    if n == 0 {
        return Err(MetricsError::EmptySeries);
    }
    let (times, errors) = (&times[..n], &errors[..n]);
    let span = times[n - 1] - times[0];
    if window > span + 1e-9 {
        return Err(MetricsError::WindowTooLong { window, duration: span });
    }

    let threshold = 0.1 * errors[0];
    let rise = errors.iter().position(|&e| e <= threshold);
    let rise_time = rise.map(|i| times[i] - times[0]);
    let max_peak = rise.map(|i| errors[i..].iter().copied().fold(f64::NEG_INFINITY, f64::max));
    let peaks = local_peaks(errors, rise.unwrap_or(0));
    let decay_ratio = match peaks.as_slice() {
        [first, second, ..] if *first > 0.0 => second / first,
        _ => 0.0,
    };

    let t_from = times[n - 1] - window;
    let tail: Vec<f64> = times.iter().zip(errors).filter(|(t, _)| **t >= t_from - 1e-12).map(|(_, e)| *e).collect();
    let rms_error_steady = (tail.iter().map(|e| e * e).sum::<f64>() / tail.len() as f64).sqrt();
    let max_error = errors.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    Ok(ErrorMetrics { rise_time, max_peak, decay_ratio, rms_error_steady, max_error })
}

pub fn compute_metrics(series: &TimeSeries, window: f64) -> Result<Metrics, MetricsError> {
    let times: Vec<f64> = series.records.iter().map(|r| r.t).collect();
    let errors: Vec<f64> = series.records.iter().map(|r| r.error.xi_tilde.norm()).collect();
    let diverged = series.failure.is_some();
    let e = if diverged {
        // A truncated run may be shorter than the window; report over what exists.
        let w = window.min(times.last().copied().unwrap_or(0.0) - times.first().copied().unwrap_or(0.0));
        error_metrics(&times, &errors, w)?
    } else {
        error_metrics(&times, &errors, window)?
    };

    let (lo, hi) = series.icr_bounds;
    let mut defined = 0usize;
    let mut outside = 0usize;
    for r in &series.records {
        if let IcrLocation::Defined(x) = r.x_icr {
            defined += 1;
            if x < lo || x > hi {
                outside += 1;
            }
        }
    }
    let icr_violation_fraction = if defined == 0 { 0.0 } else { outside as f64 / defined as f64 };

    Ok(Metrics {
        rise_time: e.rise_time,
        max_peak: e.max_peak,
        decay_ratio: e.decay_ratio,
        rms_error_steady: e.rms_error_steady,
        max_error: e.max_error,
        icr_violation_fraction,
        diverged,
        singular_events: series.singular_events,
    })
}
