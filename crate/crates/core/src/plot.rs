//! SVG rendering of a `series.csv`: XY path and per-axis errors.

use std::path::Path;

use plotters::prelude::*;

use crate::error::ReportError;

const REQUIRED: [&str; 7] = ["t", "X", "Y", "xi_r_x", "xi_r_y", "err_x", "err_y"];

/// The columns needed for plotting, in `REQUIRED` order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlotData {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub ref_x: Vec<f64>,
    pub ref_y: Vec<f64>,
    pub err_x: Vec<f64>,
    pub err_y: Vec<f64>,
}

pub fn read_plot_data(path: &Path) -> Result<PlotData, ReportError> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let mut index = [0usize; 7];
    for (slot, name) in index.iter_mut().zip(REQUIRED) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| ReportError::Schema(format!("missing column {name}")))?;
    }
    let mut columns: [Vec<f64>; 7] = Default::default();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        for (col, &i) in columns.iter_mut().zip(&index) {
            let field = record.get(i).unwrap_or("");
            let v = field.parse::<f64>().map_err(|_| {
                ReportError::Schema(format!("row {}: column {} is not a number: {field:?}", line + 2, &headers[i]))
            })?;
            col.push(v);
        }
    }
    if columns[0].is_empty() {
        return Err(ReportError::Schema("series has no rows".into()));
    }
    let [t, x, y, ref_x, ref_y, err_x, err_y] = columns;
    Ok(PlotData { t, x, y, ref_x, ref_y, err_x, err_y })
}

fn bounds<'a>(values: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    let pad = ((hi - lo) * 0.05).max(1e-6);
    (lo - pad, hi + pad)
}

fn finite_points<'a>(a: &'a [f64], b: &'a [f64]) -> impl Iterator<Item = (f64, f64)> + 'a {
    a.iter().zip(b).filter(|(p, q)| p.is_finite() && q.is_finite()).map(|(p, q)| (*p, *q))
}

fn render_err<E: std::fmt::Display>(e: E) -> ReportError {
    ReportError::Render(e.to_string())
}

pub fn render_svg(data: &PlotData, out: &Path) -> Result<(), ReportError> {
    let root = SVGBackend::new(out, (1200, 520)).into_drawing_area();
    root.fill(&WHITE).map_err(render_err)?;
    let (left, right) = root.split_horizontally(600);

    let (x0, x1) = bounds(data.x.iter().chain(&data.ref_x));
    let (y0, y1) = bounds(data.y.iter().chain(&data.ref_y));
    let mut path = ChartBuilder::on(&left)
        .caption("path", ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(35)
        .y_label_area_size(45)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(render_err)?;
    path.configure_mesh().x_desc("X (m)").y_desc("Y (m)").draw().map_err(render_err)?;
    path.draw_series(LineSeries::new(finite_points(&data.ref_x, &data.ref_y), &BLACK))
        .map_err(render_err)?
        .label("reference")
        .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], BLACK));
    path.draw_series(LineSeries::new(finite_points(&data.x, &data.y), &RED))
        .map_err(render_err)?
        .label("robot")
        .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], RED));
    path.configure_series_labels().border_style(BLACK).draw().map_err(render_err)?;

    let (t0, t1) = bounds(data.t.iter());
    let (e0, e1) = bounds(data.err_x.iter().chain(&data.err_y));
    let mut errors = ChartBuilder::on(&right)
        .caption("tracking error", ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(35)
        .y_label_area_size(55)
        .build_cartesian_2d(t0..t1, e0..e1)
        .map_err(render_err)?;
    errors.configure_mesh().x_desc("t (s)").y_desc("error (m)").draw().map_err(render_err)?;
    errors
        .draw_series(LineSeries::new(finite_points(&data.t, &data.err_x), &BLUE))
        .map_err(render_err)?
        .label("x")
        .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], BLUE));
    errors
        .draw_series(LineSeries::new(finite_points(&data.t, &data.err_y), &GREEN))
        .map_err(render_err)?
        .label("y")
        .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], GREEN));
    errors.configure_series_labels().border_style(BLACK).draw().map_err(render_err)?;

    root.present().map_err(render_err)?;
    Ok(())
}

pub fn plot_series(csv: &Path, out: &Path) -> Result<(), ReportError> {
    let data = read_plot_data(csv)?;
    render_svg(&data, out)
}
