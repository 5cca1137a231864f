//! Static SVG plots of harness CSV output.

use std::path::{Path, PathBuf};

use plotters::prelude::*;

use spectral_edge::ginibre::kostlan_radius_cdf;
use spectral_edge::stats::linear_slope;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Histogram,
    /// Empirical CDF, optionally overlaid with the Kostlan law.
    Cdf,
    /// `log y` against `log x` with a least-squares line.
    LogLog,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub kind: PlotKind,
    pub x: String,
    pub y: Option<String>,
    pub bins: usize,
    pub kostlan_n: Option<usize>,
    pub output: PathBuf,
}

/// Read the named numeric columns; `nan` cells are kept.
fn read_columns(path: &Path, names: &[&str]) -> Result<Vec<Vec<f64>>> {
    let csv_err = |source| HarnessError::Csv {
        path: path.display().to_string(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = r.headers().map_err(csv_err)?.clone();
    let idx = names
        .iter()
        .map(|n| {
            header
                .iter()
                .position(|h| h == *n)
                .ok_or_else(|| HarnessError::usage(format!("{}: no column `{n}`", path.display())))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut cols = vec![Vec::new(); names.len()];
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        for (col, &i) in cols.iter_mut().zip(&idx) {
            let cell = rec.get(i).unwrap_or("");
            let v = cell
                .parse::<f64>()
                .map_err(|_| HarnessError::usage(format!("{}: non-numeric cell `{cell}`", path.display())))?;
            col.push(v);
        }
    }
    if cols[0].is_empty() {
        return Err(HarnessError::usage(format!("{}: no data rows", path.display())));
    }
    Ok(cols)
}

fn bounds(xs: &[f64]) -> (f64, f64) {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        let pad = 0.02 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn plot_err<E: std::fmt::Display>(e: E) -> HarnessError {
    HarnessError::Plot(e.to_string())
}

/// Render `csv` according to `spec`. Nothing is written unless the data are usable.
pub fn render(csv: &Path, spec: &PlotSpec) -> Result<()> {
    let names: Vec<&str> = match (spec.kind, &spec.y) {
        (PlotKind::LogLog, Some(y)) => vec![spec.x.as_str(), y.as_str()],
        (PlotKind::LogLog, None) => return Err(HarnessError::usage("loglog plots need --y")),
        _ => vec![spec.x.as_str()],
    };
    let cols = read_columns(csv, &names)?;
    let xs: Vec<f64> = cols[0].iter().copied().filter(|v| v.is_finite()).collect();
    if xs.is_empty() {
        return Err(HarnessError::usage(format!("column `{}` has no finite values", spec.x)));
    }
    match spec.kind {
        PlotKind::Histogram => histogram(&xs, spec),
        PlotKind::Cdf => cdf(&xs, spec),
        PlotKind::LogLog => loglog(&cols[0], &cols[1], spec),
    }
}

fn histogram(xs: &[f64], spec: &PlotSpec) -> Result<()> {
    let bins = spec.bins.max(1);
    let (lo, hi) = bounds(xs);
    let w = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in xs {
        counts[(((x - lo) / w) as usize).min(bins - 1)] += 1;
    }
    let top = *counts.iter().max().unwrap_or(&1) as f64;
    let root = SVGBackend::new(&spec.output, (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .margin(20)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .caption(format!("histogram of {}", spec.x), ("sans-serif", 20))
        .build_cartesian_2d(lo..hi, 0.0..top * 1.05)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc(spec.x.as_str())
        .y_desc("count")
        .draw()
        .map_err(plot_err)?;
    chart
        .draw_series(counts.iter().enumerate().map(|(i, &c)| {
            let x0 = lo + i as f64 * w;
            Rectangle::new([(x0, 0.0), (x0 + w, c as f64)], BLUE.mix(0.5).filled())
        }))
        .map_err(plot_err)?;
    root.present().map_err(plot_err)
}

fn cdf(xs: &[f64], spec: &PlotSpec) -> Result<()> {
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let m = sorted.len() as f64;
    let (lo, hi) = bounds(&sorted);
    let root = SVGBackend::new(&spec.output, (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .margin(20)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .caption(format!("empirical CDF of {}", spec.x), ("sans-serif", 20))
        .build_cartesian_2d(lo..hi, 0.0..1.0)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc(spec.x.as_str())
        .draw()
        .map_err(plot_err)?;
    let steps = sorted
        .iter()
        .enumerate()
        .flat_map(|(i, &x)| [(x, i as f64 / m), (x, (i + 1) as f64 / m)]);
    chart
        .draw_series(LineSeries::new(steps, &BLUE))
        .map_err(plot_err)?
        .label("empirical")
        .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], BLUE));
    if let Some(n) = spec.kostlan_n {
        let pts = (0..=400)
            .map(|i| {
                let r = lo + (hi - lo) * i as f64 / 400.0;
                Ok((r, kostlan_radius_cdf(n, r.max(0.0))?))
            })
            .collect::<spectral_edge::Result<Vec<_>>>()?;
        chart
            .draw_series(LineSeries::new(pts, &RED))
            .map_err(plot_err)?
            .label(format!("Kostlan, n = {n}"))
            .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], RED));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE)
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)
}

fn loglog(xs: &[f64], ys: &[f64], spec: &PlotSpec) -> Result<()> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    if pts.len() < 2 {
        return Err(HarnessError::usage("loglog plots need at least two positive points"));
    }
    let (lx, ly): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
    let slope = linear_slope(&lx, &ly);
    let intercept = spectral_edge::stats::mean(&ly) - slope * spectral_edge::stats::mean(&lx);
    let y_name = spec.y.as_deref().unwrap_or("y");
    let root = SVGBackend::new(&spec.output, (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let (x0, x1) = bounds(&lx);
    let (y0, y1) = bounds(&ly);
    let mut chart = ChartBuilder::on(&root)
        .margin(20)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .caption(format!("{y_name} vs {}: slope {slope:.4}", spec.x), ("sans-serif", 20))
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc(format!("log10 {}", spec.x))
        .y_desc(format!("log10 {y_name}"))
        .draw()
        .map_err(plot_err)?;
    chart
        .draw_series(pts.iter().map(|&p| Circle::new(p, 4, BLUE.filled())))
        .map_err(plot_err)?;
    chart
        .draw_series(LineSeries::new([x0, x1].map(|x| (x, intercept + slope * x)), &RED))
        .map_err(plot_err)?;
    root.present().map_err(plot_err)
}
