//! CSV and SVG artifacts.

use std::collections::BTreeMap;
use std::path::Path;

use plotters::prelude::*;

use crate::error::{BenchError, Result};
use crate::sweep::WorkPrecisionPoint;

pub const CSV_HEADER: &str = "problem,algorithm,threaded,reltol,abstol,error,runtime_s,nf,njac,nlu,nsolve,naccept,nreject";

pub fn write_csv(points: &[WorkPrecisionPoint], path: &Path) -> Result<()> {
    if points.is_empty() {
        return Err(BenchError::NoPoints);
    }
    let mut w = csv::Writer::from_path(path)?;
    for p in points {
        w.serialize(p)?;
    }
    w.flush().map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<WorkPrecisionPoint>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<&str> = r.headers()?.iter().collect();
    if header.join(",") != CSV_HEADER {
        return Err(BenchError::Config(format!("unexpected CSV header in {}", path.display())));
    }
    r.deserialize().map(|row| row.map_err(BenchError::from)).collect()
}

const PALETTE: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(255, 127, 14),
    RGBColor(44, 160, 44),
    RGBColor(214, 39, 40),
    RGBColor(148, 103, 189),
    RGBColor(140, 86, 75),
];

fn plot_err<E: std::fmt::Display>(e: E) -> BenchError {
    BenchError::Plot(e.to_string())
}

/// Log-log work-precision plot: error on x, runtime on y, one line per
/// (algorithm, threading) series. Failed points are left out.
pub fn write_svg(points: &[WorkPrecisionPoint], path: &Path) -> Result<()> {
    let ok: Vec<&WorkPrecisionPoint> = points.iter().filter(|p| !p.failed() && p.error > 0.0).collect();
    if ok.is_empty() {
        return Err(BenchError::NoPoints);
    }
    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for p in &ok {
        let label = if p.threaded {
            format!("{} (threaded)", p.algorithm)
        } else {
            p.algorithm.clone()
        };
        series.entry(label).or_default().push((p.error, p.runtime_s));
    }
    for pts in series.values_mut() {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    let bounds = |f: fn(&&WorkPrecisionPoint) -> f64| {
        let lo = ok.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = ok.iter().map(f).fold(0.0, f64::max);
        (lo / 2.0, hi * 2.0)
    };
    let (xlo, xhi) = bounds(|p| p.error);
    let (ylo, yhi) = bounds(|p| p.runtime_s);

    let root = SVGBackend::new(path, (900, 600)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let title = format!("{} work-precision", ok[0].problem);
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(15)
        .x_label_area_size(45)
        .y_label_area_size(70)
        .build_cartesian_2d((xlo..xhi).log_scale(), (ylo..yhi).log_scale())
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("error")
        .y_desc("runtime (s)")
        .x_label_formatter(&|x| format!("{x:.0e}"))
        .y_label_formatter(&|y| format!("{y:.0e}"))
        .draw()
        .map_err(plot_err)?;
    for (i, (label, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        chart
            .draw_series(LineSeries::new(pts.iter().copied(), color.stroke_width(2)))
            .map_err(plot_err)?
            .label(label.as_str())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2)));
        chart
            .draw_series(pts.iter().map(|&p| Circle::new(p, 4, color.filled())))
            .map_err(plot_err)?;
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}
