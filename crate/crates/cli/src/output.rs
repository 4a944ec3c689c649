//! CSV records, plot series and the SVG chart.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use iqc_core::analysis::AnalysisResult;
use iqc_core::lmi::AnalysisMode;
use iqc_core::solver::SolveStatus;
use plotters::prelude::*;
use serde::Serialize;

use crate::config::GridPoint;
use crate::CliError;

pub const RESULTS_HEADER: [&str; 8] = ["L", "nu", "nutilde", "mode", "gamma", "status", "iters", "solve_ms"];

/// One row of the results table. `gamma` is `inf` for infeasible points and
/// empty when the solver stopped without a definitive answer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    #[serde(rename = "L")]
    pub l: String,
    pub nu: usize,
    pub nutilde: usize,
    pub mode: String,
    pub gamma: String,
    pub status: String,
    pub iters: usize,
    pub solve_ms: String,
}

impl ResultRow {
    pub fn new(p: &GridPoint, r: &AnalysisResult) -> Self {
        let gamma = match (r.status, r.gamma) {
            (SolveStatus::Optimal, Some(g)) => g.to_string(),
            (SolveStatus::Infeasible, _) => "inf".into(),
            _ => String::new(),
        };
        Self {
            l: p.l.map(|l| l.to_string()).unwrap_or_default(),
            nu: p.nu,
            nutilde: p.nutilde,
            mode: p.mode.to_string(),
            gamma,
            status: r.status.to_string(),
            iters: r.feasibility_iterations + r.iterations,
            solve_ms: format!("{:.3}", r.solve_time.as_secs_f64() * 1e3),
        }
    }

    /// Row for a point whose analysis raised an error.
    pub fn failed(p: &GridPoint, what: &str) -> Self {
        Self {
            l: p.l.map(|l| l.to_string()).unwrap_or_default(),
            nu: p.nu,
            nutilde: p.nutilde,
            mode: p.mode.to_string(),
            gamma: String::new(),
            status: format!("error: {what}"),
            iters: 0,
            solve_ms: String::new(),
        }
    }
}

pub fn write_results<W: Write>(out: W, rows: &[ResultRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(RESULTS_HEADER)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// `(nu, nutilde, mode)`.
pub type SeriesKey = (usize, usize, String);

/// Curves of `gamma` over `L`, one per `(nu, nutilde, mode)`; infeasible
/// and unresolved points are `None`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlotSeries {
    pub series: BTreeMap<SeriesKey, Vec<(f64, Option<f64>)>>,
}

fn series_label(nu: usize, nutilde: usize, mode: &str) -> String {
    if nu == nutilde {
        format!("nu={nu} {mode}")
    } else {
        format!("nu={nu},nutilde={nutilde} {mode}")
    }
}

impl PlotSeries {
    pub fn collect(points: &[GridPoint], results: &[Option<&AnalysisResult>]) -> Self {
        let mut series: BTreeMap<_, Vec<_>> = BTreeMap::new();
        for (p, r) in points.iter().zip(results) {
            let Some(l) = p.l else { continue };
            let g = r.and_then(|r| if r.status == SolveStatus::Optimal { r.gamma } else { None });
            series.entry((p.nu, p.nutilde, p.mode.to_string())).or_default().push((l, g));
        }
        Self { series }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["series", "nu", "nutilde", "mode", "L", "gamma"])?;
        for ((nu, nt, mode), pts) in &self.series {
            for (l, g) in pts {
                w.write_record([
                    series_label(*nu, *nt, mode),
                    nu.to_string(),
                    nt.to_string(),
                    mode.clone(),
                    l.to_string(),
                    g.map(|g| g.to_string()).unwrap_or_default(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Line chart with solid terminal-cost curves and dashed hard curves;
    /// gaps where the analysis is infeasible.
    pub fn write_svg(&self, path: &Path) -> Result<(), CliError> {
        let err = |e: &dyn std::fmt::Display| CliError::Output(format!("{}: {e}", path.display()));
        let finite = self.series.values().flatten().filter_map(|(l, g)| g.map(|g| (*l, g)));
        let (mut x_hi, mut y_lo, mut y_hi) = (0.0f64, f64::INFINITY, f64::NEG_INFINITY);
        for (l, g) in finite {
            x_hi = x_hi.max(l);
            y_lo = y_lo.min(g);
            y_hi = y_hi.max(g);
        }
        if !y_lo.is_finite() {
            (y_lo, y_hi, x_hi) = (0.0, 1.0, 1.0);
        }
        let pad = 0.05 * (y_hi - y_lo).max(1e-3);
        let root = SVGBackend::new(path, (800, 500)).into_drawing_area();
        root.fill(&WHITE).map_err(|e| err(&e))?;
        let mut chart = ChartBuilder::on(&root)
            .margin(20)
            .x_label_area_size(40)
            .y_label_area_size(60)
            .build_cartesian_2d(0.0..x_hi * 1.02, (y_lo - pad)..(y_hi + pad))
            .map_err(|e| err(&e))?;
        chart
            .configure_mesh()
            .x_desc("L")
            .y_desc("gamma*")
            .draw()
            .map_err(|e| err(&e))?;
        let palette = [BLUE, RED, RGBColor(230, 170, 0), RGBColor(128, 0, 160), GREEN, BLACK];
        let mut colors: BTreeMap<(usize, usize), RGBColor> = BTreeMap::new();
        for ((nu, nt, mode), pts) in &self.series {
            let next = palette[colors.len() % palette.len()];
            let color = *colors.entry((*nu, *nt)).or_insert(next);
            let style = ShapeStyle::from(&color).stroke_width(2);
            let label = series_label(*nu, *nt, mode);
            let dashed = mode == AnalysisMode::Hard.as_str();
            for (k, segment) in pts.split(|(_, g)| g.is_none()).filter(|s| !s.is_empty()).enumerate() {
                let line: Vec<(f64, f64)> = segment.iter().map(|(l, g)| (*l, g.unwrap_or_default())).collect();
                let anno = if dashed {
                    chart.draw_series(DashedLineSeries::new(line, 6, 4, style))
                } else {
                    chart.draw_series(LineSeries::new(line, style))
                }
                .map_err(|e| err(&e))?;
                if k == 0 {
                    anno.label(label.clone()).legend(move |(x, y)| {
                        let end = if dashed { x + 8 } else { x + 18 };
                        PathElement::new(vec![(x, y), (end, y)], style)
                    });
                }
            }
        }
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .position(SeriesLabelPosition::UpperLeft)
            .draw()
            .map_err(|e| err(&e))?;
        root.present().map_err(|e| err(&e))?;
        Ok(())
    }
}
