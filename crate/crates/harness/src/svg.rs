//! Hand-rolled SVG renderers for study artifacts. Output depends only on
//! the input data, so identical summaries produce byte-identical files.

use std::fmt::Write as _;

use thiserror::Error;

use skitter_core::imu::TrackMode;

use crate::explore_study::ExploreSummary;
use crate::imu_bench::{DeadReckonSummary, ReplayReport};
use crate::thermal_study::ThermalSummary;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("nothing to plot: {0}")]
    Empty(String),
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 560.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 30.0;
const MARGIN_T: f64 = 42.0;
const MARGIN_B: f64 = 56.0;
/// Estimated-arrival circles in trajectory plots, meters.
pub const ARRIVAL_RADIUS_M: f64 = 0.2;

const PALETTE: [&str; 6] = [
    "#1b6ca8", "#d1495b", "#66a182", "#edae49", "#8d5a97", "#5c5c5c",
];

fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

/// Fixed-precision number formatting so output never depends on float
/// shortest-repr quirks.
fn fmt(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_B - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<[f64; 2]>,
    pub dashed: bool,
}

impl Series {
    pub fn solid(label: impl Into<String>, points: Vec<[f64; 2]>) -> Self {
        Series {
            label: label.into(),
            points,
            dashed: false,
        }
    }

    pub fn dashed(label: impl Into<String>, points: Vec<[f64; 2]>) -> Self {
        Series {
            label: label.into(),
            points,
            dashed: true,
        }
    }
}

fn svg_open(out: &mut String) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\">"
    );
    let _ = writeln!(
        out,
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>"
    );
}

fn title_and_axes(out: &mut String, title: &str, x_label: &str, y_label: &str) {
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{title}</text>",
        fmt(WIDTH / 2.0)
    );
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\">{x_label}</text>",
        fmt((MARGIN_L + WIDTH - MARGIN_R) / 2.0),
        fmt(HEIGHT - 14.0)
    );
    let ymid = (MARGIN_T + HEIGHT - MARGIN_B) / 2.0;
    let _ = writeln!(
        out,
        "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\" \
         transform=\"rotate(-90 18 {})\">{y_label}</text>",
        fmt(ymid),
        fmt(ymid)
    );
}

/// A line chart over the given series. `y_clip` clamps both the axis range
/// and the data, e.g. `[0, 100]` for percentages.
pub fn line_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
    y_clip: Option<[f64; 2]>,
) -> Result<String, PlotError> {
    let points: Vec<[f64; 2]> = series.iter().flat_map(|s| s.points.iter().copied()).collect();
    if points.is_empty() {
        return Err(PlotError::Empty("no data points".into()));
    }
    let clamp_y = |y: f64| match y_clip {
        Some([lo, hi]) => y.clamp(lo, hi),
        None => y,
    };
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in &points {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(clamp_y(p[1]));
        y1 = y1.max(clamp_y(p[1]));
    }
    if x1 - x0 < 1e-12 {
        x0 -= 1.0;
        x1 += 1.0;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 1.0;
        y1 += 1.0;
    }
    let pad = 0.04 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    if let Some([lo, hi]) = y_clip {
        y0 = y0.max(lo);
        y1 = y1.min(hi);
    }
    let f = Frame { x0, x1, y0, y1 };

    let mut out = String::new();
    svg_open(&mut out);
    title_and_axes(&mut out, title, x_label, y_label);
    for i in 0..=4 {
        let x = x0 + i as f64 * (x1 - x0) / 4.0;
        let y = y0 + i as f64 * (y1 - y0) / 4.0;
        let _ = writeln!(
            out,
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#e0e0e0\"/>",
            fmt(f.px(x)),
            fmt(f.py(y0)),
            fmt(f.py(y1))
        );
        let _ = writeln!(
            out,
            "<line x1=\"{0}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\" stroke=\"#e0e0e0\"/>",
            fmt(f.px(x0)),
            fmt(f.px(x1)),
            fmt(f.py(y))
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"11\">{}</text>",
            fmt(f.px(x)),
            fmt(HEIGHT - MARGIN_B + 16.0),
            fmt(x)
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"11\">{}</text>",
            fmt(MARGIN_L - 6.0),
            fmt(f.py(y) + 4.0),
            fmt(y)
        );
    }
    let _ = writeln!(
        out,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333333\"/>",
        fmt(MARGIN_L),
        fmt(MARGIN_T),
        fmt(WIDTH - MARGIN_L - MARGIN_R),
        fmt(HEIGHT - MARGIN_T - MARGIN_B)
    );
    for (i, s) in series.iter().enumerate() {
        if s.points.is_empty() {
            continue;
        }
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|p| format!("{},{}", fmt(f.px(p[0])), fmt(f.py(clamp_y(p[1])))))
            .collect();
        let dash = if s.dashed {
            " stroke-dasharray=\"6 4\""
        } else {
            ""
        };
        let _ = writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"{} points=\"{}\"/>",
            color(i),
            dash,
            pts.join(" ")
        );
    }
    if series.len() <= 8 {
        for (i, s) in series.iter().enumerate() {
            let y = MARGIN_T + 16.0 + 16.0 * i as f64;
            let x = WIDTH - MARGIN_R - 150.0;
            let _ = writeln!(
                out,
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"/>",
                fmt(x),
                fmt(y - 4.0),
                fmt(x + 22.0),
                fmt(y - 4.0),
                color(i)
            );
            let _ = writeln!(
                out,
                "<text x=\"{}\" y=\"{}\" font-size=\"12\">{}</text>",
                fmt(x + 28.0),
                fmt(y),
                s.label
            );
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Arena-frame trajectory figure: one polyline per trial, dashed overlays
/// for dead-reckoned tracks, circles for arrivals and sources.
#[derive(Debug, Clone, Default)]
pub struct TrajectoryScene {
    pub title: String,
    pub width_m: f64,
    pub height_m: f64,
    pub paths: Vec<Vec<[f64; 2]>>,
    pub dashed_paths: Vec<Vec<[f64; 2]>>,
    pub arrivals: Vec<[f64; 2]>,
    /// Filled circles for sources/targets: x, y, radius.
    pub markers: Vec<[f64; 3]>,
}

pub fn trajectory_plot(scene: &TrajectoryScene) -> Result<String, PlotError> {
    if scene.paths.iter().all(|p| p.is_empty()) {
        return Err(PlotError::Empty("no trajectories".into()));
    }
    if !(scene.width_m > 0.0 && scene.height_m > 0.0) {
        return Err(PlotError::Empty("degenerate arena".into()));
    }
    let scale = ((WIDTH - MARGIN_L - MARGIN_R) / scene.width_m)
        .min((HEIGHT - MARGIN_T - MARGIN_B) / scene.height_m);
    let ox = (WIDTH - scene.width_m * scale) / 2.0;
    let oy = MARGIN_T + (HEIGHT - MARGIN_T - MARGIN_B - scene.height_m * scale) / 2.0;
    let px = |x: f64| ox + x * scale;
    let py = |y: f64| oy + (scene.height_m - y) * scale;

    let mut out = String::new();
    svg_open(&mut out);
    title_and_axes(&mut out, &scene.title, "x (m)", "y (m)");
    let _ = writeln!(
        out,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#fafafa\" stroke=\"#333333\"/>",
        fmt(px(0.0)),
        fmt(py(scene.height_m)),
        fmt(scene.width_m * scale),
        fmt(scene.height_m * scale)
    );
    for m in &scene.markers {
        let _ = writeln!(
            out,
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"#edae49\" fill-opacity=\"0.6\" \
             stroke=\"#b4690e\"/>",
            fmt(px(m[0])),
            fmt(py(m[1])),
            fmt(m[2] * scale)
        );
    }
    for (i, path) in scene.paths.iter().enumerate() {
        if path.is_empty() {
            continue;
        }
        let pts: Vec<String> = path
            .iter()
            .map(|p| format!("{},{}", fmt(px(p[0])), fmt(py(p[1]))))
            .collect();
        let _ = writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1\" stroke-opacity=\"0.8\" \
             points=\"{}\"/>",
            color(i),
            pts.join(" ")
        );
    }
    for path in &scene.dashed_paths {
        if path.is_empty() {
            continue;
        }
        let pts: Vec<String> = path
            .iter()
            .map(|p| format!("{},{}", fmt(px(p[0])), fmt(py(p[1]))))
            .collect();
        let _ = writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"#5c5c5c\" stroke-width=\"1\" \
             stroke-dasharray=\"5 3\" points=\"{}\"/>",
            pts.join(" ")
        );
    }
    for a in &scene.arrivals {
        let _ = writeln!(
            out,
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"none\" stroke=\"#d1495b\" \
             stroke-width=\"1.2\"/>",
            fmt(px(a[0])),
            fmt(py(a[1])),
            fmt(ARRIVAL_RADIUS_M * scale)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Mean coverage per strategy over time, percent against hours.
pub fn coverage_plot(summary: &ExploreSummary) -> Result<String, PlotError> {
    if summary.trials.is_empty() {
        return Err(PlotError::Empty("no trials in summary".into()));
    }
    let series: Vec<Series> = summary
        .strategies
        .iter()
        .filter(|s| !s.mean_coverage.is_empty())
        .map(|s| {
            Series::solid(
                s.label.clone(),
                s.mean_coverage
                    .iter()
                    .map(|c| [c.t_s / 3600.0, c.coverage_pct])
                    .collect(),
            )
        })
        .collect();
    line_chart(
        "Arena coverage by strategy",
        "time (h)",
        "coverage (%)",
        &series,
        Some([0.0, 100.0]),
    )
}

pub fn explore_trajectories(summary: &ExploreSummary) -> Result<String, PlotError> {
    if summary.trials.is_empty() {
        return Err(PlotError::Empty("no trials in summary".into()));
    }
    trajectory_plot(&TrajectoryScene {
        title: "Exploration trajectories".to_string(),
        width_m: summary.spec.arena_width_m,
        height_m: summary.spec.arena_height_m,
        paths: summary.trials.iter().map(|t| t.path.clone()).collect(),
        dashed_paths: Vec::new(),
        arrivals: Vec::new(),
        markers: vec![[
            summary.spec.target_x_m,
            summary.spec.target_y_m,
            summary.spec.target_radius_m,
        ]],
    })
}

pub fn thermal_trajectories(summary: &ThermalSummary) -> Result<String, PlotError> {
    if summary.trials.is_empty() {
        return Err(PlotError::Empty("no trials in summary".into()));
    }
    trajectory_plot(&TrajectoryScene {
        title: "Thermal navigation trajectories".to_string(),
        width_m: summary.spec.arena_width_m,
        height_m: summary.spec.arena_height_m,
        paths: summary.trials.iter().map(|t| t.trajectory.clone()).collect(),
        dashed_paths: Vec::new(),
        arrivals: summary
            .trials
            .iter()
            .flat_map(|t| t.arrivals_xy.iter().copied())
            .collect(),
        markers: vec![[
            summary.spec.source_x_m,
            summary.spec.source_y_m,
            summary.spec.source_radius_m,
        ]],
    })
}

/// Per-trial position error against traveled distance, with a dashed guide
/// at the benchmark's error scale (5% of traveled for planar, 10% for
/// spatial).
pub fn bench_error_plot(summary: &DeadReckonSummary, mode: TrackMode) -> Result<String, PlotError> {
    let trials: Vec<_> = summary.trials.iter().filter(|t| t.mode == mode).collect();
    if trials.is_empty() {
        return Err(PlotError::Empty("no trials for mode".into()));
    }
    let (scale_pct, name) = match mode {
        TrackMode::Planar => (5.0, "planar"),
        TrackMode::Spatial => (10.0, "spatial"),
    };
    let max_traveled = trials
        .iter()
        .map(|t| t.traveled_m)
        .fold(0.0, f64::max);
    let mut series: Vec<Series> = trials
        .iter()
        .map(|t| {
            Series::solid(
                format!("seed {}", t.seed),
                t.errors.iter().map(|e| [e.traveled_m, e.error_m]).collect(),
            )
        })
        .collect();
    series.push(Series::dashed(
        format!("{}% of traveled", fmt(scale_pct)),
        vec![[0.0, 0.0], [max_traveled, scale_pct / 100.0 * max_traveled]],
    ));
    line_chart(
        &format!("Dead-reckoning error ({name})"),
        "traveled (m)",
        "error (m)",
        &series,
        None,
    )
}

pub fn replay_error_plot(report: &ReplayReport) -> Result<String, PlotError> {
    if report.errors.is_empty() {
        return Err(PlotError::Empty("no error checkpoints".into()));
    }
    let max_traveled = report
        .errors
        .iter()
        .map(|e| e.traveled_m)
        .fold(0.0, f64::max);
    let series = vec![
        Series::solid(
            "position error",
            report
                .errors
                .iter()
                .map(|e| [e.traveled_m, e.error_m])
                .collect(),
        ),
        Series::dashed(
            "5% of traveled",
            vec![[0.0, 0.0], [max_traveled, 0.05 * max_traveled]],
        ),
        Series::dashed(
            "10% of traveled",
            vec![[0.0, 0.0], [max_traveled, 0.10 * max_traveled]],
        ),
    ];
    line_chart(
        "Replay error propagation",
        "traveled (m)",
        "error (m)",
        &series,
        None,
    )
}
