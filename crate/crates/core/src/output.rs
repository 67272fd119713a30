//! CSV, JSON and SVG emitters.

use std::io::{self, Write};

use serde::Serialize;

use crate::analysis::{nearest, BasinMap, Boundary, FixedPointKind, FixedPointRecord};
use crate::dynamics::{Model, SystemState};
use crate::error::Error;
use crate::integrator::Trajectory;
use crate::scenario::Axis;

pub const TRAJECTORY_HEADER: &str = "t,x,n,y,u1,u2,u_avg,p12,p21";
pub const SWEEP_HEADER: &str = "initial,x,n,y,label,converged,error";

/// 17 significant digits, locale independent.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_trajectory_csv<W: Write>(
    mut w: W,
    traj: &Trajectory,
    truncated: Option<&Error>,
) -> io::Result<()> {
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for ((t, s), d) in traj.times.iter().zip(&traj.states).zip(&traj.derived) {
        let row = [*t, s.x, s.n, s.y, d.u1, d.u2, d.u_avg, d.p12, d.p21];
        let cells: Vec<String> = row.iter().map(|v| num(*v)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    if let Some(e) = truncated {
        writeln!(w, "# TRUNCATED: {}", e.to_string().replace('\n', " "))?;
    }
    w.flush()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NearestFixedPoint {
    pub state: SystemState,
    pub label: String,
    pub kind: FixedPointKind,
    pub family: bool,
    pub distance: f64,
}

impl NearestFixedPoint {
    pub fn find(records: &[FixedPointRecord], s: &SystemState) -> Option<Self> {
        nearest(records, s).map(|(r, d)| NearestFixedPoint {
            state: r.state,
            label: r.label(),
            kind: r.kind,
            family: r.family,
            distance: d,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub label: String,
    pub terminal: SystemState,
    pub converged: bool,
    pub t_converged: Option<f64>,
    pub t_final: f64,
    pub samples: usize,
    pub nearest_fixed_point: Option<NearestFixedPoint>,
    pub residual: f64,
    pub error: Option<String>,
}

impl SimulationSummary {
    pub fn new(
        label: &str,
        model: &Model,
        traj: &Trajectory,
        records: &[FixedPointRecord],
        failure: Option<&Error>,
    ) -> Self {
        SimulationSummary {
            label: label.to_string(),
            terminal: traj.terminal,
            converged: traj.converged,
            t_converged: traj.t_converged,
            t_final: traj.final_time(),
            samples: traj.len(),
            nearest_fixed_point: NearestFixedPoint::find(records, &traj.terminal),
            residual: model.residual(&traj.terminal),
            error: failure.map(ToString::to_string),
        }
    }
}

pub fn write_sweep_csv<W: Write>(mut w: W, map: &BasinMap) -> io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for c in &map.cells {
        let (x, n, y) = match c.terminal {
            Some(s) => (num(s.x), num(s.n), num(s.y)),
            None => (String::new(), String::new(), String::new()),
        };
        let label = c.label.clone().unwrap_or_else(|| "unresolved".into());
        let error = c.error.clone().unwrap_or_default();
        writeln!(
            w,
            "{},{x},{n},{y},{},{},{}",
            num(c.initial),
            csv_field(&label),
            c.converged,
            csv_field(&error)
        )?;
    }
    w.flush()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\"").replace('\n', " "))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub label: String,
    pub axis: Axis,
    pub grid: Vec<f64>,
    pub labels: Vec<Option<String>>,
    pub switches: usize,
    pub unresolved: usize,
    pub failed: usize,
    pub boundary: Option<Boundary>,
}

impl SweepSummary {
    pub fn new(label: &str, map: &BasinMap, boundary: Option<Boundary>) -> Self {
        SweepSummary {
            label: label.to_string(),
            axis: map.axis,
            grid: map.grid.clone(),
            labels: map.cells.iter().map(|c| c.label.clone()).collect(),
            switches: map.switches().len(),
            unresolved: map.unresolved(),
            failed: map.cells.iter().filter(|c| c.error.is_some()).count(),
            boundary,
        }
    }
}

pub fn write_json<W: Write, T: Serialize>(mut w: W, value: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()
}

type Series = (&'static str, &'static str, fn(&SystemState) -> f64);

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 60.0;

/// Standalone line chart of `x(t)`, `n(t)`, `y(t)`.
pub fn write_svg<W: Write>(mut w: W, traj: &Trajectory, title: &str) -> io::Result<()> {
    let t_end = traj.final_time().max(f64::MIN_POSITIVE);
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let px = |t: f64| MARGIN + plot_w * t / t_end;
    let py = |v: f64| HEIGHT - MARGIN - plot_h * v;

    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="800" height="600" viewBox="0 0 800 600">"#
    )?;
    writeln!(w, r#"<rect width="800" height="600" fill="white"/>"#)?;
    writeln!(
        w,
        r#"<text x="400" y="30" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        escape(title)
    )?;
    writeln!(
        w,
        r#"<path d="M{l} {t} V{b} H{r}" fill="none" stroke="black"/>"#,
        l = MARGIN,
        t = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    )?;
    for k in 0..=4 {
        let v = k as f64 / 4.0;
        writeln!(
            w,
            r#"<text x="{}" y="{:.1}" text-anchor="end" font-family="sans-serif" font-size="12">{v}</text>"#,
            MARGIN - 8.0,
            py(v) + 4.0
        )?;
        let t = t_end * v;
        writeln!(
            w,
            r#"<text x="{:.1}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">{}</text>"#,
            px(t),
            HEIGHT - MARGIN + 20.0,
            format_tick(t)
        )?;
    }
    writeln!(
        w,
        r#"<text x="400" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">t</text>"#,
        HEIGHT - 15.0
    )?;

    let series: [Series; 3] = [
        ("x", "#d62728", |s| s.x),
        ("n", "#2ca02c", |s| s.n),
        ("y", "#1f77b4", |s| s.y),
    ];
    for (i, (name, color, get)) in series.iter().enumerate() {
        let points: Vec<String> = traj
            .times
            .iter()
            .zip(&traj.states)
            .map(|(t, s)| format!("{:.2},{:.2}", px(*t), py(get(s))))
            .collect();
        writeln!(
            w,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        )?;
        let ly = MARGIN + 15.0 + 20.0 * i as f64;
        let lx = WIDTH - MARGIN - 90.0;
        writeln!(
            w,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 25.0
        )?;
        writeln!(
            w,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13">{name}(t)</text>"#,
            lx + 32.0,
            ly + 4.0
        )?;
    }
    writeln!(w, "</svg>")?;
    w.flush()
}

fn format_tick(t: f64) -> String {
    if t >= 100.0 {
        format!("{t:.0}")
    } else {
        format!("{t:.1}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
