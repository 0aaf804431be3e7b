//! Output artifacts: CSV files, the run summary, and the SVG plot.

use std::fmt::Write as _;
use std::path::Path;

use crate::config::ExperimentPlan;
use crate::runner::{AggregatedRow, ExperimentOutput, RunRecord};
use crate::CliError;

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Raw per-iteration rows. Header: `algorithm,sampling,seed,n,D_contrib,f_value,clamps`.
pub fn emit_raw_csv(records: &[RunRecord], path: &Path) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(["algorithm", "sampling", "seed", "n", "D_contrib", "f_value", "clamps"])
        .map_err(|e| io_err(path, e))?;
    for r in records {
        for row in &r.rows {
            w.write_record([
                r.algorithm.as_str(),
                &r.sampling.to_string(),
                &r.seed.to_string(),
                &row.n.to_string(),
                &format_float(row.d_contrib),
                &format_float(row.f_value),
                &row.clamps.to_string(),
            ])
            .map_err(|e| io_err(path, e))?;
        }
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Aggregated measures. Header: `algorithm,n,D_n,F_n`.
pub fn emit_aggregated_csv(rows: &[AggregatedRow], path: &Path) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(["algorithm", "n", "D_n", "F_n"])
        .map_err(|e| io_err(path, e))?;
    for r in rows {
        w.write_record([
            r.algorithm.as_str(),
            &r.n.to_string(),
            &format_float(r.d_n),
            &format_float(r.f_n),
        ])
        .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Shortest decimal that round-trips, matching Rust's float display.
fn format_float(v: f64) -> String {
    format!("{v}")
}

/// Human-readable run summary; also returned for printing to stdout.
pub fn emit_summary(
    plan: &ExperimentPlan,
    out: &ExperimentOutput,
    path: &Path,
) -> Result<String, CliError> {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "case={} m={} I={} J={} N={} S={} master_seed={}",
        plan.case.name(),
        plan.dim,
        plan.factor_count,
        plan.balls_per_factor,
        plan.iterations,
        plan.samplings,
        plan.master_seed
    );
    let _ = writeln!(
        s,
        "{:<8} {:>12} {:>12} {:>12} {:>14} {:>9}",
        "algo", "D_0", "D_N", "F_N", "clamped_steps", "wall_ms"
    );
    let last = plan.iterations;
    for (a, spec) in plan.algorithms.iter().enumerate() {
        let find = |n: u64| {
            out.aggregated
                .iter()
                .find(|r| r.algorithm == spec.name && r.n == n)
                .expect("aggregated rows cover every iteration")
        };
        let (d0, dn, fn_) = (find(0).d_n, find(last).d_n, find(last).f_n);
        let runs: Vec<&RunRecord> = out
            .records
            .iter()
            .filter(|r| r.algorithm_index == a)
            .collect();
        let clamped: u64 = runs.iter().map(|r| r.clamped_steps).sum();
        let wall: u128 = runs.iter().map(|r| r.wall.as_millis()).sum();
        let _ = writeln!(
            s,
            "{:<8} {:>12.5e} {:>12.5e} {:>12.5e} {:>14} {:>9}",
            spec.name, d0, dn, fn_, clamped, wall
        );
    }
    let mut warned = false;
    for r in &out.records {
        // A clamp storm signals steps fighting the boundary guard.
        if r.clamped_steps * 100 > plan.iterations {
            if !warned {
                let _ = writeln!(s, "warnings:");
                warned = true;
            }
            let _ = writeln!(
                s,
                "  {} sampling {}: {} of {} steps clamped (> 1%)",
                r.algorithm, r.sampling, r.clamped_steps, plan.iterations
            );
        }
    }
    std::fs::write(path, &s).map_err(|e| io_err(path, e))?;
    Ok(s)
}

const PALETTE: [&str; 12] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#393b79", "#ad494a",
];

/// Plot floor: exact-zero residuals still need a finite log position.
const LOG_FLOOR: f64 = 1e-12;

struct Panel {
    x0: f64,
    y0: f64,
    width: f64,
    height: f64,
}

impl Panel {
    fn x(&self, t: f64) -> f64 {
        self.x0 + t * self.width
    }

    fn y(&self, t: f64) -> f64 {
        // SVG y grows downward; t = 1 is the top of the panel.
        self.y0 + (1.0 - t) * self.height
    }
}

/// Standalone SVG 1.1 document: residual measure on a log axis on the
/// left, objective measure on a linear axis on the right, one polyline
/// per algorithm in each panel. No scripts, no external assets.
pub fn emit_svg(
    plan: &ExperimentPlan,
    rows: &[AggregatedRow],
    path: &Path,
) -> Result<(), CliError> {
    let names: Vec<&str> = plan.algorithms.iter().map(|a| a.name.as_str()).collect();
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="1240" height="560" viewBox="0 0 1240 560">"#
    );
    let _ = writeln!(svg, r#"<rect width="1240" height="560" fill="white"/>"#);
    svg += &render_panel(
        &Panel { x0: 70.0, y0: 40.0, width: 480.0, height: 420.0 },
        rows,
        &names,
        Measure::Residual,
    );
    svg += &render_panel(
        &Panel { x0: 690.0, y0: 40.0, width: 480.0, height: 420.0 },
        rows,
        &names,
        Measure::Objective,
    );
    // Shared legend along the bottom edge.
    for (i, name) in names.iter().enumerate() {
        let x = 70.0 + 95.0 * i as f64;
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            svg,
            r#"<line x1="{:.1}" y1="530" x2="{:.1}" y2="530" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="534" font-family="sans-serif" font-size="12">{name}</text>"#,
            x,
            x + 24.0,
            x + 30.0
        );
    }
    let _ = writeln!(svg, "</svg>");
    std::fs::write(path, svg).map_err(|e| io_err(path, e))
}

#[derive(Clone, Copy, PartialEq)]
enum Measure {
    Residual,
    Objective,
}

fn render_panel(panel: &Panel, rows: &[AggregatedRow], names: &[&str], which: Measure) -> String {
    let value = |r: &AggregatedRow| match which {
        Measure::Residual => r.d_n.max(LOG_FLOOR),
        Measure::Objective => r.f_n,
    };
    let log_y = which == Measure::Residual;
    let n_max = rows.iter().map(|r| r.n).max().unwrap_or(1).max(1) as f64;
    let mut v_min = f64::INFINITY;
    let mut v_max = f64::NEG_INFINITY;
    for r in rows {
        let v = value(r);
        v_min = v_min.min(v);
        v_max = v_max.max(v);
    }
    if !(v_min.is_finite() && v_max.is_finite()) {
        v_min = 0.0;
        v_max = 1.0;
    }
    if v_min == v_max {
        // Flat series: open up a visible band around the value.
        v_min -= 0.5;
        v_max += 0.5;
    }
    let t_of = |v: f64| -> f64 {
        if log_y {
            (v.log10() - v_min.log10()) / (v_max.log10() - v_min.log10())
        } else {
            (v - v_min) / (v_max - v_min)
        }
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#333"/>"##,
        panel.x0, panel.y0, panel.width, panel.height
    );
    let title = match which {
        Measure::Residual => "residual measure D_n (log scale)",
        Measure::Objective => "objective measure F_n",
    };
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="14">{title}</text>"#,
        panel.x0,
        panel.y0 - 12.0
    );

    // Y ticks: decades on the log panel, five even steps otherwise.
    if log_y {
        let lo = v_min.log10().floor() as i32;
        let hi = v_max.log10().ceil() as i32;
        for e in lo..=hi {
            let v = 10f64.powi(e);
            let t = t_of(v.clamp(v_min, v_max));
            let y = panel.y(t);
            let _ = writeln!(
                s,
                r##"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ccc"/><text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="end">1e{e}</text>"##,
                panel.x0,
                panel.x0 + panel.width,
                panel.x0 - 6.0,
                y + 4.0
            );
        }
    } else {
        for k in 0..=4 {
            let t = k as f64 / 4.0;
            let v = v_min + t * (v_max - v_min);
            let y = panel.y(t);
            let _ = writeln!(
                s,
                r##"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ccc"/><text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="end">{v:.3}</text>"##,
                panel.x0,
                panel.x0 + panel.width,
                panel.x0 - 6.0,
                y + 4.0
            );
        }
    }
    // X ticks: quarters of the iteration range.
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let x = panel.x(t);
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            panel.y0 + panel.height + 16.0,
            (t * n_max).round() as u64
        );
    }

    for (i, name) in names.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut points = String::new();
        for r in rows.iter().filter(|r| r.algorithm == *name) {
            let x = panel.x(r.n as f64 / n_max);
            let y = panel.y(t_of(value(r)));
            let _ = write!(points, "{x:.2},{y:.2} ");
        }
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.trim_end()
        );
    }
    s
}
