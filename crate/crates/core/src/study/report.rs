use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::convergence::{format_slope, ConvergenceReport, RunResult, Slices, Snapshot};
use crate::error::{Error, Result};
use crate::plot::{LinePlot, Series};

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub(crate) fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// File-name tag for one `ε`, e.g. `eps_0.1`.
pub fn eps_tag(eps: f64) -> String {
    format!("eps_{eps}")
}

pub fn convergence_csv(report: &ConvergenceReport) -> String {
    let mut out = String::from("eps,max_error\n");
    for (eps, err) in report.eps_list.iter().zip(&report.max_error) {
        match err {
            Some(e) => {
                let _ = writeln!(out, "{eps},{e:.10e}");
            }
            None => {
                let _ = writeln!(out, "{eps},nan");
            }
        }
    }
    out
}

pub fn convergence_svg(report: &ConvergenceReport) -> String {
    let mut plot = LinePlot::new("Convergence of the sup-norm error", "eps", "max error").log_log();
    let points: Vec<(f64, f64)> = report
        .eps_list
        .iter()
        .zip(&report.max_error)
        .filter_map(|(e, m)| m.map(|m| (*e, m)))
        .collect();
    if let Some(fit) = report.fit {
        let (lo, hi) = points.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
        let line = [lo, hi].iter().map(|e| (*e, (fit.intercept + fit.slope * e.ln()).exp())).collect();
        plot.add(Series::line("least-squares fit", line));
        plot.add_note(format_slope(fit.slope));
        let reference = [lo, hi]
            .iter()
            .map(|e| (*e, points[0].1 * (e / points[0].0).powi(2)))
            .collect();
        plot.add(Series::line("eps^2", reference).dashed());
    }
    plot.add(Series::markers("max error", points));
    plot.render()
}

pub fn run_metadata(report: &ConvergenceReport) -> String {
    let p = &report.params;
    let mut out = String::new();
    let _ = writeln!(out, "omega0 = {:.10}", p.omega0);
    let _ = writeln!(out, "v_g = {:?}", p.v_g);
    let _ = writeln!(out, "hessian = {:?}", p.hessian);
    let _ = writeln!(out, "nu = {:.10}", p.nu);
    match report.fit {
        Some(f) => {
            let _ = writeln!(out, "{}", format_slope(f.slope));
            let _ = writeln!(out, "intercept = {:.6}", f.intercept);
            let _ = writeln!(out, "fit_residual = {:.6e}", f.residual);
        }
        None => out.push_str("fitted slope unavailable\n"),
    }
    out.push('\n');
    for run in &report.runs {
        let cells: Vec<String> = run.geometry.cells.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(
            out,
            "eps = {}: cells {} ({} points), dt = {}, t_end = {:.6}, wall = {:.1} s, max_error = {}, final_error = {}{}",
            run.eps,
            cells.join("x"),
            run.grid_points,
            run.dt,
            run.t_end,
            run.wall_seconds,
            fmt_opt(run.max_error()),
            fmt_opt(run.series.final_error().filter(|_| run.failure.is_none())),
            run.failure.as_ref().map(|f| format!(", FAILED: {f}")).unwrap_or_default()
        );
    }
    out
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |v| format!("{v:.6e}"))
}

/// Writes `convergence.csv`, `convergence.svg`, `run_metadata.txt` and one
/// error series per run into `dir`. Returns the written paths.
pub fn emit_report(report: &ConvergenceReport, dir: &Path) -> Result<Vec<PathBuf>> {
    if report.eps_list.is_empty() {
        return Err(Error::Config("cannot write a report without eps values".into()));
    }
    create_dir(dir)?;
    let mut written = Vec::new();
    let mut put = |name: String, contents: String| -> Result<()> {
        let path = dir.join(name);
        write_file(&path, &contents)?;
        written.push(path);
        Ok(())
    };
    put("convergence.csv".into(), convergence_csv(report))?;
    put("convergence.svg".into(), convergence_svg(report))?;
    put("run_metadata.txt".into(), run_metadata(report))?;
    for run in &report.runs {
        put(format!("errors_{}.csv", eps_tag(run.eps)), run.series.to_csv())?;
    }
    Ok(written)
}

pub fn snapshot_csv(s: &Snapshot) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# t = {}", s.time);
    let _ = writeln!(out, "# dx = {}", s.dx);
    let _ = writeln!(out, "# box_offset = {:?}", s.offset);
    let _ = writeln!(out, "# box_lengths = {:?}", s.box_lengths);
    let _ = writeln!(out, "# shape = {:?}", s.shape);
    let d = s.shape.len();
    let names: Vec<String> = (1..=d).map(|j| format!("x{j}")).collect();
    let _ = writeln!(out, "{},abs_u", names.join(","));
    for (flat, v) in s.values.iter().enumerate() {
        let mut rem = flat;
        let mut idx = vec![0; d];
        for j in (0..d).rev() {
            idx[j] = rem % s.shape[j];
            rem /= s.shape[j];
        }
        for j in 0..d {
            let _ = write!(out, "{:.6},", s.offset[j] + idx[j] as f64 * s.dx);
        }
        let _ = writeln!(out, "{v:.10e}");
    }
    out
}

/// Axis slices at a handful of times, one panel per axis.
pub fn slices_svg(slices: &Slices, eps: f64) -> Vec<(String, String)> {
    let mut out = Vec::new();
    let mut panel = |name: &str, title: String, axis: &str, xs: &[f64], rows: &[Vec<f64>]| {
        if rows.is_empty() {
            return;
        }
        let mut plot = LinePlot::new(&title, axis, "|u|");
        for (t, row) in slices.times.iter().zip(rows) {
            plot.add(Series::line(format!("t = {t:.2}"), xs.iter().copied().zip(row.iter().copied()).collect()));
        }
        out.push((name.to_string(), plot.render()));
    };
    panel("slice_x1.svg", format!("|u| along x1, eps = {eps}"), "x1", &slices.x1, &slices.along_x1);
    panel("slice_x2.svg", format!("|u| along x2 through the moving center, eps = {eps}"), "x2", &slices.x2, &slices.along_x2);
    out
}

/// Writes a single simulation: error series, slice plots and snapshots.
pub fn emit_run(run: &RunResult, dir: &Path) -> Result<Vec<PathBuf>> {
    create_dir(dir)?;
    let mut written = Vec::new();
    let mut put = |name: String, contents: String| -> Result<()> {
        let path = dir.join(name);
        write_file(&path, &contents)?;
        written.push(path);
        Ok(())
    };
    put("errors.csv".into(), run.series.to_csv())?;
    for (name, svg) in slices_svg(&run.slices, run.eps) {
        put(name, svg)?;
    }
    for (i, s) in run.snapshots.iter().enumerate() {
        put(format!("snapshot_{i:03}.csv"), snapshot_csv(s))?;
    }
    let cells: Vec<String> = run.geometry.cells.iter().map(|c| c.to_string()).collect();
    let mut meta = format!(
        "eps = {}\ncells = {}\ngrid_points = {}\ndt = {}\nt_end = {}\nwall_seconds = {:.2}\nmax_error = {}\n",
        run.eps,
        cells.join("x"),
        run.grid_points,
        run.dt,
        run.t_end,
        run.wall_seconds,
        fmt_opt(run.max_error())
    );
    if let Some(f) = &run.failure {
        let _ = writeln!(meta, "failure = {f}");
    }
    put("run_metadata.txt".into(), meta)?;
    Ok(written)
}
