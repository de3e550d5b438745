//! Single-series SVG line charts of trace columns.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::tracefile::{format_float, read_trace_file};
use crate::trace::Trace;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 45.0;

/// Points of a column as `(k, y)`, with `y` replaced by `log10 y` on a log
/// scale. Absent and non-finite values are dropped, and so are nonpositive
/// values on a log scale.
pub fn series(trace: &Trace, column: &str, log_scale: bool) -> Result<Vec<(f64, f64)>> {
    let col = trace.column(column)?;
    let pts: Vec<(f64, f64)> = trace
        .records
        .iter()
        .zip(col)
        .filter_map(|(r, v)| {
            let v = v?;
            if !v.is_finite() || (log_scale && v <= 0.0) {
                return None;
            }
            Some((r.k as f64, if log_scale { v.log10() } else { v }))
        })
        .collect();
    if pts.is_empty() {
        return Err(Error::Trace(format!("column {column} has no plottable values")));
    }
    Ok(pts)
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

/// Renders the column as an SVG document. The plotted data range is stored
/// in `data-x-range` / `data-y-range` on the series group; with a log scale
/// the y range is in decades.
pub fn render_svg(trace: &Trace, column: &str, log_scale: bool) -> Result<String> {
    let pts = series(trace, column, log_scale)?;
    let (x0, x1) = range(pts.iter().map(|p| p.0));
    let (y0, y1) = range(pts.iter().map(|p| p.1));
    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = HEIGHT - MARGIN_T - MARGIN_B;
    let px = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| MARGIN_T + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="18" font-family="sans-serif" font-size="14" text-anchor="middle">{}{}</text>"#,
        WIDTH / 2.0,
        column,
        if log_scale { " (log scale)" } else { "" }
    );
    let (bx, by) = (MARGIN_L, MARGIN_T + ph);
    let _ = writeln!(
        s,
        r#"<path d="M{bx} {MARGIN_T} V{by} H{}" fill="none" stroke="black"/>"#,
        MARGIN_L + pw
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let yv = y0 + t * (y1 - y0);
        let xv = x0 + t * (x1 - x0);
        let label = if log_scale { format!("1e{yv:.1}") } else { format!("{yv:.3e}") };
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="end">{label}</text>"#,
            bx - 5.0,
            py(yv) + 3.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" font-family="sans-serif" font-size="10" text-anchor="middle">{xv:.0}</text>"#,
            px(xv),
            by + 15.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">k</text>"#,
        MARGIN_L + pw / 2.0,
        HEIGHT - 8.0
    );
    let _ = writeln!(
        s,
        r#"<g data-x-range="{} {}" data-y-range="{} {}">"#,
        format_float(x0),
        format_float(x1),
        format_float(y0),
        format_float(y1)
    );
    let points: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.3},{:.3}", px(x), py(y))).collect();
    let _ = writeln!(
        s,
        r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#,
        points.join(" ")
    );
    let _ = writeln!(s, "</g>\n</svg>");
    Ok(s)
}

/// Reads a trace file and writes the chart next to it as
/// `<stem>.<column>.svg`, or to `out` when given.
pub fn emit_plot(trace_csv: &Path, column: &str, log_scale: bool, out: Option<&Path>) -> Result<PathBuf> {
    let trace = read_trace_file(trace_csv)?;
    let svg = render_svg(&trace, column, log_scale)?;
    let path = match out {
        Some(p) => p.to_path_buf(),
        None => {
            let stem = trace_csv.file_stem().and_then(|s| s.to_str()).unwrap_or("trace");
            trace_csv.with_file_name(format!("{stem}.{column}.svg"))
        }
    };
    std::fs::write(&path, svg)?;
    Ok(path)
}
