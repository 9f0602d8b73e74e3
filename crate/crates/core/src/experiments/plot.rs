//! Static SVG rendering of sweep and bound tables.

use std::fmt::Write as _;
use std::path::Path;

use super::table::Table;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Precision against recall, one curve per `m`, with `rv*` (circle) and
    /// f-β argmax (square) markers.
    PrCurve,
    /// Worst-case and average-case precision bounds against `r_V` on log axes.
    BoundCurve,
}

impl std::str::FromStr for PlotKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pr-curve" => Ok(PlotKind::PrCurve),
            "bound-curve" => Ok(PlotKind::BoundCurve),
            _ => Err(invalid(format!("unknown plot kind `{s}` (pr-curve, bound-curve)"))),
        }
    }
}

const W: f64 = 720.0;
const H: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 55.0;
const PALETTE: [&str; 10] =
    ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn frac(&self, v: f64) -> f64 {
        let (v, lo, hi) = if self.log { (v.log10(), self.lo.log10(), self.hi.log10()) } else { (v, self.lo, self.hi) };
        if hi > lo {
            (v - lo) / (hi - lo)
        } else {
            0.5
        }
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let (a, b) = (self.lo.log10().floor() as i32, self.hi.log10().ceil() as i32);
            let step = ((b - a) / 6).max(1);
            (a..=b).step_by(step as usize).map(|e| 10f64.powi(e)).filter(|t| *t >= self.lo * 0.999 && *t <= self.hi * 1.001).collect()
        } else {
            (0..=5).map(|i| self.lo + (self.hi - self.lo) * i as f64 / 5.0).collect()
        }
    }
}

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
    dashed: bool,
    colour: &'static str,
    circles: Vec<(f64, f64)>,
    squares: Vec<(f64, f64)>,
}

fn px(x: &Axis, v: f64) -> f64 {
    LEFT + x.frac(v) * (W - LEFT - RIGHT)
}

fn py(y: &Axis, v: f64) -> f64 {
    H - BOTTOM - y.frac(v) * (H - TOP - BOTTOM)
}

fn tick_label(v: f64, log: bool) -> String {
    if log {
        format!("1e{}", v.log10().round() as i32)
    } else {
        format!("{v:.2}")
    }
}

fn draw(title: &str, x_label: &str, y_label: &str, x: &Axis, y: &Axis, series: &[Series]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.1}" y="18" text-anchor="middle" font-size="14">{title}</text>"#, (LEFT + W - RIGHT) / 2.0);
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, H - BOTTOM, TOP);
    let _ = writeln!(s, r#"<rect x="{x0}" y="{y1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#, x1 - x0, y0 - y1);
    for t in x.ticks() {
        let p = px(x, t);
        let _ = writeln!(s, r#"<line x1="{p:.2}" y1="{y0}" x2="{p:.2}" y2="{:.1}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(s, r#"<text x="{p:.2}" y="{:.1}" text-anchor="middle">{}</text>"#, y0 + 18.0, tick_label(t, x.log));
    }
    for t in y.ticks() {
        let p = py(y, t);
        let _ = writeln!(s, r#"<line x1="{:.1}" y1="{p:.2}" x2="{x0}" y2="{p:.2}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 8.0, p + 4.0, tick_label(t, y.log));
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{x_label}</text>"#, (x0 + x1) / 2.0, H - 15.0);
    let _ = writeln!(s, r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{y_label}</text>"#, (y0 + y1) / 2.0, (y0 + y1) / 2.0);
    for (k, ser) in series.iter().enumerate() {
        let pts: Vec<String> = ser.points.iter().map(|&(a, b)| format!("{:.2},{:.2}", px(x, a), py(y, b))).collect();
        let dash = if ser.dashed { r#" stroke-dasharray="5,3""# } else { "" };
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"{dash}/>"#, pts.join(" "), ser.colour);
        for &(a, b) in &ser.circles {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="none" stroke="{}" stroke-width="1.5"/>"#, px(x, a), py(y, b), ser.colour);
        }
        for &(a, b) in &ser.squares {
            let _ = writeln!(s, r#"<rect x="{:.2}" y="{:.2}" width="7" height="7" fill="{}"/>"#, px(x, a) - 3.5, py(y, b) - 3.5, ser.colour);
        }
        let ly = TOP + 10.0 + 16.0 * k as f64;
        let _ = writeln!(s, r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{}" stroke-width="1.5"{dash}/>"#, x1 + 10.0, x1 + 30.0, ser.colour);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, x1 + 35.0, ly + 4.0, ser.label);
    }
    s.push_str("</svg>\n");
    s
}

fn group_by_m(table: &Table) -> Result<Vec<(usize, Vec<&Vec<Option<f64>>>)>> {
    let im = table.column("m")?;
    let mut groups: Vec<(usize, Vec<&Vec<Option<f64>>>)> = Vec::new();
    for row in &table.rows {
        let m = row[im].ok_or_else(|| invalid("row without m"))? as usize;
        match groups.iter_mut().find(|(g, _)| *g == m) {
            Some((_, rows)) => rows.push(row),
            None => groups.push((m, vec![row])),
        }
    }
    groups.sort_by_key(|(m, _)| *m);
    Ok(groups)
}

fn flag(v: Option<f64>) -> bool {
    v.is_some_and(|x| x != 0.0)
}

fn pr_curve(table: &Table) -> Result<String> {
    let (ip, ir) = (table.column("precision")?, table.column("recall")?);
    let (is, ia) = (table.column("is_rv_star")?, table.column("is_fbeta_argmax")?);
    let mut series = Vec::new();
    for (k, (m, rows)) in group_by_m(table)?.into_iter().enumerate() {
        let mut ser = Series {
            label: format!("m = {m}"),
            points: Vec::new(),
            dashed: false,
            colour: PALETTE[k % PALETTE.len()],
            circles: Vec::new(),
            squares: Vec::new(),
        };
        for row in rows {
            let (Some(p), Some(r)) = (row[ip], row[ir]) else { continue };
            ser.points.push((r, p));
            if flag(row[is]) {
                ser.circles.push((r, p));
            }
            if flag(row[ia]) {
                ser.squares.push((r, p));
            }
        }
        series.push(ser);
    }
    let unit = || Axis { lo: 0.0, hi: 1.0, log: false };
    Ok(draw("Precision and recall (circle: rv*, square: best f-beta)", "recall", "precision", &unit(), &unit(), &series))
}

fn bound_plot(table: &Table) -> Result<String> {
    let (iv, iw, ia) = (table.column("r_V")?, table.column("precision_worst")?, table.column("precision_avg")?);
    let is = table.column("is_rv_star")?;
    const FLOOR: f64 = 1e-6;
    let clip = |v: f64| v.clamp(FLOOR, 1.0);
    let mut series = Vec::new();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (k, (m, rows)) in group_by_m(table)?.into_iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let mut worst = Series { label: format!("m = {m} worst"), points: Vec::new(), dashed: false, colour, circles: Vec::new(), squares: Vec::new() };
        let mut avg = Series { label: format!("m = {m} avg"), points: Vec::new(), dashed: true, colour, circles: Vec::new(), squares: Vec::new() };
        for row in rows {
            let Some(r) = row[iv].filter(|r| *r > 0.0) else { continue };
            lo = lo.min(r);
            hi = hi.max(r);
            if let Some(w) = row[iw] {
                worst.points.push((r, clip(w)));
                if flag(row[is]) {
                    worst.circles.push((r, clip(w)));
                }
            }
            if let Some(a) = row[ia] {
                avg.points.push((r, clip(a)));
            }
        }
        series.push(worst);
        series.push(avg);
    }
    if !(lo < hi) {
        hi = lo * 10.0;
    }
    let x = Axis { lo, hi, log: true };
    let y = Axis { lo: FLOOR, hi: 1.0, log: true };
    Ok(draw("Precision bounds (capped at 1)", "r_V", "bound", &x, &y, &series))
}

/// The SVG document for `table`; errors on an empty table or missing columns.
pub fn render_svg(table: &Table, kind: PlotKind) -> Result<String> {
    if table.is_empty() {
        return Err(invalid("cannot plot an empty table"));
    }
    match kind {
        PlotKind::PrCurve => pr_curve(table),
        PlotKind::BoundCurve => bound_plot(table),
    }
}

/// Renders and writes the plot; nothing is written if rendering fails.
pub fn emit_plot(table: &Table, kind: PlotKind, path: &Path) -> Result<()> {
    let svg = render_svg(table, kind)?;
    std::fs::write(path, svg)?;
    Ok(())
}
