use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::config::Axes;
use super::sweep::SweepRow;
use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

struct Scale {
    log: bool,
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
    ticks: Vec<f64>,
}

impl Scale {
    fn new(log: bool, min: f64, max: f64, px_lo: f64, px_hi: f64) -> Self {
        let (lo, hi, ticks) = if log {
            let lo = min.log10().floor();
            let hi = max.log10().ceil().max(lo + 1.0);
            let ticks = (lo as i32..=hi as i32).map(f64::from).collect();
            (lo, hi, ticks)
        } else {
            let (min, max) = if max > min {
                (min, max)
            } else {
                let pad = if min == 0.0 { 1.0 } else { 0.1 * min.abs() };
                (min - pad, max + pad)
            };
            let raw = (max - min) / 5.0;
            let mag = 10f64.powf(raw.log10().floor());
            let step = [1.0, 2.0, 5.0, 10.0]
                .iter()
                .map(|m| m * mag)
                .find(|s| *s >= raw)
                .unwrap_or(10.0 * mag);
            let lo = (min / step).floor() * step;
            let hi = (max / step).ceil() * step;
            let n = ((hi - lo) / step).round() as i64;
            let ticks = (0..=n).map(|i| lo + i as f64 * step).collect();
            (lo, hi, ticks)
        };
        Scale {
            log,
            lo,
            hi,
            px_lo,
            px_hi,
            ticks,
        }
    }

    fn domain(&self, x: f64) -> f64 {
        if self.log {
            x.log10()
        } else {
            x
        }
    }

    fn px(&self, x: f64) -> f64 {
        self.px_at(self.domain(x))
    }

    fn px_at(&self, d: f64) -> f64 {
        self.px_lo + (d - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }

    fn label(&self, tick: f64) -> String {
        if self.log {
            format!("10<tspan dy=\"-6\" font-size=\"9\">{}</tspan>", tick as i32)
        } else {
            let s = format!("{:.6}", tick);
            let s = s.trim_end_matches('0').trim_end_matches('.');
            if s == "-0" { "0".into() } else { s.to_string() }
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Regret-vs-T points per seller, in first-appearance order.
fn series(rows: &[SweepRow], axes: Axes) -> Result<Vec<(String, Vec<(f64, f64)>)>> {
    let (xlog, ylog) = axes.log_flags();
    let mut order: Vec<String> = Vec::new();
    let mut points: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for row in rows {
        if !order.contains(&row.seller) {
            order.push(row.seller.clone());
        }
        let entry = points.entry(row.seller.clone()).or_default();
        if let Some(regret) = row.regret {
            let x = row.horizon as f64;
            if (!xlog || x > 0.0) && (!ylog || regret > 0.0) {
                entry.push((x, regret));
            }
        }
    }
    let mut out = Vec::with_capacity(order.len());
    for name in order {
        let mut pts = points.remove(&name).unwrap_or_default();
        if pts.is_empty() {
            return Err(Error::Empty(format!("no plottable regret values for series '{name}'")));
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        out.push((name, pts));
    }
    Ok(out)
}

/// Regret against horizon as a standalone SVG document, one series per
/// seller.
pub fn render_svg(rows: &[SweepRow], axes: Axes) -> Result<String> {
    let first = rows
        .first()
        .ok_or_else(|| Error::Empty("no rows, so no regret series to plot".into()))?;
    let (gamma, v) = (first.gamma, first.v);
    if rows.iter().any(|r| r.gamma != gamma || r.v != v) {
        return Err(Error::Parameter(
            "rows of one chart must share gamma and v".into(),
        ));
    }
    let series = series(rows, axes)?;
    let all = series.iter().flat_map(|(_, p)| p.iter());
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    let (xlog, ylog) = axes.log_flags();
    let xs = Scale::new(xlog, xmin, xmax, LEFT, WIDTH - RIGHT);
    let ys = Scale::new(ylog, ymin, ymax, HEIGHT - BOTTOM, TOP);

    let mut svg = String::new();
    let w = &mut svg;
    writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        w,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">regret vs T (γ = {gamma}, v = {v})</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0
    )
    .unwrap();

    for &t in &xs.ticks {
        let x = xs.px_at(t);
        writeln!(
            w,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#dddddd"/>"##,
            TOP,
            HEIGHT - BOTTOM
        )
        .unwrap();
        writeln!(
            w,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            HEIGHT - BOTTOM + 18.0,
            xs.label(t)
        )
        .unwrap();
    }
    for &t in &ys.ticks {
        let y = ys.px_at(t);
        writeln!(
            w,
            r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
            WIDTH - RIGHT
        )
        .unwrap();
        writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y + 4.0,
            ys.label(t)
        )
        .unwrap();
    }
    writeln!(
        w,
        r#"<rect x="{LEFT}" y="{TOP}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        WIDTH - RIGHT - LEFT,
        HEIGHT - BOTTOM - TOP
    )
    .unwrap();
    writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">T (rounds)</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        HEIGHT - 12.0
    )
    .unwrap();
    writeln!(
        w,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">regret</text>"#,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        (TOP + HEIGHT - BOTTOM) / 2.0
    )
    .unwrap();

    for (i, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        if pts.len() > 1 {
            let path: Vec<String> = pts
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", xs.px(x), ys.px(y)))
                .collect();
            writeln!(
                w,
                r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
                path.join(" ")
            )
            .unwrap();
        }
        for &(x, y) in pts {
            writeln!(
                w,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                xs.px(x),
                ys.px(y)
            )
            .unwrap();
        }
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = WIDTH - RIGHT + 12.0;
        writeln!(
            w,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        )
        .unwrap();
        writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(name)
        )
        .unwrap();
    }
    writeln!(w, "</svg>").unwrap();
    Ok(svg)
}

pub fn emit_plot(rows: &[SweepRow], path: &Path, axes: Axes) -> Result<()> {
    let svg = render_svg(rows, axes)?;
    std::fs::write(path, svg).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}
