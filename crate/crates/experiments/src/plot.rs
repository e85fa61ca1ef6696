//! Self-contained SVG line plots and heatmaps.
//!
//! Output depends only on the input data, so identical inputs render to
//! byte-identical documents.

use std::fmt::Write;

use crate::error::{ExperimentError, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 60.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

// Viridis anchors.
const COLORMAP: [(f64, f64, f64); 5] = [
    (68.0, 1.0, 84.0),
    (59.0, 82.0, 139.0),
    (33.0, 145.0, 140.0),
    (94.0, 201.0, 98.0),
    (253.0, 231.0, 37.0),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Fixed y-axis range; derived from the data when absent.
    pub y_range: Option<(f64, f64)>,
    /// Free-form note embedded as the document description.
    pub note: Option<String>,
    /// Draw series without a legend entry in a muted style.
    pub hide_legend: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_ticks: Vec<String>,
    pub y_ticks: Vec<String>,
    /// `values[row][col]`; row 0 is drawn at the bottom. `NaN` cells are left blank.
    pub values: Vec<Vec<f64>>,
    pub range: (f64, f64),
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn num(x: f64) -> String {
    format!("{x:.2}")
}

fn tick_label(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e9 {
        format!("{x:.0}")
    } else {
        format!("{x:.2}")
    }
}

fn header(out: &mut String, title: &str) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n\
         <text x=\"{tx}\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">{title}</text>\n",
        w = WIDTH,
        h = HEIGHT,
        tx = num(WIDTH / 2.0),
        title = esc(title),
    );
}

fn axis_labels(out: &mut String, x_label: &str, y_label: &str) {
    let cx = MARGIN_LEFT + (WIDTH - MARGIN_LEFT - MARGIN_RIGHT) / 2.0;
    let cy = MARGIN_TOP + (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM) / 2.0;
    let _ = writeln!(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>", num(cx), num(HEIGHT - 15.0), esc(x_label));
    let _ = writeln!(
        out,
        "<text x=\"18\" y=\"{y}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {y})\">{}</text>",
        esc(y_label),
        y = num(cy)
    );
}

fn nice_ticks(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let span = (hi - lo).max(f64::EPSILON);
    let raw = span / count as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= count as f64).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() * step;
    (0..)
        .map(|k| first + k as f64 * step)
        .take_while(|&t| t <= hi + step * 1e-9)
        .map(|t| if t.abs() < step * 1e-9 { 0.0 } else { t })
        .collect()
}

pub fn render_line_plot(plot: &LinePlot) -> Result<String> {
    let all: Vec<(f64, f64)> = plot.series.iter().flat_map(|s| s.points.iter().copied()).collect();
    if all.is_empty() {
        return Err(ExperimentError::EmptyPlot);
    }
    let (mut x0, mut x1) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (mut y0, mut y1) = plot
        .y_range
        .unwrap_or_else(|| all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1))));
    if x1 <= x0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 <= y0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| MARGIN_TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut out = String::new();
    header(&mut out, &plot.title);
    if let Some(note) = &plot.note {
        let _ = writeln!(out, "<desc>{}</desc>", esc(note));
    }
    let _ = writeln!(
        out,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        num(MARGIN_LEFT),
        num(MARGIN_TOP),
        num(pw),
        num(ph)
    );
    for t in nice_ticks(x0, x1, 8) {
        let x = sx(t);
        let _ = writeln!(
            out,
            "<line x1=\"{x}\" y1=\"{b}\" x2=\"{x}\" y2=\"{b2}\" stroke=\"black\"/><text x=\"{x}\" y=\"{ty}\" text-anchor=\"middle\">{}</text>",
            tick_label(t),
            x = num(x),
            b = num(MARGIN_TOP + ph),
            b2 = num(MARGIN_TOP + ph + 5.0),
            ty = num(MARGIN_TOP + ph + 18.0),
        );
    }
    for t in nice_ticks(y0, y1, 5) {
        let y = sy(t);
        let _ = writeln!(
            out,
            "<line x1=\"{l2}\" y1=\"{y}\" x2=\"{l}\" y2=\"{y}\" stroke=\"black\"/><text x=\"{tx}\" y=\"{ty}\" text-anchor=\"end\">{}</text>",
            tick_label(t),
            y = num(y),
            l = num(MARGIN_LEFT),
            l2 = num(MARGIN_LEFT - 5.0),
            tx = num(MARGIN_LEFT - 8.0),
            ty = num(y + 4.0),
        );
    }
    axis_labels(&mut out, &plot.x_label, &plot.y_label);

    for (k, series) in plot.series.iter().enumerate() {
        if series.points.is_empty() {
            continue;
        }
        let color = PALETTE[k % PALETTE.len()];
        let path: Vec<String> = series.points.iter().map(|&(x, y)| format!("{},{}", num(sx(x)), num(sy(y)))).collect();
        let (width, opacity) = if plot.hide_legend { ("1", "0.6") } else { ("2", "1") };
        if path.len() == 1 {
            let _ = writeln!(out, "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{color}\"/>", num(sx(series.points[0].0)), num(sy(series.points[0].1)));
        } else {
            let _ = writeln!(
                out,
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"{width}\" stroke-opacity=\"{opacity}\" points=\"{}\"/>",
                path.join(" ")
            );
        }
        if !plot.hide_legend {
            let ly = MARGIN_TOP + 10.0 + 18.0 * k as f64;
            let lx = WIDTH - MARGIN_RIGHT + 15.0;
            let _ = writeln!(
                out,
                "<line x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"{color}\" stroke-width=\"2\"/><text x=\"{}\" y=\"{}\">{}</text>",
                num(lx),
                num(lx + 20.0),
                num(lx + 26.0),
                num(ly + 4.0),
                esc(&series.label),
                y = num(ly),
            );
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn colormap(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let pos = t * (COLORMAP.len() - 1) as f64;
    let i = (pos.floor() as usize).min(COLORMAP.len() - 2);
    let f = pos - i as f64;
    let (a, b) = (COLORMAP[i], COLORMAP[i + 1]);
    let mix = |u: f64, v: f64| (u + (v - u) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

pub fn render_heatmap(map: &Heatmap) -> Result<String> {
    let rows = map.values.len();
    let cols = map.values.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 || map.values.iter().any(|r| r.len() != cols) {
        return Err(ExperimentError::EmptyPlot);
    }
    let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let cw = pw / cols as f64;
    let ch = ph / rows as f64;
    let (lo, hi) = map.range;
    let scale = |v: f64| if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };

    let mut out = String::new();
    header(&mut out, &map.title);
    for (r, row) in map.values.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            if v.is_nan() {
                continue;
            }
            let _ = writeln!(
                out,
                "<rect class=\"cell\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"><title>{}</title></rect>",
                num(MARGIN_LEFT + c as f64 * cw),
                num(MARGIN_TOP + ph - (r + 1) as f64 * ch),
                num(cw),
                num(ch),
                colormap(scale(v)),
                format_args!("{v:.4}"),
            );
        }
    }
    let stride = |len: usize| (len / 12).max(1);
    for (c, label) in map.x_ticks.iter().enumerate().step_by(stride(map.x_ticks.len())) {
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            num(MARGIN_LEFT + (c as f64 + 0.5) * cw),
            num(MARGIN_TOP + ph + 18.0),
            esc(label)
        );
    }
    for (r, label) in map.y_ticks.iter().enumerate().step_by(stride(map.y_ticks.len())) {
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
            num(MARGIN_LEFT - 8.0),
            num(MARGIN_TOP + ph - (r as f64 + 0.5) * ch + 4.0),
            esc(label)
        );
    }
    axis_labels(&mut out, &map.x_label, &map.y_label);

    let bx = WIDTH - MARGIN_RIGHT + 30.0;
    let steps = 50;
    let sh = ph / steps as f64;
    for k in 0..steps {
        let t = (k as f64 + 0.5) / steps as f64;
        let _ = writeln!(
            out,
            "<rect class=\"colorbar\" x=\"{}\" y=\"{}\" width=\"20\" height=\"{}\" fill=\"{}\"/>",
            num(bx),
            num(MARGIN_TOP + ph - (k + 1) as f64 * sh),
            num(sh + 0.5),
            colormap(t)
        );
    }
    for (t, v) in [(0.0, lo), (0.5, (lo + hi) / 2.0), (1.0, hi)] {
        let _ = writeln!(out, "<text x=\"{}\" y=\"{}\">{}</text>", num(bx + 26.0), num(MARGIN_TOP + ph - t * ph + 4.0), tick_label(v));
    }
    out.push_str("</svg>\n");
    Ok(out)
}
