//! Minimal standalone SVG line plots: stacked panels sharing the time axis.

use std::fmt::Write;

const WIDTH: f64 = 760.0;
const PANEL_H: f64 = 200.0;
const MARGIN_L: f64 = 90.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 30.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl Series {
    pub fn new(label: &str, xs: &[f64], ys: &[f64]) -> Self {
        Self {
            label: label.to_string(),
            xs: xs.to_vec(),
            ys: ys.to_vec(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Panel {
    pub title: String,
    pub series: Vec<Series>,
}

impl Panel {
    pub fn new(title: &str, series: Vec<Series>) -> Self {
        Self {
            title: title.to_string(),
            series,
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Finite range of the values, widened when degenerate.
fn range<'a>(values: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-300_f64.max(1e-12 * lo.abs().max(hi.abs())) {
        let pad = if lo == 0.0 { 1.0 } else { 0.5 * lo.abs() };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

pub fn render(panels: &[Panel]) -> String {
    let height = panels.len() as f64 * (PANEL_H + MARGIN_T + MARGIN_B);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let pw = WIDTH - MARGIN_L - MARGIN_R;
    for (k, panel) in panels.iter().enumerate() {
        let top = k as f64 * (PANEL_H + MARGIN_T + MARGIN_B) + MARGIN_T;
        let (x0, x1) = range(panel.series.iter().flat_map(|s| s.xs.iter()));
        let (y0, y1) = range(panel.series.iter().flat_map(|s| s.ys.iter()));
        let px = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
        let py = |y: f64| top + PANEL_H - (y - y0) / (y1 - y0) * PANEL_H;
        let _ = writeln!(
            s,
            r#"<text x="{MARGIN_L}" y="{:.1}" font-weight="bold">{}</text>"#,
            top - 8.0,
            escape(&panel.title)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{MARGIN_L}" y="{top:.1}" width="{pw}" height="{PANEL_H}" fill="none" stroke="black"/>"#
        );
        for (v, y) in [(y1, top + 4.0), (y0, top + PANEL_H)] {
            let _ = writeln!(s, r#"<text x="{:.1}" y="{y:.1}" text-anchor="end">{v:.4e}</text>"#, MARGIN_L - 4.0);
        }
        for (v, anchor) in [(x0, "start"), (x1, "end")] {
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="{anchor}">t = {v}</text>"#,
                px(v),
                top + PANEL_H + 14.0
            );
        }
        for (j, series) in panel.series.iter().enumerate() {
            let color = COLORS[j % COLORS.len()];
            let mut pts = String::new();
            for (x, y) in series.xs.iter().zip(&series.ys) {
                if x.is_finite() && y.is_finite() {
                    let _ = write!(pts, "{:.2},{:.2} ", px(*x), py(*y));
                }
            }
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                pts.trim_end()
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" fill="{color}" text-anchor="end">{}</text>"#,
                WIDTH - MARGIN_R - 6.0,
                top + 14.0 + 13.0 * j as f64,
                escape(&series.label)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
