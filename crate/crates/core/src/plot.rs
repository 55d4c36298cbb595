//! Deterministic SVG line charts.
//!
//! The emitter is deliberately self-contained: fixed canvas, fixed palette,
//! coordinates rounded to 1/100 px, labels escaped by hand. Rendering the
//! same series twice yields byte-identical output, which the command-line
//! tool relies on for reproducibility checks.

use crate::error::{Error, Result};
use std::fmt::Write as _;

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 200.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_BOTTOM: f64 = 56.0;
const TICKS: usize = 6;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// One polyline: a label and (x, y) points.
#[derive(Debug, Clone)]
pub struct PlotSeries {
    pub label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl PlotSeries {
    pub fn new(label: &str, xs: Vec<f64>, ys: Vec<f64>) -> Result<PlotSeries> {
        if xs.is_empty() {
            return Err(Error::EmptySeries { what: label.to_string() });
        }
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch { left: xs.len(), right: ys.len() });
        }
        for &v in xs.iter().chain(ys.iter()) {
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { what: format!("plot series '{}'", label) });
            }
        }
        Ok(PlotSeries { label: label.to_string(), xs, ys })
    }
}

/// Render the series to an SVG document string.
pub fn emit_plot(series: &[PlotSeries], title: &str, x_label: &str, y_label: &str) -> Result<String> {
    if series.is_empty() {
        return Err(Error::EmptySeries { what: "plot".to_string() });
    }

    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for &x in &s.xs {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
        }
        for &y in &s.ys {
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
    }
    // Degenerate extents still need a drawable box.
    if x_max == x_min {
        x_min -= 0.5;
        x_max += 0.5;
    }
    if y_max == y_min {
        let pad = if y_min == 0.0 { 0.5 } else { y_min.abs() * 0.05 };
        y_min -= pad;
        y_max += pad;
    }

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let to_px = |x: f64, y: f64| -> (f64, f64) {
        (
            MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w,
            MARGIN_TOP + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h,
        )
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        WIDTH, HEIGHT, WIDTH, HEIGHT
    );
    let _ = writeln!(out, "<rect width=\"{}\" height=\"{}\" fill=\"white\"/>", WIDTH, HEIGHT);
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"28\" font-family=\"sans-serif\" font-size=\"18\" text-anchor=\"middle\">{}</text>",
        MARGIN_LEFT + plot_w / 2.0,
        escape_xml(title)
    );

    // Gridlines and tick labels.
    for i in 0..TICKS {
        let frac = i as f64 / (TICKS - 1) as f64;
        let xv = x_min + frac * (x_max - x_min);
        let yv = y_min + frac * (y_max - y_min);
        let (px, _) = to_px(xv, y_min);
        let (_, py) = to_px(x_min, yv);
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#dddddd\"/>",
            px,
            MARGIN_TOP,
            px,
            MARGIN_TOP + plot_h
        );
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#dddddd\"/>",
            MARGIN_LEFT,
            py,
            MARGIN_LEFT + plot_w,
            py
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
            px,
            MARGIN_TOP + plot_h + 18.0,
            escape_xml(&crate::report::fmt_sig(xv, 6))
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">{}</text>",
            MARGIN_LEFT - 8.0,
            py + 4.0,
            escape_xml(&crate::report::fmt_sig(yv, 6))
        );
    }

    // Frame.
    let _ = writeln!(
        out,
        "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#333333\"/>",
        MARGIN_LEFT, MARGIN_TOP, plot_w, plot_h
    );

    // Axis titles.
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 14.0,
        escape_xml(x_label)
    );
    let _ = writeln!(
        out,
        "<text x=\"18\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.2})\">{}</text>",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape_xml(y_label)
    );

    // Series polylines.
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut points = String::new();
        for (&x, &y) in s.xs.iter().zip(&s.ys) {
            let (px, py) = to_px(x, y);
            let _ = write!(points, "{:.2},{:.2} ", px, py);
        }
        let _ = writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.8\" points=\"{}\"/>",
            color,
            points.trim_end()
        );
    }

    // Legend, right of the frame.
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = MARGIN_TOP + 16.0 + i as f64 * 22.0;
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{}\" stroke-width=\"1.8\"/>",
            MARGIN_LEFT + plot_w + 16.0,
            y,
            MARGIN_LEFT + plot_w + 44.0,
            y,
            color
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"13\">{}</text>",
            MARGIN_LEFT + plot_w + 50.0,
            y + 4.0,
            escape_xml(&s.label)
        );
    }

    out.push_str("</svg>\n");
    Ok(out)
}

fn escape_xml(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}
