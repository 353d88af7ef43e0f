use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::rate::clamped_means;
use super::ErrorCurve;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotAxes {
    /// `ln ē` against `ln n`.
    #[default]
    LogLog,
    /// `ln ē` against `n`.
    LogLinear,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 55.0;
const DASHES: [&str; 6] = ["", "8 4", "2 3", "10 3 2 3", "5 5", "1 6"];
const COLORS: [&str; 6] = ["#1b6ca8", "#c0392b", "#27ae60", "#8e44ad", "#d68910", "#2c3e50"];

/// Plotted coordinates of each curve (zero means clamped to half a test count).
pub fn plot_coordinates(curve: &ErrorCurve, axes: PlotAxes) -> Vec<(f64, f64)> {
    clamped_means(curve)
        .into_iter()
        .map(|(n, e)| {
            let x = match axes {
                PlotAxes::LogLog => (n as f64).ln(),
                PlotAxes::LogLinear => n as f64,
            };
            (x, e.ln())
        })
        .collect()
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if hi - lo < 1e-9 {
        (lo - 1.0, hi + 1.0)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render_svg(curves: &[ErrorCurve], axes: PlotAxes) -> Result<String> {
    if curves.is_empty() || curves.iter().all(|c| c.points.is_empty()) {
        return Err(Error::invalid("no points to plot"));
    }
    let coords: Vec<Vec<(f64, f64)>> = curves.iter().map(|c| plot_coordinates(c, axes)).collect();
    let (x0, x1) = range(coords.iter().flatten().map(|p| p.0));
    let (y0, y1) = range(coords.iter().flatten().map(|p| p.1));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{fx:.2}</text>"#,
            sx(fx),
            TOP + ph + 16.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{fy:.2}</text>"#,
            LEFT - 6.0,
            sy(fy) + 4.0
        );
    }
    let xlabel = match axes {
        PlotAxes::LogLog => "ln n (training size per class)",
        PlotAxes::LogLinear => "n (training size per class)",
    };
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{xlabel}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(16 {:.2}) rotate(-90)" text-anchor="middle">ln mean misclassification rate</text>"#,
        TOP + ph / 2.0
    );

    for (i, (curve, pts)) in curves.iter().zip(&coords).enumerate() {
        let color = COLORS[i % COLORS.len()];
        let dash = DASHES[i % DASHES.len()];
        let dash_attr = if dash.is_empty() {
            String::new()
        } else {
            format!(r#" stroke-dasharray="{dash}""#)
        };
        if pts.len() > 1 {
            let path: Vec<String> = pts
                .iter()
                .map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.8"{dash_attr}/>"#,
                path.join(" ")
            );
        }
        for (x, y) in pts {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                sx(*x),
                sy(*y)
            );
        }
        let ly = TOP + 14.0 + 18.0 * i as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="1.8"{dash_attr}/>"#,
            lx + 28.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">{} {}({})</text>"#,
            lx + 34.0,
            ly + 4.0,
            escape(&curve.method),
            escape(&curve.scenario),
            curve.param
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn export_svg(curves: &[ErrorCurve], path: &Path, axes: PlotAxes) -> Result<()> {
    let text = render_svg(curves, axes)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
