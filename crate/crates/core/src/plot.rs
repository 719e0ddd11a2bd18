//! SVG rendering of the surprise function with the tangential set shaded.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::evidence::{SurpriseFunction, TangentialRegion};

const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 24.0;
const MARGIN_BOTTOM: f64 = 56.0;
const MARKER_COLOR: &str = "#1f3d7a";

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub width_px: u32,
    pub height_px: u32,
    /// Display crop; never changes the computed e-value.
    pub left_boundary: Option<f64>,
    pub right_boundary: Option<f64>,
    pub color_tangential: String,
    pub color_complement: String,
    pub show_cutoff_line: bool,
    pub x_label: String,
}

impl Default for PlotSpec {
    fn default() -> Self {
        PlotSpec {
            width_px: 800,
            height_px: 500,
            left_boundary: None,
            right_boundary: None,
            color_tangential: "#4a7fd4".into(),
            color_complement: "#d9534f".into(),
            show_cutoff_line: true,
            x_label: "Parameter".into(),
        }
    }
}

impl PlotSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width_px <= (MARGIN_LEFT + MARGIN_RIGHT) as u32 || self.height_px <= (MARGIN_TOP + MARGIN_BOTTOM) as u32
        {
            return Err(Error::InvalidArgument(format!("plot size {}x{} is too small", self.width_px, self.height_px)));
        }
        for b in [self.left_boundary, self.right_boundary].into_iter().flatten() {
            if !b.is_finite() {
                return Err(Error::PlotRange(format!("boundary {b} is not finite")));
            }
        }
        if let (Some(l), Some(r)) = (self.left_boundary, self.right_boundary) {
            if !(l < r) {
                return Err(Error::PlotRange(format!("left boundary {l} must be below right boundary {r}")));
            }
        }
        Ok(())
    }
}

/// A maximal stretch of the piecewise-linear surprise curve lying entirely
/// inside or outside the tangential set.
struct Piece {
    tangential: bool,
    points: Vec<(f64, f64)>,
}

fn lerp(x0: f64, y0: f64, x1: f64, y1: f64, x: f64) -> f64 {
    if x1 == x0 {
        y0
    } else {
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// Splits the curve on `[lo, hi]` at the crossings of the cutoff `s*`.
fn split_pieces(grid: &[f64], values: &[f64], mask: &[bool], s_star: f64, lo: f64, hi: f64) -> Vec<Piece> {
    let mut pieces: Vec<Piece> = Vec::new();
    let mut push = |tangential: bool, a: (f64, f64), b: (f64, f64)| {
        if b.0 <= a.0 {
            return;
        }
        match pieces.last_mut() {
            Some(p) if p.tangential == tangential => p.points.push(b),
            _ => pieces.push(Piece { tangential, points: vec![a, b] }),
        }
    };
    for i in 0..grid.len() - 1 {
        let (x0, x1) = (grid[i], grid[i + 1]);
        if x1 <= lo || x0 >= hi {
            continue;
        }
        let (y0, y1) = (values[i], values[i + 1]);
        let a = (x0.max(lo), lerp(x0, y0, x1, y1, x0.max(lo)));
        let b = (x1.min(hi), lerp(x0, y0, x1, y1, x1.min(hi)));
        if mask[i] == mask[i + 1] {
            push(mask[i], a, b);
            continue;
        }
        // Membership changes inside the segment where the line meets s*.
        let xc = if y1 != y0 { x0 + (s_star - y0) / (y1 - y0) * (x1 - x0) } else { 0.5 * (x0 + x1) };
        let xc = xc.clamp(x0, x1);
        if xc <= a.0 {
            push(mask[i + 1], a, b);
        } else if xc >= b.0 {
            push(mask[i], a, b);
        } else {
            let c = (xc, lerp(x0, y0, x1, y1, xc));
            push(mask[i], a, c);
            push(mask[i + 1], c, b);
        }
    }
    pieces
}

struct Frame {
    theta_min: f64,
    theta_max: f64,
    s_max: f64,
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
}

impl Frame {
    fn x(&self, theta: f64) -> f64 {
        self.left + (theta - self.theta_min) / (self.theta_max - self.theta_min) * (self.right - self.left)
    }

    fn y(&self, s: f64) -> f64 {
        self.bottom - s / self.s_max * (self.bottom - self.top)
    }
}

/// Tick positions at 1, 2 or 5 times a power of ten.
fn nice_ticks(lo: f64, hi: f64, target: usize) -> (Vec<f64>, f64) {
    let raw = (hi - lo) / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    ((first..=last).map(|i| i as f64 * step).collect(), step)
}

fn tick_label(v: f64, step: f64) -> String {
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let s = format!("{:.*}", decimals, v);
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        format!("{:.*}", decimals, 0.0)
    } else {
        s
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn polygon_path(frame: &Frame, points: &[(f64, f64)]) -> String {
    let mut d = String::new();
    let base = frame.y(0.0);
    let (x_first, x_last) = (points[0].0, points[points.len() - 1].0);
    let _ = write!(d, "M{:.2},{:.2}", frame.x(x_first), base);
    for &(t, s) in points {
        let _ = write!(d, " L{:.2},{:.2}", frame.x(t), frame.y(s));
    }
    let _ = write!(d, " L{:.2},{:.2} Z", frame.x(x_last), base);
    d
}

/// Renders the surprise curve, the shaded tangential set and its complement,
/// the null marker at `(theta0, s*)` and the dashed cutoff at `s*`.
pub fn render_fbst_plot(s: &SurpriseFunction, region: &TangentialRegion, spec: &PlotSpec) -> Result<String> {
    spec.validate()?;
    let (grid, values) = (s.grid(), s.values());
    if region.member_mask().len() != grid.len() {
        return Err(Error::InvalidArgument("region and surprise function grids differ".into()));
    }
    let lo = spec.left_boundary.map_or(grid[0], |l| l.max(grid[0]));
    let hi = spec.right_boundary.map_or(grid[grid.len() - 1], |r| r.min(grid[grid.len() - 1]));
    if !(lo < hi) {
        return Err(Error::PlotRange(format!(
            "boundaries exclude the whole grid [{}, {}]",
            grid[0],
            grid[grid.len() - 1]
        )));
    }
    let pieces = split_pieces(grid, values, region.member_mask(), s.s_star(), lo, hi);
    let shown_max = pieces.iter().flat_map(|p| p.points.iter().map(|pt| pt.1)).fold(s.s_star(), f64::max);
    let (y_ticks, y_step) = nice_ticks(0.0, if shown_max > 0.0 { shown_max * 1.05 } else { 1.0 }, 5);
    let s_max = (y_ticks.last().copied().unwrap_or(0.0) + y_step).max(shown_max * 1.05);
    let (w, h) = (spec.width_px as f64, spec.height_px as f64);
    let frame = Frame {
        theta_min: lo,
        theta_max: hi,
        s_max,
        left: MARGIN_LEFT,
        right: w - MARGIN_RIGHT,
        top: MARGIN_TOP,
        bottom: h - MARGIN_BOTTOM,
    };

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}" data-theta-min="{}" data-theta-max="{}" data-s-max="{}" data-plot-left="{}" data-plot-right="{}" data-plot-top="{}" data-plot-bottom="{}">"#,
        spec.width_px,
        spec.height_px,
        spec.width_px,
        spec.height_px,
        lo,
        hi,
        s_max,
        frame.left,
        frame.right,
        frame.top,
        frame.bottom
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#, spec.width_px, spec.height_px);

    let _ = writeln!(svg, r#"<g class="regions" stroke="none">"#);
    for piece in &pieces {
        let (class, color) = if piece.tangential {
            ("tangential", &spec.color_tangential)
        } else {
            ("complement", &spec.color_complement)
        };
        let _ = writeln!(
            svg,
            r#"<path class="{class}" d="{}" fill="{}" fill-opacity="0.5"/>"#,
            polygon_path(&frame, &piece.points),
            escape(color)
        );
    }
    let _ = writeln!(svg, "</g>");

    let mut curve = String::new();
    let mut last: Option<(f64, f64)> = None;
    for pt in pieces.iter().flat_map(|p| p.points.iter()) {
        if last != Some(*pt) {
            if !curve.is_empty() {
                curve.push(' ');
            }
            let _ = write!(curve, "{:.2},{:.2}", frame.x(pt.0), frame.y(pt.1));
            last = Some(*pt);
        }
    }
    let _ = writeln!(
        svg,
        r#"<polyline class="surprise-curve" points="{curve}" fill="none" stroke="black" stroke-width="1.5"/>"#
    );

    if spec.show_cutoff_line {
        let y = frame.y(s.s_star());
        let _ = writeln!(
            svg,
            r#"<line class="cutoff" x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{MARKER_COLOR}" stroke-width="1.2" stroke-dasharray="6,4"/>"#,
            frame.left, frame.right
        );
    }
    if s.null_value() >= lo && s.null_value() <= hi {
        let _ = writeln!(
            svg,
            r#"<circle class="null-marker" cx="{:.2}" cy="{:.2}" r="4.5" fill="{MARKER_COLOR}"/>"#,
            frame.x(s.null_value()),
            frame.y(s.s_star())
        );
    }

    // Axes with ticks and labels.
    let _ =
        writeln!(svg, r#"<g class="axes" stroke="black" stroke-width="1" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(
        svg,
        r#"<line x1="{l:.2}" y1="{b:.2}" x2="{r:.2}" y2="{b:.2}"/>"#,
        l = frame.left,
        r = frame.right,
        b = frame.bottom
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{l:.2}" y1="{t:.2}" x2="{l:.2}" y2="{b:.2}"/>"#,
        l = frame.left,
        t = frame.top,
        b = frame.bottom
    );
    let (x_ticks, x_step) = nice_ticks(lo, hi, 6);
    for t in x_ticks {
        let x = frame.x(t);
        let _ = writeln!(
            svg,
            r#"<line class="x-tick" x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}"/>"#,
            frame.bottom,
            frame.bottom + 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text class="x-tick-label" x="{x:.2}" y="{:.2}" text-anchor="middle" stroke="none">{}</text>"#,
            frame.bottom + 19.0,
            tick_label(t, x_step)
        );
    }
    for t in y_ticks.iter().copied().filter(|t| *t <= s_max) {
        let y = frame.y(t);
        let _ = writeln!(
            svg,
            r#"<line class="y-tick" x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}"/>"#,
            frame.left - 5.0,
            frame.left
        );
        let _ = writeln!(
            svg,
            r#"<text class="y-tick-label" x="{:.2}" y="{:.2}" text-anchor="end" stroke="none">{}</text>"#,
            frame.left - 8.0,
            y + 4.0,
            tick_label(t, y_step)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text class="x-label" x="{:.2}" y="{:.2}" text-anchor="middle" stroke="none">{}</text>"#,
        0.5 * (frame.left + frame.right),
        h - 12.0,
        escape(&spec.x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text class="y-label" x="{:.2}" y="{:.2}" text-anchor="middle" stroke="none" transform="rotate(-90 {:.2} {:.2})">surprise / density</text>"#,
        18.0,
        0.5 * (frame.top + frame.bottom),
        18.0,
        0.5 * (frame.top + frame.bottom)
    );
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, "</svg>");
    Ok(svg)
}
