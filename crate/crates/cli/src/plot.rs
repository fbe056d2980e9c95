//! Self-contained SVG charts. Output depends only on the inputs (and the
//! jitter seed), so identical data renders to identical bytes.
//!
//! Every data point is drawn as exactly one element with `class="mark"`.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;
pub const LOW_COLOR: [u8; 3] = [0x1f, 0x77, 0xb4];
pub const HIGH_COLOR: [u8; 3] = [0xd6, 0x27, 0x28];

const LEFT: f64 = 170.0;
const RIGHT: f64 = 760.0;
const TOP: f64 = 60.0;
const BOTTOM: f64 = 530.0;

/// Linear blend from blue (`t = 0`) to red (`t = 1`); `t` is clamped and a
/// non-finite `t` maps to the midpoint.
pub fn color(t: f64) -> String {
    let t = if t.is_finite() {
        t.clamp(0.0, 1.0)
    } else {
        0.5
    };
    let c: Vec<u8> = LOW_COLOR
        .iter()
        .zip(HIGH_COLOR)
        .map(|(&a, b)| (a as f64 + (b as f64 - a as f64) * t).round() as u8)
        .collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Rounds `raw` up to 1, 2 or 5 times a power of ten.
fn nice_step(raw: f64) -> f64 {
    if !(raw > 0.0) || !raw.is_finite() {
        return 1.0;
    }
    let mag = 10f64.powf(raw.log10().floor());
    let f = raw / mag;
    let nice = if f <= 1.0 {
        1.0
    } else if f <= 2.0 {
        2.0
    } else if f <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

/// Tick-aligned axis covering `[lo, hi]` with about five intervals.
#[derive(Debug, Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    step: f64,
}

impl Axis {
    fn new(lo: f64, hi: f64) -> Self {
        let (lo, hi) = if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, lo + 0.5)
        };
        let step = nice_step((hi - lo) / 5.0);
        Self {
            lo: (lo / step).floor() * step,
            hi: (hi / step).ceil() * step,
            step,
        }
    }

    fn ticks(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step).round() as i64;
        (0..=n).map(|i| self.lo + i as f64 * self.step).collect()
    }

    fn label(&self, v: f64) -> String {
        let decimals = (-self.step.log10().floor()).max(0.0) as usize;
        let s = format!("{v:.decimals$}");
        if s.trim_start_matches('-')
            .chars()
            .all(|c| c == '0' || c == '.')
        {
            s.trim_start_matches('-').to_string()
        } else {
            s
        }
    }

    fn map(&self, v: f64, from: f64, to: f64) -> f64 {
        from + (v - self.lo) / (self.hi - self.lo) * (to - from)
    }
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

struct Canvas {
    out: String,
}

impl Canvas {
    fn new(title: &str) -> Self {
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(
            out,
            r##"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="30" text-anchor="middle" font-size="16">{}</text>"#,
            WIDTH / 2.0,
            escape(title)
        );
        Self { out }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, dashed: bool) {
        let dash = if dashed {
            r#" stroke-dasharray="4 3""#
        } else {
            ""
        };
        let _ = writeln!(
            self.out,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}"{dash}/>"#
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, s: &str) {
        let _ = writeln!(
            self.out,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}">{}</text>"#,
            escape(s)
        );
    }

    fn x_axis(&mut self, axis: &Axis, label: &str) {
        self.line(LEFT, BOTTOM, RIGHT, BOTTOM, "#333333", false);
        for t in axis.ticks() {
            let x = axis.map(t, LEFT, RIGHT);
            self.line(x, BOTTOM, x, BOTTOM + 5.0, "#333333", false);
            self.text(x, BOTTOM + 18.0, "middle", &axis.label(t));
        }
        self.text((LEFT + RIGHT) / 2.0, BOTTOM + 40.0, "middle", label);
    }

    fn y_axis(&mut self, axis: &Axis, label: &str) {
        self.line(LEFT, TOP, LEFT, BOTTOM, "#333333", false);
        for t in axis.ticks() {
            let y = axis.map(t, BOTTOM, TOP);
            self.line(LEFT - 5.0, y, LEFT, y, "#333333", false);
            self.text(LEFT - 8.0, y + 4.0, "end", &axis.label(t));
        }
        let (x, y) = (LEFT - 70.0, (TOP + BOTTOM) / 2.0);
        let _ = writeln!(
            self.out,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="middle" transform="rotate(-90 {x:.2} {y:.2})">{}</text>"#,
            escape(label)
        );
    }

    /// Vertical blue-to-red legend on the right margin.
    fn color_legend(&mut self, label: &str) {
        let (x, y, h) = (RIGHT + 12.0, TOP + 20.0, 160.0);
        let _ = writeln!(
            self.out,
            r#"<defs><linearGradient id="scale" x1="0" y1="1" x2="0" y2="0"><stop offset="0" stop-color="{}"/><stop offset="1" stop-color="{}"/></linearGradient></defs>"#,
            color(0.0),
            color(1.0)
        );
        let _ = writeln!(
            self.out,
            r#"<rect x="{x:.2}" y="{y:.2}" width="10" height="{h:.2}" fill="url(#scale)"/>"#
        );
        self.text(x + 5.0, y - 6.0, "middle", "high");
        self.text(x + 5.0, y + h + 14.0, "middle", "low");
        let (lx, ly) = (x + 24.0, y + h / 2.0);
        let _ = writeln!(
            self.out,
            r#"<text x="{lx:.2}" y="{ly:.2}" text-anchor="middle" transform="rotate(90 {lx:.2} {ly:.2})">{}</text>"#,
            escape(label)
        );
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

/// Horizontal bar chart, first bar on top.
pub fn bar_chart(title: &str, x_label: &str, bars: &[(String, f64)]) -> String {
    let mut c = Canvas::new(title);
    let (_, max) = min_max(bars.iter().map(|b| b.1));
    let axis = Axis::new(0.0, if max > 0.0 { max } else { 1.0 });
    c.x_axis(&axis, x_label);
    c.line(LEFT, TOP, LEFT, BOTTOM, "#333333", false);
    let band = (BOTTOM - TOP) / bars.len().max(1) as f64;
    for (i, (label, value)) in bars.iter().enumerate() {
        let y = TOP + band * i as f64;
        let w = axis.map(value.max(0.0), LEFT, RIGHT) - LEFT;
        let _ = writeln!(
            c.out,
            r#"<rect class="mark" x="{LEFT:.2}" y="{:.2}" width="{w:.2}" height="{:.2}" fill="{}"><title>{}: {value}</title></rect>"#,
            y + band * 0.15,
            band * 0.7,
            color(0.0),
            escape(label)
        );
        c.text(LEFT - 8.0, y + band / 2.0 + 4.0, "end", label);
    }
    c.finish()
}

/// One row of a beeswarm: the Shapley values of a feature and the matching
/// normalized feature values (0 is low, 1 is high).
pub struct Strip {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Strip plot with one row per feature, first row on top. Points are
/// spread vertically by a jitter drawn from `seed`.
pub fn beeswarm(title: &str, strips: &[Strip], seed: u64) -> String {
    let mut c = Canvas::new(title);
    let (lo, hi) = min_max(strips.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (lo, hi) = if lo <= hi { (lo, hi) } else { (0.0, 0.0) };
    let axis = Axis::new(lo, hi);
    c.x_axis(&axis, "Shapley value (impact on log-odds)");
    c.line(LEFT, TOP, LEFT, BOTTOM, "#333333", false);
    if axis.lo < 0.0 && axis.hi > 0.0 {
        let x0 = axis.map(0.0, LEFT, RIGHT);
        c.line(x0, TOP, x0, BOTTOM, "#999999", true);
    }
    c.color_legend("Feature value");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let band = (BOTTOM - TOP) / strips.len().max(1) as f64;
    for (i, strip) in strips.iter().enumerate() {
        let centre = TOP + band * (i as f64 + 0.5);
        c.text(LEFT - 8.0, centre + 4.0, "end", &strip.label);
        for &(phi, t) in &strip.points {
            let jitter: f64 = rng.random_range(-1.0..=1.0);
            let _ = writeln!(
                c.out,
                r#"<circle class="mark" cx="{:.2}" cy="{:.2}" r="2.5" fill="{}" fill-opacity="0.7"/>"#,
                axis.map(phi, LEFT, RIGHT),
                centre + jitter * band * 0.35,
                color(t)
            );
        }
    }
    c.finish()
}

/// Scatter plot; the third coordinate of each point is its color position
/// in `[0, 1]`.
pub fn scatter(
    title: &str,
    x_label: &str,
    y_label: &str,
    color_label: &str,
    points: &[(f64, f64, f64)],
) -> String {
    let mut c = Canvas::new(title);
    let (xlo, xhi) = min_max(points.iter().map(|p| p.0));
    let (ylo, yhi) = min_max(points.iter().map(|p| p.1));
    let x_axis = if xlo <= xhi {
        Axis::new(xlo, xhi)
    } else {
        Axis::new(0.0, 1.0)
    };
    let y_axis = if ylo <= yhi {
        Axis::new(ylo, yhi)
    } else {
        Axis::new(0.0, 1.0)
    };
    c.x_axis(&x_axis, x_label);
    c.y_axis(&y_axis, y_label);
    if y_axis.lo < 0.0 && y_axis.hi > 0.0 {
        let y0 = y_axis.map(0.0, BOTTOM, TOP);
        c.line(LEFT, y0, RIGHT, y0, "#999999", true);
    }
    c.color_legend(color_label);
    for &(x, y, t) in points {
        let _ = writeln!(
            c.out,
            r#"<circle class="mark" cx="{:.2}" cy="{:.2}" r="3" fill="{}" fill-opacity="0.7"/>"#,
            x_axis.map(x, LEFT, RIGHT),
            y_axis.map(y, BOTTOM, TOP),
            color(t)
        );
    }
    c.finish()
}
