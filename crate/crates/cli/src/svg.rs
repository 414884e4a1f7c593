//! Small 2D plots: loops on a stereographic chart, residual heatmaps and
//! convergence curves.

use std::fmt::Write;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 40.0;

struct Frame {
    lo: (f64, f64),
    scale: (f64, f64),
}

impl Frame {
    fn fit(points: impl Iterator<Item = (f64, f64)>, equal: bool) -> Frame {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in points.filter(|(x, y)| x.is_finite() && y.is_finite()) {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !(x1 > x0) {
            (x0, x1) = (x0.min(0.0) - 1.0, x1.max(0.0) + 1.0);
        }
        if !(y1 > y0) {
            (y0, y1) = (y0.min(0.0) - 1.0, y1.max(0.0) + 1.0);
        }
        let span = SIZE - 2.0 * MARGIN;
        let mut scale = (span / (x1 - x0), span / (y1 - y0));
        if equal {
            let s = scale.0.min(scale.1);
            scale = (s, s);
        }
        Frame { lo: (x0, y0), scale }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        (MARGIN + (x - self.lo.0) * self.scale.0, SIZE - MARGIN - (y - self.lo.1) * self.scale.1)
    }
}

fn open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{MARGIN}" y="24" font-family="sans-serif" font-size="14">{}</text>"#, escape(title));
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// A polyline through `points`, closed when `closed`.
pub fn polyline(points: &[(f64, f64)], closed: bool, title: &str) -> String {
    let frame = Frame::fit(points.iter().cloned(), true);
    let mut s = open(title);
    let coords: Vec<String> = points
        .iter()
        .map(|&(x, y)| {
            let (u, v) = frame.map(x, y);
            format!("{u:.2},{v:.2}")
        })
        .collect();
    let tag = if closed { "polygon" } else { "polyline" };
    let _ = writeln!(s, r#"<{tag} points="{}" fill="none" stroke="navy" stroke-width="1.5"/>"#, coords.join(" "));
    s.push_str("</svg>\n");
    s
}

/// Points `(x, y, value)` drawn as squares coloured by `log10(value)`.
pub fn heatmap(points: &[(f64, f64, f64)], cell: f64, title: &str) -> String {
    let frame = Frame::fit(points.iter().map(|p| (p.0, p.1)), true);
    let logs: Vec<f64> = points.iter().map(|p| p.2.max(1e-300).log10()).collect();
    let lo = logs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut s = open(&format!("{title} (log10 from {lo:.1} to {hi:.1})"));
    let w = (cell * frame.scale.0).max(1.0);
    for (p, l) in points.iter().zip(&logs) {
        let t = if hi > lo { (l - lo) / (hi - lo) } else { 0.0 };
        let (u, v) = frame.map(p.0, p.1);
        let (r, b) = ((255.0 * t) as u8, (255.0 * (1.0 - t)) as u8);
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{w:.2}" height="{w:.2}" fill="rgb({r},0,{b})"/>"#,
            u - w / 2.0,
            v - w / 2.0
        );
    }
    s.push_str("</svg>\n");
    s
}

/// `y` against `x`, on a log axis when `log_y`.
pub fn curve(points: &[(f64, f64)], log_y: bool, title: &str) -> String {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .map(|&(x, y)| (x, if log_y { y.max(1e-300).log10() } else { y }))
        .collect();
    let frame = Frame::fit(pts.iter().cloned(), false);
    let label = if log_y { format!("{title} (log10)") } else { title.to_string() };
    let mut s = open(&label);
    let coords: Vec<String> = pts
        .iter()
        .map(|&(x, y)| {
            let (u, v) = frame.map(x, y);
            format!("{u:.2},{v:.2}")
        })
        .collect();
    let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="darkred" stroke-width="1.5"/>"#, coords.join(" "));
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plots_are_well_formed() {
        let pts = [(0.0, 0.0), (1.0, 0.5), (0.3, 1.0)];
        for s in [
            polyline(&pts, true, "a<b"),
            curve(&pts, true, "c"),
            heatmap(&[(0.0, 0.0, 1e-3), (1.0, 1.0, 1e-9)], 0.1, "h"),
        ] {
            assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
            assert!(!s.contains("NaN"));
        }
        assert!(polyline(&pts, true, "a<b").contains("a&lt;b"));
    }
}
