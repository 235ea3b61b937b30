//! Minimal deterministic SVG output for polygons, paths and marked points.

use crate::polygon::Point;
use std::fmt::Write;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

/// Color assigned to the `i`-th path.
pub fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

#[derive(Debug, Clone, Default)]
pub struct Scene {
    /// Filled regions, each a list of loops.
    pub regions: Vec<Vec<Vec<Point>>>,
    /// Open polylines, colored by index.
    pub paths: Vec<Vec<Point>>,
    /// Marked points (e.g. singular corners).
    pub markers: Vec<Point>,
    pub title: Option<String>,
}

impl Scene {
    fn bbox(&self) -> [f64; 4] {
        let mut b = [
            f64::INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::NEG_INFINITY,
        ];
        let pts = self
            .regions
            .iter()
            .flatten()
            .flatten()
            .chain(self.paths.iter().flatten())
            .chain(&self.markers);
        for q in pts {
            b[0] = b[0].min(q[0]);
            b[1] = b[1].min(q[1]);
            b[2] = b[2].max(q[0]);
            b[3] = b[3].max(q[1]);
        }
        if !b[0].is_finite() {
            return [0.0, 0.0, 1.0, 1.0];
        }
        b
    }

    /// Render with a viewBox equal to the bounding box plus a 5% margin.
    /// The y axis points up.
    pub fn to_svg(&self) -> String {
        let [x0, y0, x1, y1] = self.bbox();
        let span = (x1 - x0).max(y1 - y0).max(1e-12);
        let m = 0.05 * span;
        let (vx, vy, vw, vh) = (x0 - m, -(y1 + m), x1 - x0 + 2.0 * m, y1 - y0 + 2.0 * m);
        let stroke = span / 400.0;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="600" height="{}">"#,
            num(vx),
            num(vy),
            num(vw),
            num(vh),
            num(600.0 * vh / vw)
        );
        if let Some(t) = &self.title {
            let _ = writeln!(s, "<title>{}</title>", escape(t));
        }
        let _ = writeln!(s, r#"<g transform="scale(1,-1)">"#);
        for loops in &self.regions {
            let mut d = String::new();
            for l in loops {
                for (i, q) in l.iter().enumerate() {
                    let _ = write!(
                        d,
                        "{}{} {} ",
                        if i == 0 { "M" } else { "L" },
                        num(q[0]),
                        num(q[1])
                    );
                }
                d.push('Z');
            }
            let _ = writeln!(
                s,
                r##"<path d="{d}" fill="#eeeeee" fill-rule="evenodd" stroke="#000000" stroke-width="{}"/>"##,
                num(stroke)
            );
        }
        for (i, path) in self.paths.iter().enumerate() {
            let pts: Vec<String> = path
                .iter()
                .map(|q| format!("{},{}", num(q[0]), num(q[1])))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="{}"/>"#,
                pts.join(" "),
                color(i),
                num(stroke)
            );
        }
        for q in &self.markers {
            let _ = writeln!(
                s,
                r##"<circle cx="{}" cy="{}" r="{}" fill="#000000"/>"##,
                num(q[0]),
                num(q[1]),
                num(3.0 * stroke)
            );
        }
        s.push_str("</g>\n</svg>\n");
        s
    }
}

/// Fixed-precision number formatting so output does not depend on float printing details.
fn num(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_scene() {
        let sc = Scene {
            regions: vec![vec![vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]]],
            paths: vec![vec![[0.0, 0.5], [0.5, 1.0]]],
            markers: vec![[1.0, 1.0]],
            title: Some("a < b".into()),
        };
        let svg = sc.to_svg();
        assert!(svg.contains(r#"viewBox="-0.05 -1.05 1.1 1.1""#), "{svg}");
        assert!(svg.contains("M0 0 L1 0 L1 1 L0 1 Z"));
        assert!(svg.contains(r#"points="0,0.5 0.5,1""#));
        assert!(svg.contains("a &lt; b"));
        assert_eq!(svg, sc.to_svg());
    }

    #[test]
    fn number_format() {
        assert_eq!(num(-0.0), "0");
        assert_eq!(num(2.5), "2.5");
        assert_eq!(num(1.0 / 3.0), "0.333333");
    }
}
