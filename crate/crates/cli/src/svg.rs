//! Minimal hand-written SVG plots.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 56.0;

pub const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Canvas with raw element access, for diagrams that are not x/y plots.
pub struct Canvas {
    body: String,
}

impl Canvas {
    pub fn new() -> Self {
        Self { body: String::new() }
    }

    pub fn width(&self) -> f64 {
        W
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, opacity: f64) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="{fill}" fill-opacity="{opacity}" stroke="black" stroke-width="0.5"/>"#
        );
    }

    pub fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, arrow: bool) {
        let marker = if arrow { r#" marker-end="url(#arrow)""# } else { "" };
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" stroke-width="1.2"{marker}/>"#
        );
    }

    pub fn text(&mut self, x: f64, y: f64, size: f64, anchor: &str, s: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" font-size="{size}" text-anchor="{anchor}" font-family="sans-serif">{}</text>"#,
            esc(s)
        );
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str) {
        let mut d = String::new();
        for (x, y) in pts {
            let _ = write!(d, "{x:.2},{y:.2} ");
        }
        let _ = writeln!(self.body, r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="1.5"/>"#, d.trim_end());
    }

    pub fn circle(&mut self, x: f64, y: f64, r: f64, fill: &str) {
        let _ = writeln!(self.body, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="{fill}"/>"#);
    }

    pub fn finish(self) -> String {
        format!(
            concat!(
                r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
                "\n",
                r#"<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="6" markerHeight="6" orient="auto-start-reverse"><path d="M 0 0 L 10 5 L 0 10 z"/></marker></defs>"#,
                "\n",
                r#"<rect width="100%" height="100%" fill="white"/>"#,
                "\n{body}</svg>\n"
            ),
            w = W,
            h = H,
            body = self.body
        )
    }
}

/// x/y plot with linear axes fitted to the data.
pub struct Plot {
    title: String,
    x_label: String,
    y_label: String,
    series: Vec<Series>,
}

enum Series {
    Line { pts: Vec<(f64, f64)>, label: String },
    Points { pts: Vec<(f64, f64)>, label: String },
    Bars { edges: Vec<f64>, heights: Vec<f64>, label: String },
}

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self { title: title.into(), x_label: x_label.into(), y_label: y_label.into(), series: Vec::new() }
    }

    pub fn line(mut self, pts: Vec<(f64, f64)>, label: &str) -> Self {
        self.series.push(Series::Line { pts, label: label.into() });
        self
    }

    pub fn points(mut self, pts: Vec<(f64, f64)>, label: &str) -> Self {
        self.series.push(Series::Points { pts, label: label.into() });
        self
    }

    pub fn bars(mut self, edges: Vec<f64>, heights: Vec<f64>, label: &str) -> Self {
        self.series.push(Series::Bars { edges, heights, label: label.into() });
        self
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, f64::NEG_INFINITY);
        let mut take = |x: f64, y: f64| {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        };
        for s in &self.series {
            match s {
                Series::Line { pts, .. } | Series::Points { pts, .. } => pts.iter().for_each(|&(x, y)| take(x, y)),
                Series::Bars { edges, heights, .. } => {
                    for (i, &h) in heights.iter().enumerate() {
                        take(edges[i], h);
                        take(edges[i + 1], h);
                    }
                }
            }
        }
        if !(x1 > x0) {
            (x0, x1) = (x0 - 0.5, x0 + 0.5);
        }
        if !(y1 > y0) {
            y1 = y0 + 1.0;
        }
        (x0, x1, y0, y1 + 0.05 * (y1 - y0))
    }

    pub fn render(&self) -> String {
        let (x0, x1, y0, y1) = self.bounds();
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
        let sy = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);
        let mut c = Canvas::new();
        c.line(MARGIN, H - MARGIN, W - MARGIN, H - MARGIN, "black", false);
        c.line(MARGIN, MARGIN, MARGIN, H - MARGIN, "black", false);
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
            c.line(sx(xv), H - MARGIN, sx(xv), H - MARGIN + 4.0, "black", false);
            c.text(sx(xv), H - MARGIN + 16.0, 10.0, "middle", &format!("{xv:.3}"));
            c.line(MARGIN - 4.0, sy(yv), MARGIN, sy(yv), "black", false);
            c.text(MARGIN - 6.0, sy(yv) + 3.0, 10.0, "end", &format!("{yv:.3}"));
        }
        c.text(W / 2.0, 24.0, 14.0, "middle", &self.title);
        c.text(W / 2.0, H - 12.0, 12.0, "middle", &self.x_label);
        c.text(14.0, MARGIN - 12.0, 12.0, "start", &self.y_label);
        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let label = match s {
                Series::Line { pts, label } => {
                    c.polyline(&pts.iter().map(|&(x, y)| (sx(x), sy(y))).collect::<Vec<_>>(), color);
                    label
                }
                Series::Points { pts, label } => {
                    for &(x, y) in pts {
                        c.circle(sx(x), sy(y), 3.0, color);
                    }
                    label
                }
                Series::Bars { edges, heights, label } => {
                    for (j, &h) in heights.iter().enumerate() {
                        let (a, b) = (sx(edges[j]), sx(edges[j + 1]));
                        c.rect(a, sy(h), b - a, sy(y0) - sy(h), color, 0.35);
                    }
                    label
                }
            };
            let ly = MARGIN + 14.0 * i as f64;
            c.rect(W - MARGIN - 150.0, ly - 8.0, 10.0, 10.0, color, 0.8);
            c.text(W - MARGIN - 136.0, ly, 11.0, "start", label);
        }
        c.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_well_formed_document() {
        let svg = Plot::new("t <1>", "x", "y")
            .line(vec![(0.0, 0.0), (1.0, 2.0)], "a")
            .bars(vec![0.0, 0.5, 1.0], vec![1.0, 2.0], "b")
            .render();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("t &lt;1&gt;"));
        assert_eq!(svg.matches("<polyline").count(), 1);
    }
}
