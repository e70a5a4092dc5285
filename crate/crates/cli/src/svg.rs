//! Bare-bones SVG line and scatter plots for quick inspection of results.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Dots,
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub style: Style,
    series: Vec<(String, Vec<(f64, f64)>)>,
}

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            log_x: false,
            log_y: false,
            style: Style::Line,
            series: Vec::new(),
        }
    }

    pub fn log_log(mut self) -> Self {
        self.log_x = true;
        self.log_y = true;
        self
    }

    pub fn dots(mut self) -> Self {
        self.style = Style::Dots;
        self
    }

    pub fn add(&mut self, label: &str, points: Vec<(f64, f64)>) {
        self.series.push((label.into(), points));
    }

    fn transform(&self, (x, y): (f64, f64)) -> Option<(f64, f64)> {
        let x = if self.log_x { (x > 0.0).then(|| x.log10())? } else { x };
        let y = if self.log_y { (y > 0.0).then(|| y.log10())? } else { y };
        (x.is_finite() && y.is_finite()).then_some((x, y))
    }

    pub fn render(&self) -> String {
        let pts: Vec<Vec<(f64, f64)>> =
            self.series.iter().map(|(_, p)| p.iter().filter_map(|&q| self.transform(q)).collect()).collect();
        let all = pts.iter().flatten();
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in all {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 - x0 < 1e-300 {
            x1 = x0 + 1.0;
        }
        if y1 - y0 < 1e-300 {
            y1 = y0 + 1.0;
        }
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
        let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            WIDTH - 2.0 * MARGIN,
            HEIGHT - 2.0 * MARGIN
        );
        let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, WIDTH / 2.0, escape(&self.title));
        let lx = if self.log_x { format!("log10 {}", self.x_label) } else { self.x_label.clone() };
        let ly = if self.log_y { format!("log10 {}", self.y_label) } else { self.y_label.clone() };
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 10.0, escape(&lx));
        let _ = writeln!(
            s,
            r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&ly)
        );
        for (v, anchor, x, y) in [
            (x0, "start", MARGIN, HEIGHT - MARGIN + 15.0),
            (x1, "end", WIDTH - MARGIN, HEIGHT - MARGIN + 15.0),
        ] {
            let _ = writeln!(s, r#"<text x="{x}" y="{y}" text-anchor="{anchor}">{v:.3}</text>"#);
        }
        for (v, y) in [(y0, HEIGHT - MARGIN), (y1, MARGIN + 10.0)] {
            let _ = writeln!(s, r#"<text x="{}" y="{y}" text-anchor="end">{v:.3}</text>"#, MARGIN - 4.0);
        }
        for (i, ((label, _), p)) in self.series.iter().zip(&pts).enumerate() {
            let color = COLORS[i % COLORS.len()];
            match self.style {
                Style::Line => {
                    let path: Vec<String> = p.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
                    let _ = writeln!(
                        s,
                        r#"<polyline fill="none" stroke="{color}" stroke-width="1" points="{}"/>"#,
                        path.join(" ")
                    );
                }
                Style::Dots => {
                    for &(x, y) in p {
                        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="0.8" fill="{color}"/>"#, sx(x), sy(y));
                    }
                }
            }
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" fill="{color}" text-anchor="end">{}</text>"#,
                WIDTH - MARGIN - 5.0,
                MARGIN + 15.0 * (i + 1) as f64,
                escape(label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_and_skips_non_positive_on_log_axes() {
        let mut p = Plot::new("O(t)", "t", "O").log_log();
        p.add("a<b", vec![(0.0, 1.0), (1.0, 1.0), (10.0, 0.5)]);
        let svg = p.render();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("a&lt;b"));
        assert_eq!(svg.matches("polyline").count(), 1);
    }
}
