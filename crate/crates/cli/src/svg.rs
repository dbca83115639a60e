//! Minimal static SVG line charts.

use std::fmt::Write;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 560.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 180.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 55.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#aec7e8",
];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub bold: bool,
}

#[derive(Debug, Clone)]
pub struct ReferenceLine {
    pub y: f64,
    pub label: String,
}

#[derive(Debug, Clone, Default)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub reference_lines: Vec<ReferenceLine>,
    /// Plot `log10(y)`; non-positive values are dropped.
    pub log_y: bool,
    /// Fixed axis ranges; data bounds when `None`.
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
    /// Draw the legend, one entry per series.
    pub legend: bool,
}

pub fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

impl LineChart {
    fn transform_y(&self, y: f64) -> Option<f64> {
        if !y.is_finite() {
            return None;
        }
        if self.log_y {
            (y > 0.0).then(|| y.log10())
        } else {
            Some(y)
        }
    }

    fn bounds(&self) -> ((f64, f64), (f64, f64)) {
        let xs = self.series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
        let ys = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().filter_map(|p| self.transform_y(p.1)))
            .chain(self.reference_lines.iter().filter_map(|r| self.transform_y(r.y)));
        let span = |it: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = it
                .filter(|v| v.is_finite())
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if hi - lo < 1e-12 {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo, hi)
            }
        };
        let x = self.x_range.unwrap_or_else(|| span(&mut xs.into_iter()));
        let y = match self.y_range {
            Some((lo, hi)) => (self.transform_y(lo).unwrap_or(lo), self.transform_y(hi).unwrap_or(hi)),
            None => span(&mut ys.into_iter()),
        };
        (x, y)
    }

    pub fn render(&self) -> String {
        let ((x0, x1), (y0, y1)) = self.bounds();
        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
        let sy = |y: f64| MARGIN_TOP + (1.0 - (y - y0) / (y1 - y0)) * plot_h;

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(
            out,
            r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            MARGIN_LEFT + plot_w / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            out,
            r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
        );

        for k in 0..=5 {
            let fx = x0 + (x1 - x0) * k as f64 / 5.0;
            let fy = y0 + (y1 - y0) * k as f64 / 5.0;
            let ylab = if self.log_y { 10f64.powf(fy) } else { fy };
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                sx(fx),
                MARGIN_TOP + plot_h + 18.0,
                tick(fx)
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                MARGIN_LEFT - 6.0,
                sy(fy) + 4.0,
                tick(ylab)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            MARGIN_LEFT + plot_w / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            MARGIN_TOP + plot_h / 2.0,
            MARGIN_TOP + plot_h / 2.0,
            escape(&self.y_label)
        );

        for (idx, s) in self.series.iter().enumerate() {
            let color = if s.bold { "black" } else { PALETTE[idx % PALETTE.len()] };
            let width = if s.bold { 3.0 } else { 1.0 };
            let mut d = String::new();
            let mut pen_down = false;
            for &(x, y) in &s.points {
                match self.transform_y(y) {
                    Some(ty) if ty >= y0 && ty <= y1 && x.is_finite() => {
                        let _ = write!(d, "{}{:.2},{:.2} ", if pen_down { "L" } else { "M" }, sx(x), sy(ty));
                        pen_down = true;
                    }
                    _ => pen_down = false,
                }
            }
            if !d.is_empty() {
                let _ = writeln!(
                    out,
                    r#"<path d="{}" fill="none" stroke="{color}" stroke-width="{width}"><title>{}</title></path>"#,
                    d.trim_end(),
                    escape(&s.label)
                );
            }
            if self.legend {
                let ly = MARGIN_TOP + 10.0 + 14.0 * idx as f64;
                let lx = WIDTH - MARGIN_RIGHT + 10.0;
                let _ = writeln!(
                    out,
                    r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="{width}"/><text x="{}" y="{}" font-size="10">{}</text>"#,
                    lx + 18.0,
                    lx + 22.0,
                    ly + 3.0,
                    escape(&s.label)
                );
            }
        }

        for r in &self.reference_lines {
            if let Some(ty) = self.transform_y(r.y).filter(|ty| *ty >= y0 && *ty <= y1) {
                let _ = writeln!(
                    out,
                    r#"<line x1="{MARGIN_LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="red" stroke-width="1.5"/><text x="{:.2}" y="{:.2}" fill="red">{}</text>"#,
                    MARGIN_LEFT + plot_w,
                    MARGIN_LEFT + plot_w - 4.0,
                    sy(ty) - 4.0,
                    escape(&r.label),
                    y = sy(ty)
                );
            }
        }
        out.push_str("</svg>\n");
        out
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.2}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Tag-balance check; enough to catch broken nesting and stray `<`/`&`.
    pub fn assert_well_formed(svg: &str) {
        let body = svg.trim_start();
        let body = match body.strip_prefix("<?xml") {
            Some(rest) => &rest[rest.find("?>").expect("unterminated declaration") + 2..],
            None => body,
        };
        let mut stack: Vec<String> = Vec::new();
        let mut rest = body;
        while let Some(start) = rest.find('<') {
            let text = &rest[..start];
            assert!(!text.contains('>'), "stray `>` in text");
            for (i, _) in text.match_indices('&') {
                let ent = &text[i..];
                assert!(
                    ["&amp;", "&lt;", "&gt;", "&quot;", "&apos;"]
                        .iter()
                        .any(|e| ent.starts_with(e)),
                    "bare ampersand"
                );
            }
            let end = rest[start..].find('>').expect("unterminated tag") + start;
            let tag = &rest[start + 1..end];
            if let Some(name) = tag.strip_prefix('/') {
                assert_eq!(stack.pop().as_deref(), Some(name.trim()), "mismatched close tag");
            } else if !tag.ends_with('/') {
                let name = tag.split_whitespace().next().expect("empty tag");
                stack.push(name.to_string());
            }
            rest = &rest[end + 1..];
        }
        assert!(stack.is_empty(), "unclosed tags: {stack:?}");
        assert!(body.trim_start().starts_with("<svg"));
    }

    #[test]
    fn chart_is_well_formed() {
        let chart = LineChart {
            title: "errors <&> \"test\"".into(),
            x_label: "N".into(),
            y_label: "error".into(),
            series: vec![
                Series {
                    label: "a & b".into(),
                    points: vec![(1.0, 10.0), (2.0, f64::NAN), (3.0, 3.2)],
                    bold: false,
                },
                Series {
                    label: "AGG".into(),
                    points: vec![(1.0, 8.0), (2.0, 4.0), (3.0, 3.2)],
                    bold: true,
                },
            ],
            reference_lines: vec![ReferenceLine {
                y: std::f64::consts::PI,
                label: "3.14".into(),
            }],
            log_y: true,
            legend: true,
            ..LineChart::default()
        };
        let svg = chart.render();
        assert_well_formed(&svg);
        assert!(svg.contains("3.14"));
        assert!(svg.contains("stroke-width=\"3\""));
        assert!(!svg.contains("<image"));
    }

    #[test]
    fn empty_chart_renders() {
        assert_well_formed(&LineChart::default().render());
    }
}
