//! Minimal SVG line charts.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#7f7f7f"];

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

pub struct Chart<'a> {
    pub title: &'a str,
    pub log_y: bool,
    pub series: Vec<Series<'a>>,
}

impl Chart<'_> {
    pub fn render(&self) -> String {
        let map_y = |y: f64| if self.log_y { y.max(1e-300).log10() } else { y };
        let pts = self
            .series
            .iter()
            .flat_map(|s| s.points.iter())
            .filter(|(x, y)| x.is_finite() && y.is_finite() && (!self.log_y || *y > 0.0));
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for &(x, y) in pts {
            let y = map_y(y);
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if x0 > x1 {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 == x0 {
            x1 = x0 + 1.0;
        }
        if y1 == y0 {
            y0 -= 0.5;
            y1 += 0.5;
        }
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
        let sy = |y: f64| HEIGHT - MARGIN - (map_y(y) - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

        let mut svg = String::new();
        writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
        writeln!(svg, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, WIDTH / 2.0, self.title).unwrap();
        writeln!(
            svg,
            r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            WIDTH - 2.0 * MARGIN,
            HEIGHT - 2.0 * MARGIN
        )
        .unwrap();
        let y_label = |v: f64| if self.log_y { format!("1e{v:.0}") } else { format!("{v:.3}") };
        writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, MARGIN - 4.0, HEIGHT - MARGIN, y_label(y0)).unwrap();
        writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, MARGIN - 4.0, MARGIN + 10.0, y_label(y1)).unwrap();
        writeln!(svg, r#"<text x="{MARGIN}" y="{}">{x0}</text>"#, HEIGHT - MARGIN + 16.0).unwrap();
        writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{x1}</text>"#, WIDTH - MARGIN, HEIGHT - MARGIN + 16.0).unwrap();

        for (i, s) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let path: Vec<String> = s
                .points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite() && (!self.log_y || *y > 0.0))
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                path.join(" ")
            )
            .unwrap();
            writeln!(
                svg,
                r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
                WIDTH - MARGIN - 150.0,
                MARGIN + 16.0 * (i as f64 + 1.0),
                s.label
            )
            .unwrap();
        }
        svg.push_str("</svg>\n");
        svg
    }
}

/// Keeps at most `max` evenly spaced points, always including the last.
pub fn thin(points: Vec<(f64, f64)>, max: usize) -> Vec<(f64, f64)> {
    if points.len() <= max {
        return points;
    }
    let stride = points.len().div_ceil(max);
    let last = *points.last().unwrap();
    let mut out: Vec<_> = points.into_iter().step_by(stride).collect();
    if out.last() != Some(&last) {
        out.push(last);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_every_series() {
        let chart = Chart {
            title: "E(t)",
            log_y: true,
            series: vec![
                Series { label: "E", points: vec![(0.0, 1.0), (1.0, 0.1)] },
                Series { label: "bound", points: vec![(0.0, 1.0), (1.0, 0.0)] },
            ],
        };
        let svg = chart.render();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn thinning_keeps_ends() {
        let pts: Vec<_> = (0..1001).map(|i| (i as f64, 0.0)).collect();
        let t = thin(pts, 100);
        assert!(t.len() <= 102);
        assert_eq!(t[0].0, 0.0);
        assert_eq!(t.last().unwrap().0, 1000.0);
    }
}
