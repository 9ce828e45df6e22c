//! Static SVG strip charts: one small panel per metric, models along the
//! horizontal axis, a polyline with point markers, each panel scaled to its
//! own value range.

use std::fmt::Write;

pub struct Panel {
    pub title: String,
    /// One value per category; NaN values are skipped.
    pub values: Vec<f64>,
}

const PANEL_W: f64 = 220.0;
const PANEL_H: f64 = 160.0;
const MARGIN_L: f64 = 52.0;
const MARGIN_R: f64 = 12.0;
const MARGIN_T: f64 = 26.0;
const MARGIN_B: f64 = 34.0;
const COLUMNS: usize = 4;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn label(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 0.01 && v.abs() < 1e4) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

/// Renders `panels` in a grid under `title`. `categories` label the
/// horizontal positions shared by all panels.
pub fn strip_chart(title: &str, categories: &[String], panels: &[Panel]) -> String {
    let rows = panels.len().div_ceil(COLUMNS).max(1);
    let width = COLUMNS as f64 * PANEL_W;
    let height = 30.0 + rows as f64 * PANEL_H;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="10">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="18" text-anchor="middle" font-size="13">{}</text>"#,
        width / 2.0,
        escape(title)
    );

    for (p, panel) in panels.iter().enumerate() {
        let ox = (p % COLUMNS) as f64 * PANEL_W;
        let oy = 30.0 + (p / COLUMNS) as f64 * PANEL_H;
        let (x0, x1) = (ox + MARGIN_L, ox + PANEL_W - MARGIN_R);
        let (y0, y1) = (oy + MARGIN_T, oy + PANEL_H - MARGIN_B);

        let finite: Vec<f64> = panel
            .values
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .collect();
        let mut lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
        let mut hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if finite.is_empty() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo <= 1e-12 * hi.abs().max(1.0) {
            let pad = 0.05 * hi.abs().max(1e-3);
            lo -= pad;
            hi += pad;
        }
        let n = categories.len().max(1);
        let px = |i: usize| x0 + (x1 - x0) * (i as f64 + 0.5) / n as f64;
        let py = |v: f64| y1 - (y1 - y0) * (v - lo) / (hi - lo);

        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="11">{}</text>"#,
            (x0 + x1) / 2.0,
            oy + 16.0,
            escape(&panel.title)
        );
        let _ = writeln!(
            s,
            r#"<path d="M{x0} {y0} L{x0} {y1} L{x1} {y1}" fill="none" stroke="black" stroke-width="1"/>"#
        );
        for v in [lo, hi] {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
                x0 - 4.0,
                py(v) + 3.0,
                label(v)
            );
        }
        for (i, c) in categories.iter().enumerate() {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
                px(i),
                y1 + 14.0,
                escape(c)
            );
        }
        let points: Vec<String> = panel
            .values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .map(|(i, &v)| format!("{:.2},{:.2}", px(i), py(v)))
            .collect();
        if points.len() > 1 {
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#,
                points.join(" ")
            );
        }
        for pt in &points {
            let (cx, cy) = pt.split_once(',').unwrap();
            let _ = writeln!(s, r#"<circle cx="{cx}" cy="{cy}" r="3" fill="steelblue"/>"#);
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_has_one_polyline_per_panel() {
        let cats: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let panels = vec![
            Panel {
                title: "RMSE".into(),
                values: vec![1.0, 2.0, 1.5],
            },
            Panel {
                title: "PC <const>".into(),
                values: vec![3.0, 3.0, 3.0],
            },
        ];
        let svg = strip_chart("t", &cats, &panels);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 6);
        assert!(svg.contains("PC &lt;const&gt;"));
        assert!(!svg.contains("NaN"));
    }
}
