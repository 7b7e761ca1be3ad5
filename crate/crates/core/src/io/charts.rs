//! Self-contained SVG line charts for run reports: one polyline per named
//! series on a padded linear plot with axis ticks and a legend.

use crate::error::{CalibError, Result};
use std::fmt::Write as _;

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 560.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 425.0;
const TICKS: usize = 5;

const PALETTE: [&str; 9] = [
    "#1b6ca8", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
    "#555555",
];

fn escape_xml(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn fmt_tick(v: f64) -> String {
    let mut s = format!("{v:.4}");
    while s.contains('.') && s.ends_with('0') {
        s.pop();
    }
    if s.ends_with('.') {
        s.pop();
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

/// Value range padded so lines do not hug the frame; a flat range still
/// opens up to something drawable.
fn padded_range(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = (hi - lo) * 0.05;
        (lo - pad, hi + pad)
    } else {
        let pad = if lo == 0.0 { 0.5 } else { lo.abs() * 0.05 };
        (lo - pad, hi + pad)
    }
}

/// Render a line chart. Every point must be finite and every series
/// nonempty.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> Result<String> {
    if series.is_empty() || series.iter().any(|s| s.points.is_empty()) {
        return Err(CalibError::Domain(
            "chart needs at least one nonempty series".to_string(),
        ));
    }
    let mut xs = (f64::INFINITY, f64::NEG_INFINITY);
    let mut ys = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for &(x, y) in &s.points {
            if !(x.is_finite() && y.is_finite()) {
                return Err(CalibError::Domain(format!(
                    "chart series '{}' has a non-finite point",
                    s.name
                )));
            }
            xs = (xs.0.min(x), xs.1.max(x));
            ys = (ys.0.min(y), ys.1.max(y));
        }
    }
    let (x_lo, x_hi) = padded_range(xs.0, xs.1);
    let (y_lo, y_hi) = padded_range(ys.0, ys.1);
    let px = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * (RIGHT - LEFT);
    let py = |y: f64| TOP + (y_hi - y) / (y_hi - y_lo) * (BOTTOM - TOP);

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"13\">\n\
         <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"26\" text-anchor=\"middle\" font-size=\"17\">{}</text>\n",
        (LEFT + RIGHT) / 2.0,
        escape_xml(title)
    );

    // frame, ticks, grid
    let _ = write!(
        svg,
        "<rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{}\" height=\"{}\" fill=\"none\" \
         stroke=\"#333333\" stroke-width=\"1\"/>\n",
        RIGHT - LEFT,
        BOTTOM - TOP
    );
    for i in 0..TICKS {
        let f = i as f64 / (TICKS - 1) as f64;
        let xv = x_lo + f * (x_hi - x_lo);
        let yv = y_lo + f * (y_hi - y_lo);
        let (xp, yp) = (px(xv), py(yv));
        let _ = write!(
            svg,
            "<line x1=\"{xp}\" y1=\"{TOP}\" x2=\"{xp}\" y2=\"{BOTTOM}\" stroke=\"#dddddd\" stroke-width=\"0.7\"/>\n\
             <line x1=\"{LEFT}\" y1=\"{yp}\" x2=\"{RIGHT}\" y2=\"{yp}\" stroke=\"#dddddd\" stroke-width=\"0.7\"/>\n\
             <text x=\"{xp}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n\
             <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            BOTTOM + 18.0,
            fmt_tick(xv),
            LEFT - 8.0,
            yp + 4.0,
            fmt_tick(yv),
        );
    }
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"18\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>\n",
        (LEFT + RIGHT) / 2.0,
        BOTTOM + 42.0,
        escape_xml(x_label),
        (TOP + BOTTOM) / 2.0,
        (TOP + BOTTOM) / 2.0,
        escape_xml(y_label),
    );

    // series lines, points, legend
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let coords: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = write!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n",
            coords.join(" ")
        );
        for &(x, y) in &s.points {
            let _ = write!(
                svg,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{color}\"/>\n",
                px(x),
                py(y)
            );
        }
        let ly = TOP + 14.0 + k as f64 * 19.0;
        let _ = write!(
            svg,
            "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2.5\"/>\n\
             <text x=\"{}\" y=\"{}\">{}</text>\n",
            RIGHT + 14.0,
            RIGHT + 40.0,
            RIGHT + 46.0,
            ly + 4.0,
            escape_xml(&s.name)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<Series> {
        vec![
            Series {
                name: "platt".to_string(),
                points: vec![(1.0, 0.5), (2.0, 0.25), (3.0, 0.125)],
            },
            Series {
                name: "bin<10> & \"friends\"".to_string(),
                points: vec![(1.0, 0.6), (2.0, 0.4), (3.0, 0.3)],
            },
        ]
    }

    #[test]
    fn chart_has_a_line_and_legend_entry_per_series() {
        let svg = line_chart("RMSE by size", "log2(n)", "mean RMSE", &sample()).unwrap();
        assert!(svg.starts_with("<svg "));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 6);
        assert!(svg.contains("RMSE by size"));
        assert!(svg.contains("log2(n)"));
    }

    #[test]
    fn markup_characters_in_names_are_escaped() {
        let svg = line_chart("a<b>&c", "x", "y", &sample()).unwrap();
        assert!(svg.contains("a&lt;b&gt;&amp;c"));
        assert!(svg.contains("bin&lt;10&gt; &amp; &quot;friends&quot;"));
        assert!(!svg.contains("bin<10>"));
    }

    #[test]
    fn flat_series_still_renders() {
        let flat = vec![Series { name: "const".into(), points: vec![(1.0, 0.5), (2.0, 0.5)] }];
        let svg = line_chart("flat", "x", "y", &flat).unwrap();
        assert!(svg.contains("<polyline"));
    }

    #[test]
    fn empty_or_non_finite_input_is_rejected() {
        assert!(line_chart("t", "x", "y", &[]).is_err());
        let empty = vec![Series { name: "e".into(), points: vec![] }];
        assert!(line_chart("t", "x", "y", &empty).is_err());
        let bad = vec![Series { name: "b".into(), points: vec![(0.0, f64::NAN)] }];
        assert!(line_chart("t", "x", "y", &bad).is_err());
    }

    #[test]
    fn tick_labels_are_trimmed() {
        assert_eq!(fmt_tick(0.25), "0.25");
        assert_eq!(fmt_tick(3.0), "3");
        assert_eq!(fmt_tick(-0.00001), "0");
        assert_eq!(fmt_tick(0.333333), "0.3333");
    }
}
