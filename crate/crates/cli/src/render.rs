//! Minimal SVG 1.1 rendering of plot documents.
//!
//! Output bytes depend only on the document content (the timestamp is not
//! drawn), so rendering is deterministic.

use std::fmt::Write as _;

use resaudit_core::data::{CurveKind, CurveSeries};

use crate::document::PlotDataDocument;
use crate::error::CliResult;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 48.0;
const TICKS: usize = 5;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const DASHES: [&str; 3] = ["", "6 3", "2 2"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn fmt(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" {
            "0".into()
        } else {
            s.into()
        }
    }
}

/// Whether a series is drawn as markers rather than a polyline.
fn is_scatter(s: &CurveSeries) -> bool {
    match s.group.as_deref() {
        Some("smooth") | Some("reference") | Some("density") | Some("loadings") => return false,
        Some("scores") => return true,
        _ => {}
    }
    matches!(
        s.kind,
        CurveKind::Residual
            | CurveKind::Autocorrelation
            | CurveKind::Correlation
            | CurveKind::CooksDistance
            | CurveKind::ScaleLocation
            | CurveKind::Performance
            | CurveKind::HalfNormal
    )
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn bounds(series: &[CurveSeries]) -> Frame {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in series {
        for p in &s.points {
            if p.x.is_finite() && p.y.is_finite() {
                xs.push(p.x);
                ys.push(p.y);
            }
        }
        for key in ["env_lo", "env_hi"] {
            if let Some(v) = s.aux.get(key) {
                ys.extend(v.iter().copied().filter(|v| v.is_finite()));
            }
        }
    }
    let range = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi - lo <= 0.0 {
            (lo - 0.5, hi + 0.5)
        } else {
            let pad = (hi - lo) * 0.04;
            (lo - pad, hi + pad)
        }
    };
    let (x0, x1) = range(&xs);
    let (y0, y1) = range(&ys);
    Frame { x0, x1, y0, y1 }
}

fn polyline(out: &mut String, f: &Frame, xs: &[f64], ys: &[f64], color: &str, dash: &str) {
    let pts: Vec<String> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(&x, &y)| format!("{},{}", fmt(f.px(x)), fmt(f.py(y))))
        .collect();
    if pts.is_empty() {
        return;
    }
    let dash = if dash.is_empty() {
        String::new()
    } else {
        format!(" stroke-dasharray=\"{dash}\"")
    };
    let _ = writeln!(
        out,
        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash} points=\"{}\"/>",
        pts.join(" ")
    );
}

/// Renders a document to an SVG string.
pub fn render_svg(doc: &PlotDataDocument) -> CliResult<String> {
    let kind = doc.kind()?;
    let f = bounds(&doc.series);
    let mut out = String::new();
    let _ = writeln!(out, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(
        out,
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"22\" font-family=\"sans-serif\" font-size=\"14\">{}</text>",
        fmt(LEFT),
        escape(kind.id())
    );

    // Axes and ticks.
    let (ax0, ax1, ay0, ay1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    let _ = writeln!(out, "<g stroke=\"black\" stroke-width=\"1\">");
    let _ = writeln!(
        out,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>",
        fmt(ax0),
        fmt(ay0),
        fmt(ax1),
        fmt(ay0)
    );
    let _ = writeln!(
        out,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>",
        fmt(ax0),
        fmt(ay0),
        fmt(ax0),
        fmt(ay1)
    );
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "<g font-family=\"sans-serif\" font-size=\"10\">");
    for k in 0..=TICKS {
        let t = k as f64 / TICKS as f64;
        let xv = f.x0 + t * (f.x1 - f.x0);
        let yv = f.y0 + t * (f.y1 - f.y0);
        let (px, py) = (f.px(xv), f.py(yv));
        let _ = writeln!(
            out,
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/><text x=\"{0}\" y=\"{3}\" text-anchor=\"middle\">{4}</text>",
            fmt(px),
            fmt(ay0),
            fmt(ay0 + 4.0),
            fmt(ay0 + 16.0),
            tick_label(xv)
        );
        let _ = writeln!(
            out,
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/><text x=\"{3}\" y=\"{4}\" text-anchor=\"end\">{5}</text>",
            fmt(ax0 - 4.0),
            fmt(py),
            fmt(ax0),
            fmt(ax0 - 6.0),
            fmt(py + 3.0),
            tick_label(yv)
        );
    }
    let _ = writeln!(out, "</g>");

    // Series: colour by label, dash by group.
    let mut labels: Vec<&str> = Vec::new();
    let mut groups: Vec<Option<&str>> = Vec::new();
    for s in &doc.series {
        if !labels.contains(&s.label.as_str()) {
            labels.push(&s.label);
        }
        if !groups.contains(&s.group.as_deref()) {
            groups.push(s.group.as_deref());
        }
    }
    for s in &doc.series {
        let li = labels.iter().position(|l| *l == s.label).unwrap_or(0);
        let gi = groups
            .iter()
            .position(|g| *g == s.group.as_deref())
            .unwrap_or(0);
        let color = PALETTE[li % PALETTE.len()];
        let dash = DASHES[gi % DASHES.len()];
        let _ = writeln!(out, "<g data-label=\"{}\">", escape(&s.label));
        if is_scatter(s) {
            for p in s
                .points
                .iter()
                .filter(|p| p.x.is_finite() && p.y.is_finite())
            {
                let _ = writeln!(
                    out,
                    "<circle cx=\"{}\" cy=\"{}\" r=\"2\" fill=\"{color}\" fill-opacity=\"0.7\"/>",
                    fmt(f.px(p.x)),
                    fmt(f.py(p.y))
                );
            }
        } else {
            polyline(&mut out, &f, &s.xs(), &s.ys(), color, dash);
        }
        for key in ["env_lo", "env_hi"] {
            if let Some(v) = s.aux.get(key) {
                polyline(&mut out, &f, &s.xs(), v, "#7f7f7f", "4 2");
            }
        }
        let _ = writeln!(out, "</g>");
    }

    // Legend.
    let _ = writeln!(out, "<g font-family=\"sans-serif\" font-size=\"11\">");
    for (i, l) in labels.iter().enumerate() {
        let y = TOP + 14.0 + 16.0 * i as f64;
        let x = WIDTH - RIGHT + 14.0;
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/><text x=\"{}\" y=\"{}\">{}</text>",
            fmt(x),
            fmt(y - 9.0),
            PALETTE[i % PALETTE.len()],
            fmt(x + 14.0),
            fmt(y),
            escape(l)
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "</svg>");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::Metadata;
    use resaudit_core::data::Point;

    fn doc(series: Vec<CurveSeries>) -> PlotDataDocument {
        PlotDataDocument::new(CurveKind::Rec, series, None, Metadata::default())
    }

    #[test]
    fn empty_document_has_axes_only() {
        let svg = render_svg(&doc(vec![])).unwrap();
        assert!(svg.starts_with("<?xml"));
        assert!(svg.contains("<line"));
        assert!(!svg.contains("<polyline"));
        assert!(!svg.contains("<circle"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn rec_polyline_is_monotone() {
        let s = CurveSeries::new(
            CurveKind::Rec,
            "a<b",
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.5),
                Point::new(2.0, 1.0),
            ],
        );
        let svg = render_svg(&doc(vec![s])).unwrap();
        assert!(svg.contains("a&lt;b"));
        let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let pts = line
            .split("points=\"")
            .nth(1)
            .unwrap()
            .trim_end_matches("\"/>");
        let coords: Vec<(f64, f64)> = pts
            .split(' ')
            .map(|p| {
                let (x, y) = p.split_once(',').unwrap();
                (x.parse().unwrap(), y.parse().unwrap())
            })
            .collect();
        // SVG y grows downwards.
        assert!(coords
            .windows(2)
            .all(|w| w[0].0 <= w[1].0 && w[0].1 >= w[1].1));
        assert_eq!(
            render_svg(&doc(vec![])).unwrap(),
            render_svg(&doc(vec![])).unwrap()
        );
    }

    #[test]
    fn non_finite_points_skipped() {
        let s = CurveSeries::new(
            CurveKind::CooksDistance,
            "m",
            vec![Point::new(0.0, 1.0), Point::new(1.0, f64::INFINITY)],
        );
        let svg = render_svg(&PlotDataDocument::new(
            CurveKind::CooksDistance,
            vec![s],
            None,
            Metadata::default(),
        ))
        .unwrap();
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(!svg.contains("inf") && !svg.contains("NaN"));
    }
}
