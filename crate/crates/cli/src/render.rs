//! CSV tables and SVG plots of a run report.

use std::fmt::Write;

use serde_json::Value;
use topodyn::conditions::PlotData;

use crate::run::RunReport;

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                flatten(&format!("{prefix}.{k}"), x, out);
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), x, out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Null => {}
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

/// One row per number: `check, condition, verdict, quantity, value`.
pub fn to_csv(report: &RunReport) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["check", "condition", "verdict", "quantity", "value"])?;
    for (i, r) in report.checks.iter().enumerate() {
        let mut rows = Vec::new();
        flatten("expected", &r.expected, &mut rows);
        flatten("observed", &r.observed, &mut rows);
        for e in &r.evidence {
            for (j, x) in e.values.iter().enumerate() {
                rows.push((format!("evidence.{}.{j}", e.label), x.to_string()));
            }
        }
        rows.push(("runtime_ms".into(), r.runtime_ms.to_string()));
        let idx = (i + 1).to_string();
        for (q, v) in rows {
            w.write_record([idx.as_str(), r.condition.as_str(), r.verdict.as_str(), q.as_str(), v.as_str()])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Total turning of a closed planar curve, in turns.
pub fn winding(points: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    for i in 0..points.len() {
        let (a, b) = (&points[i], &points[(i + 1) % points.len()]);
        total += (a[0] * b[1] - a[1] * b[0]).atan2(a[0] * b[0] + a[1] * b[1]);
    }
    total / (2.0 * std::f64::consts::PI)
}

const PANEL: f64 = 300.0;
const COLORS: [&str; 4] = ["#1f5fa8", "#b5482a", "#2f8a4b", "#7a4ab0"];

fn panel(out: &mut String, plot: &PlotData, axes: (usize, usize), x0: f64, spiral: bool) {
    let c = (x0 + PANEL / 2.0, 40.0 + PANEL / 2.0);
    let r = 0.42 * PANEL;
    let _ = writeln!(out, r##"<circle cx="{:.1}" cy="{:.1}" r="{r:.1}" fill="none" stroke="#c8c8c8"/>"##, c.0, c.1);
    let _ = writeln!(
        out,
        r##"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle" fill="#555">x{} / x{}</text>"##,
        c.0,
        40.0 + PANEL + 14.0,
        axes.0 + 1,
        axes.1 + 1
    );
    for (k, curve) in plot.curves.iter().enumerate() {
        let len = curve.points.len().max(1) as f64;
        let mut pts = String::new();
        let closing = if curve.closed { curve.points.first() } else { None };
        for (i, p) in curve.points.iter().chain(closing).enumerate() {
            // drift the radius along the curve so repeated turns stay visible
            let s = if spiral { 0.7 + 0.3 * i as f64 / len } else { 1.0 };
            let _ = write!(pts, "{:.2},{:.2} ", c.0 + s * r * p[axes.0], c.1 - s * r * p[axes.1]);
        }
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            pts.trim_end(),
            COLORS[k % COLORS.len()]
        );
    }
    for m in &plot.marks {
        let _ = writeln!(
            out,
            r##"<circle cx="{:.2}" cy="{:.2}" r="2" fill="#d62728"><title>{}</title></circle>"##,
            c.0 + r * m.point[axes.0],
            c.1 - r * m.point[axes.1],
            m.label
        );
    }
}

/// SVG of a Gauss image: the unit circle for `n = 2` (drawn as a slow
/// spiral, annotated with the winding), three coordinate-plane projections
/// for `n = 3`. `None` for other dimensions.
pub fn to_svg(title: &str, plot: &PlotData) -> Option<String> {
    let projections: &[(usize, usize)] = match plot.dimension {
        2 => &[(0, 1)],
        3 => &[(0, 1), (0, 2), (1, 2)],
        _ => return None,
    };
    let width = PANEL * projections.len() as f64;
    let height = PANEL + 80.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="10" y="22" font-size="14" font-family="sans-serif">{}</text>"#, escape(title));
    for (i, &axes) in projections.iter().enumerate() {
        panel(&mut out, plot, axes, i as f64 * PANEL, plot.dimension == 2);
    }
    if plot.dimension == 2 {
        let turns: Vec<String> = plot.curves.iter().map(|c| format!("{:.0}", winding(&c.points))).collect();
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="end" font-family="sans-serif">winding {}</text>"#,
            width - 10.0,
            22.0,
            turns.join(", ")
        );
    }
    if !plot.marks.is_empty() {
        let _ = writeln!(
            out,
            r##"<text x="10" y="{:.1}" font-size="12" font-family="sans-serif" fill="#d62728">{} hyperplane crossings</text>"##,
            height - 8.0,
            plot.marks.len()
        );
    }
    out.push_str("</svg>\n");
    Some(out)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use topodyn::conditions::GaussCurve;

    #[test]
    fn winding_of_double_circle() {
        let pts: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let t = 4.0 * std::f64::consts::PI * i as f64 / 40.0;
                vec![t.cos(), t.sin()]
            })
            .collect();
        assert!((winding(&pts) - 2.0).abs() < 1e-12);
        let plot = PlotData { dimension: 2, curves: vec![GaussCurve { label: "g".into(), closed: true, points: pts }], marks: vec![] };
        let svg = to_svg("z^2", &plot).unwrap();
        assert!(svg.contains("winding 2"));
        assert!(svg.starts_with("<svg"));
    }

    #[test]
    fn no_svg_in_four_dimensions() {
        assert!(to_svg("x", &PlotData { dimension: 4, ..PlotData::default() }).is_none());
    }
}
