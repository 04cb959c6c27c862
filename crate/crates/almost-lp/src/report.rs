//! Report emission: JSON serialization, CSV trace export, and static
//! SVG trace plots.

use serde::Serialize;

use crate::error::{AlpError, Result};

/// Pretty JSON for any report type.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| AlpError::Invalid(e.to_string()))
}

/// CSV export of one or more named traces sharing an index column.
pub fn traces_csv(traces: &[(String, Vec<(f64, f64)>)]) -> String {
    let mut out = String::from("series,index,value\n");
    for (name, trace) in traces {
        for (x, y) in trace {
            out.push_str(&format!("{name},{x},{y}\n"));
        }
    }
    out
}

/// Minimal static SVG line plot of the given traces.
pub fn traces_svg(title: &str, traces: &[(String, Vec<(f64, f64)>)]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 48.0;
    let points: Vec<(f64, f64)> = traces
        .iter()
        .flat_map(|(_, t)| t.iter().cloned())
        .filter(|&(x, y)| x.is_finite() && y.is_finite())
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if points.is_empty() {
        x0 = 0.0;
        x1 = 1.0;
        y0 = 0.0;
        y1 = 1.0;
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n\
         <line x1=\"{PAD}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n\
         <line x1=\"{PAD}\" y1=\"{PAD}\" x2=\"{PAD}\" y2=\"{}\" stroke=\"black\"/>\n",
        W / 2.0,
        xml_escape(title),
        H - PAD,
        W - PAD,
        H - PAD,
        H - PAD,
    );
    svg.push_str(&format!(
        "<text x=\"{PAD}\" y=\"{}\" font-size=\"10\">{:.3}</text>\n\
         <text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{:.3}</text>\n\
         <text x=\"10\" y=\"{}\" font-size=\"10\">{:.3}</text>\n\
         <text x=\"10\" y=\"{}\" font-size=\"10\">{:.3}</text>\n",
        H - PAD + 14.0,
        x0,
        W - PAD,
        H - PAD + 14.0,
        x1,
        H - PAD,
        y0,
        PAD + 4.0,
        y1,
    ));
    for (i, (name, trace)) in traces.iter().enumerate() {
        let color = colors[i % colors.len()];
        let path: Vec<String> = trace
            .iter()
            .filter(|&&(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        if !path.is_empty() {
            svg.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
                path.join(" ")
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"{color}\">{}</text>\n",
            W - PAD + 4.0,
            PAD + 16.0 * i as f64,
            xml_escape(name)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
