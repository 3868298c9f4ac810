//! SVG rendering of one-dimensional kernel frameworks.
//!
//! Edge styling follows the stress sign: negative omega drawn thick,
//! positive omega dashed, zero omega as a thin green line.  Vertices get
//! a per-identity vertical jitter so collinear frameworks stay legible,
//! with the color code dark red (u1), bright red (u2), dark blue (v1),
//! bright blue (v2).  No timestamps or other run metadata are embedded.

use crate::k22::SweepFrame;

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 160.0;
const MARGIN: f64 = 40.0;
const JITTER: f64 = 18.0;

const VERTEX_COLORS: [&str; 4] = ["#8b0000", "#ff3030", "#00008b", "#1e90ff"];
const VERTEX_NAMES: [&str; 4] = ["u1", "u2", "v1", "v2"];

fn coords(frame: &SweepFrame) -> Vec<(f64, f64)> {
    let min = frame
        .kernel_positions
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let max = frame
        .kernel_positions
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let span = (max - min).max(1e-9);
    frame
        .kernel_positions
        .iter()
        .enumerate()
        .map(|(v, &x)| {
            let sx = MARGIN + (x - min) / span * (WIDTH - 2.0 * MARGIN);
            let sy = HEIGHT / 2.0 + (v as f64 - 1.5) * JITTER;
            (sx, sy)
        })
        .collect()
}

pub fn render_frame(frame: &SweepFrame) -> String {
    let pts = coords(frame);
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
         width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str(&format!(
        "  <title>theta = {:.6} (frame {})</title>\n",
        frame.theta, frame.index
    ));
    for (key, style) in &frame.edge_styles {
        let mut split = key.split('-');
        let i: usize = split.next().unwrap().parse().unwrap();
        let j: usize = split.next().unwrap().parse().unwrap();
        let (x1, y1) = pts[i];
        let (x2, y2) = pts[j];
        let attrs = match style.as_str() {
            "thick" => "stroke=\"#222222\" stroke-width=\"5\"",
            "dashed" => "stroke=\"#222222\" stroke-width=\"2\" stroke-dasharray=\"7 5\"",
            _ => "stroke=\"#2e8b57\" stroke-width=\"1\"",
        };
        out.push_str(&format!(
            "  <line x1=\"{x1:.3}\" y1=\"{y1:.3}\" x2=\"{x2:.3}\" y2=\"{y2:.3}\" {attrs}/>\n"
        ));
    }
    for (v, &(x, y)) in pts.iter().enumerate() {
        out.push_str(&format!(
            "  <circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"6\" fill=\"{}\"/>\n",
            VERTEX_COLORS[v]
        ));
        out.push_str(&format!(
            "  <text x=\"{:.3}\" y=\"{:.3}\" font-size=\"11\" fill=\"#333333\">{}</text>\n",
            x + 8.0,
            y - 8.0,
            VERTEX_NAMES[v]
        ));
    }
    if frame.degenerate {
        out.push_str(&format!(
            "  <text x=\"{MARGIN}\" y=\"18\" font-size=\"12\" fill=\"#aa0000\">degenerate: {} (stress rank {})</text>\n",
            frame.degenerate_reasons.join("; "),
            frame.stress_rank
        ));
    }
    out.push_str("</svg>\n");
    out
}
