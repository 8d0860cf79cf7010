//! Static SVG histograms with an optional reference-density overlay.

use std::fmt::Write as _;

use scalelab::stats::ReferenceDensity;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 48.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Density-scaled histogram of `values`; the reference pdf, if any, is
/// drawn over it on the same scale.
pub fn histogram(title: &str, values: &[f64], reference: Option<ReferenceDensity>) -> String {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let mut s = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    )
    .unwrap();
    writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>").unwrap();
    writeln!(
        s,
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>",
        WIDTH / 2.0,
        escape(title)
    )
    .unwrap();
    if finite.is_empty() {
        s.push_str("</svg>\n");
        return s;
    }
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min).min(0.0);
    let mut hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if let Some(r) = reference {
        hi = hi.max(r.upper().min(hi * 1.5));
    }
    if hi <= lo {
        hi = lo + 1.0;
    }
    let bins = ((finite.len() as f64).sqrt().ceil() as usize).clamp(5, 60);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for v in &finite {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let scale = 1.0 / (finite.len() as f64 * width);
    let dens: Vec<f64> = counts.iter().map(|&c| c as f64 * scale).collect();
    let curve: Vec<(f64, f64)> = match reference {
        Some(r) => (0..=200).map(|i| lo + (hi - lo) * i as f64 / 200.0).map(|x| (x, r.pdf(x))).collect(),
        None => Vec::new(),
    };
    let top = dens
        .iter()
        .copied()
        .chain(curve.iter().map(|p| p.1).filter(|y| y.is_finite()))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let px = |x: f64| MARGIN + (x - lo) / (hi - lo) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - y / top * (HEIGHT - 2.0 * MARGIN);
    for (i, d) in dens.iter().enumerate() {
        let x0 = px(lo + i as f64 * width);
        let x1 = px(lo + (i + 1) as f64 * width);
        writeln!(
            s,
            "<rect x=\"{x0:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#9ecae1\" stroke=\"#3182bd\" stroke-width=\"0.5\"/>",
            py(*d),
            x1 - x0,
            py(0.0) - py(*d)
        )
        .unwrap();
    }
    if let Some(r) = reference {
        let pts: Vec<String> = curve
            .iter()
            .filter(|p| p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        writeln!(s, "<polyline points=\"{}\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\"/>", pts.join(" ")).unwrap();
        writeln!(
            s,
            "<text x=\"{}\" y=\"44\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#d62728\" text-anchor=\"end\">{}</text>",
            WIDTH - MARGIN,
            escape(&r.name())
        )
        .unwrap();
    }
    let axis_y = py(0.0);
    writeln!(
        s,
        "<line x1=\"{MARGIN}\" y1=\"{axis_y:.2}\" x2=\"{}\" y2=\"{axis_y:.2}\" stroke=\"black\"/>",
        WIDTH - MARGIN
    )
    .unwrap();
    writeln!(s, "<line x1=\"{MARGIN}\" y1=\"{MARGIN}\" x2=\"{MARGIN}\" y2=\"{axis_y:.2}\" stroke=\"black\"/>").unwrap();
    for (x, anchor) in [(lo, "start"), (hi, "end")] {
        writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"{anchor}\">{x:.3}</text>",
            px(x),
            axis_y + 16.0
        )
        .unwrap();
    }
    writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{top:.3}</text>",
        MARGIN - 4.0,
        py(top) + 4.0
    )
    .unwrap();
    s.push_str("</svg>\n");
    s
}
