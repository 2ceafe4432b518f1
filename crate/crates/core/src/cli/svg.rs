//! Minimal deterministic SVG plots: no timestamps, fixed number formatting.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Frame {
        let range = |it: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = it
                .filter(|v| v.is_finite())
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if hi - lo < 1e-12 * hi.abs().max(1.0) {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo, hi)
            }
        };
        let (x0, x1) = range(&mut xs.clone());
        let (y0, y1) = range(&mut ys.clone());
        Frame { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn header(out: &mut String, title: &str, frame: &Frame, x_label: &str, y_label: &str) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n\
         <rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"black\"/>\n\
         <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
        WIDTH / 2.0,
        escape(title),
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(x_label),
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label),
    );
    for (v, anchor, x, y) in [
        (frame.x0, "start", MARGIN, HEIGHT - MARGIN + 16.0),
        (frame.x1, "end", WIDTH - MARGIN, HEIGHT - MARGIN + 16.0),
        (frame.y0, "end", MARGIN - 4.0, HEIGHT - MARGIN),
        (frame.y1, "end", MARGIN - 4.0, MARGIN + 10.0),
    ] {
        let _ = writeln!(out, "<text x=\"{x:.1}\" y=\"{y:.1}\" text-anchor=\"{anchor}\">{v:.4}</text>");
    }
}

/// Polyline through `(xs[i], ys[i])`; non-finite points are dropped.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, xs: &[f64], ys: &[f64]) -> String {
    let frame = Frame::fit(xs.iter().copied(), ys.iter().copied());
    let mut out = String::new();
    header(&mut out, title, &frame, x_label, y_label);
    let points: Vec<String> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(&x, &y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
        .collect();
    let _ = writeln!(
        out,
        "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"{}\"/>",
        points.join(" ")
    );
    out.push_str("</svg>\n");
    out
}

/// Eigenvalues in the complex plane with circles of the given radii.
pub fn eigen_scatter(title: &str, points: &[(f64, f64)], circles: &[(f64, &str)]) -> String {
    let reach = points
        .iter()
        .map(|(a, b)| a.hypot(*b))
        .chain(circles.iter().map(|c| c.0))
        .filter(|v| v.is_finite())
        .fold(1.0f64, f64::max)
        * 1.05;
    let frame = Frame {
        x0: -reach,
        x1: reach,
        y0: -reach,
        y1: reach,
    };
    let mut out = String::new();
    header(&mut out, title, &frame, "Re", "Im");
    let scale = (HEIGHT - 2.0 * MARGIN) / (2.0 * reach);
    for &(radius, colour) in circles {
        if radius.is_finite() && radius > 0.0 {
            let _ = writeln!(
                out,
                "<ellipse cx=\"{:.2}\" cy=\"{:.2}\" rx=\"{:.2}\" ry=\"{:.2}\" fill=\"none\" stroke=\"{colour}\" stroke-dasharray=\"4 3\"/>",
                frame.px(0.0),
                frame.py(0.0),
                radius * (WIDTH - 2.0 * MARGIN) / (2.0 * reach),
                radius * scale
            );
        }
    }
    for &(re, im) in points {
        let _ = writeln!(
            out,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"firebrick\"/>",
            frame.px(re),
            frame.py(im)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plots_are_well_formed_and_deterministic() {
        let a = line_plot("t<1>", "x", "y", &[0.0, 1.0, 2.0], &[1.0, f64::NAN, 3.0]);
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert!(a.contains("t&lt;1&gt;"));
        assert_eq!(a, line_plot("t<1>", "x", "y", &[0.0, 1.0, 2.0], &[1.0, f64::NAN, 3.0]));
        let s = eigen_scatter("spec", &[(1.0, 0.0), (0.1, 0.2)], &[(0.7, "gray")]);
        assert_eq!(s.matches("<circle").count(), 2);
        assert_eq!(s.matches("<ellipse").count(), 1);
    }
}
