//! Minimal log-x line plot for sweep results.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;

pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

pub struct Measured {
    pub label: String,
    /// `(T, mean, standard error)`
    pub points: Vec<(f64, f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Frame {
    x0: f64,
    x1: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, t: f64) -> f64 {
        let span = self.x1 - self.x0;
        let u = if span > 0.0 { (t.log2() - self.x0) / span } else { 0.5 };
        LEFT + u * (W - LEFT - RIGHT)
    }

    fn py(&self, v: f64) -> f64 {
        let u = if self.y1 > 0.0 { v / self.y1 } else { 0.0 };
        H - BOTTOM - u * (H - TOP - BOTTOM)
    }
}

pub fn plot(title: &str, measured: &Measured, anchors: &[Series]) -> String {
    let xs: Vec<f64> = measured
        .points
        .iter()
        .map(|p| p.0)
        .chain(anchors.iter().flat_map(|s| s.points.iter().map(|p| p.0)))
        .filter(|t| *t > 0.0)
        .collect();
    let (mut x0, mut x1) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| (lo.min(t.log2()), hi.max(t.log2())));
    if !x0.is_finite() {
        x0 = 0.0;
        x1 = 1.0;
    }
    if x1 - x0 < 1e-9 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    let ymax = measured
        .points
        .iter()
        .map(|p| p.1 + p.2)
        .chain(anchors.iter().flat_map(|s| s.points.iter().map(|p| p.1)))
        .filter(|v| v.is_finite())
        .fold(1.0f64, f64::max);
    let f = Frame { x0, x1, y1: ymax * 1.1 };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="14" font-size="13">{}</text>"#, LEFT, escape(title));
    let (bx, by) = (LEFT, H - BOTTOM);
    let _ = writeln!(
        out,
        r#"<path d="M{bx} {TOP} L{bx} {by} L{} {by}" stroke="black" fill="none"/>"#,
        W - RIGHT
    );
    let mut k = x0.ceil() as i64;
    while (k as f64) <= x1 + 1e-9 {
        let x = f.px(2f64.powi(k as i32));
        let _ = writeln!(out, r#"<line x1="{x:.1}" y1="{by}" x2="{x:.1}" y2="{}" stroke="black"/>"#, by + 4.0);
        let _ = writeln!(out, r#"<text x="{x:.1}" y="{}" text-anchor="middle">2^{k}</text>"#, by + 16.0);
        k += 1;
    }
    for i in 0..=4 {
        let v = f.y1 * i as f64 / 4.0;
        let y = f.py(v);
        let _ = writeln!(out, r#"<line x1="{}" y1="{y:.1}" x2="{bx}" y2="{y:.1}" stroke="black"/>"#, bx - 4.0);
        let _ = writeln!(out, r#"<text x="{}" y="{:.1}" text-anchor="end">{v:.1}</text>"#, bx - 6.0, y + 4.0);
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{}" text-anchor="middle">horizon T (log scale)</text>"#,
        (LEFT + W - RIGHT) / 2.0,
        H - 12.0
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.1}" transform="rotate(-90 14 {:.1})" text-anchor="middle">mistakes</text>"#,
        (TOP + by) / 2.0,
        (TOP + by) / 2.0
    );

    for s in anchors {
        let d: Vec<String> = s
            .points
            .iter()
            .filter(|p| p.1.is_finite())
            .enumerate()
            .map(|(i, p)| format!("{}{:.1} {:.1}", if i == 0 { "M" } else { "L" }, f.px(p.0), f.py(p.1)))
            .collect();
        if d.is_empty() {
            continue;
        }
        let dash = if s.dashed { r#" stroke-dasharray="5 4""# } else { "" };
        let _ = writeln!(
            out,
            r#"<path d="{}" stroke="{}" fill="none" stroke-width="1.5"{dash}/>"#,
            d.join(" "),
            s.color
        );
    }
    for &(t, m, se) in &measured.points {
        let x = f.px(t);
        let _ = writeln!(
            out,
            r#"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/>"#,
            f.py((m - se).max(0.0)),
            f.py(m + se)
        );
        let _ = writeln!(out, r#"<circle cx="{x:.1}" cy="{:.1}" r="3.5" fill="black"/>"#, f.py(m));
    }

    let lx = W - RIGHT + 12.0;
    let mut ly = TOP + 10.0;
    let _ = writeln!(out, r#"<circle cx="{}" cy="{ly}" r="3.5" fill="black"/>"#, lx + 10.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&measured.label));
    for s in anchors {
        ly += 18.0;
        let dash = if s.dashed { r#" stroke-dasharray="5 4""# } else { "" };
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="1.5"{dash}/>"#,
            lx + 20.0,
            s.color
        );
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&s.label));
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_plot_is_well_formed() {
        let m = Measured {
            label: "E[M]".into(),
            points: vec![(63.0, 2.0, 0.1)],
        };
        let svg = plot("one <T>", &m, &[]);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("one &lt;T&gt;"));
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }
}
