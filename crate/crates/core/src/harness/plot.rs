//! Minimal SVG plotting: log-log sweep plot with error bars.

use std::fmt::Write as _;

use crate::harness::sweep::SweepResult;

const W: f64 = 640.0;
const H: f64 = 480.0;
const ML: f64 = 70.0; // margins
const MR: f64 = 20.0;
const MT: f64 = 30.0;
const MB: f64 = 55.0;

struct LogAxis {
    lo: f64,
    hi: f64,
}

impl LogAxis {
    fn new(values: impl Iterator<Item = f64>) -> Self {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values.filter(|v| *v > 0.0 && v.is_finite()) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() || !hi.is_finite() {
            lo = 1e-12;
            hi = 1.0;
        }
        // Pad a third of a decade on each side.
        Self {
            lo: lo / 10f64.powf(0.34),
            hi: hi * 10f64.powf(0.34),
        }
    }

    fn frac(&self, v: f64) -> f64 {
        let v = v.max(self.lo * 1e-3);
        (v.ln() - self.lo.ln()) / (self.hi.ln() - self.lo.ln())
    }

    fn decades(&self) -> Vec<f64> {
        let first = self.lo.log10().ceil() as i32;
        let last = self.hi.log10().floor() as i32;
        (first..=last).map(|d| 10f64.powi(d)).collect()
    }
}

/// Log-log plot of `sup_t` mean relative energy against ε with ±1 standard
/// error bars and a slope-1 guide line.
pub fn sweep_svg(res: &SweepResult) -> String {
    let pts: Vec<(f64, f64, f64)> = res
        .entries
        .iter()
        .filter(|e| e.eps > 0.0 && e.sup_mean_rel_energy > 0.0)
        .map(|e| (e.eps, e.sup_mean_rel_energy, e.std_err))
        .collect();
    let xaxis = LogAxis::new(pts.iter().map(|p| p.0));
    let yaxis = LogAxis::new(
        pts.iter()
            .flat_map(|p| [p.1, (p.1 - p.2).max(p.1 * 0.1), p.1 + p.2].into_iter()),
    );
    let px = |e: f64| ML + xaxis.frac(e) * (W - ML - MR);
    let py = |v: f64| H - MB - yaxis.frac(v) * (H - MT - MB);

    let mut s = String::new();
    write!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    )
    .unwrap();
    s.push_str(r#"<rect width="100%" height="100%" fill="white"/>"#);
    // Frame.
    write!(
        s,
        r#"<rect x="{ML}" y="{MT}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - ML - MR,
        H - MT - MB
    )
    .unwrap();
    // Decade grid and tick labels.
    for d in xaxis.decades() {
        let x = px(d);
        write!(
            s,
            r#"<line x1="{x:.1}" y1="{MT}" x2="{x:.1}" y2="{:.1}" stroke="#ccc"/>"#,
            H - MB
        )
        .unwrap();
        write!(
            s,
            r#"<text x="{x:.1}" y="{:.1}" font-size="12" text-anchor="middle">1e{}</text>"#,
            H - MB + 18.0,
            d.log10().round() as i32
        )
        .unwrap();
    }
    for d in yaxis.decades() {
        let y = py(d);
        write!(
            s,
            r#"<line x1="{ML}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ccc"/>"#,
            W - MR
        )
        .unwrap();
        write!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="end">1e{}</text>"#,
            ML - 6.0,
            y + 4.0,
            d.log10().round() as i32
        )
        .unwrap();
    }
    // Slope-1 guide through the first point.
    if let Some(&(e0, v0, _)) = pts.first() {
        if let Some(&(e1, _, _)) = pts.last() {
            let v1 = v0 * e1 / e0;
            write!(
                s,
                r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#999" stroke-dasharray="6,4"/>"#,
                px(e0),
                py(v0),
                px(e1),
                py(v1)
            )
            .unwrap();
        }
    }
    // Poly-line through the measurements.
    if pts.len() > 1 {
        let path: Vec<String> = pts
            .iter()
            .map(|p| format!("{:.1},{:.1}", px(p.0), py(p.1)))
            .collect();
        write!(
            s,
            r#"<polyline points="{}" fill="none" stroke="#19c" stroke-width="1.5"/>"#,
            path.join(" ")
        )
        .unwrap();
    }
    // Points with error bars.
    for &(e, v, se) in &pts {
        let x = px(e);
        if se > 0.0 {
            let ylo = py((v - se).max(yaxis.lo));
            let yhi = py(v + se);
            write!(
                s,
                r#"<line x1="{x:.1}" y1="{yhi:.1}" x2="{x:.1}" y2="{ylo:.1}" stroke="#147" stroke-width="1"/>"#
            )
            .unwrap();
        }
        write!(
            s,
            r#"<circle cx="{x:.1}" cy="{:.1}" r="3.5" fill="#147"/>"#,
            py(v)
        )
        .unwrap();
    }
    // Axis labels and title.
    write!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle">viscosity scale eps</text>"#,
        (ML + W - MR) / 2.0,
        H - 12.0
    )
    .unwrap();
    write!(
        s,
        r#"<text x="16" y="{:.1}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.1})">sup_t mean relative energy</text>"#,
        (MT + H - MB) / 2.0,
        (MT + H - MB) / 2.0
    )
    .unwrap();
    write!(
        s,
        r#"<text x="{:.1}" y="20" font-size="14" text-anchor="middle">Inviscid-limit sweep (window [0, {:.3}])</text>"#,
        W / 2.0,
        res.window_end
    )
    .unwrap();
    s.push_str("</svg>\n");
    s
}
