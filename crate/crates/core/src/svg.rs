//! Deterministic radar-chart rendering of fingerprints.
//!
//! Output uses fixed three-decimal coordinates and no timestamps, so equal
//! inputs give byte-identical files.

use std::fmt::Write;

use crate::fingerprint::{Fingerprint, ThresholdCircle};
use crate::framework::MetricGroup;

const SIZE: f64 = 480.0;
const RADIUS: f64 = 180.0;
const PALETTE: [&str; 3] = ["#2a9d8f", "#7b2cbf", "#e76f51"];

/// Maximum number of scenes in one overlay chart.
pub const MAX_OVERLAY: usize = 3;

fn group_fill(g: MetricGroup) -> &'static str {
    match g {
        MetricGroup::TrafficQuality => "#fde2e4",
        MetricGroup::Intersection => "#e2ece9",
        MetricGroup::Universal => "#dfe7fd",
        MetricGroup::Following => "#fff1c1",
    }
}

fn point(i: usize, n: usize, r: f64) -> (f64, f64) {
    // axis 0 points up, axes run clockwise
    let a = std::f64::consts::TAU * i as f64 / n as f64;
    (SIZE / 2.0 + RADIUS * r * a.sin(), SIZE / 2.0 - RADIUS * r * a.cos())
}

fn points_attr(radii: &[f64]) -> String {
    let n = radii.len();
    radii
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let (x, y) = point(i, n, r.clamp(0.0, 1.0));
            format!("{x:.3},{y:.3}")
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders up to [`MAX_OVERLAY`] fingerprints sharing one axis layout.
/// Extra fingerprints are ignored; the axes of the first one label the chart.
pub fn render_overlay(fingerprints: &[&Fingerprint], threshold: Option<&ThresholdCircle>, title: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE:.0}" height="{SIZE:.0}" viewBox="0 0 {SIZE:.0} {SIZE:.0}">"#
    );
    let _ = writeln!(out, r#"<title>{}</title>"#, escape(title));
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let Some(first) = fingerprints.first() else {
        out.push_str("</svg>\n");
        return out;
    };
    let n = first.axes.len();

    // group shading: one wedge per adjacent pair inside a group
    let _ = writeln!(out, r#"<g class="groups">"#);
    for i in 0..n {
        let j = (i + 1) % n;
        let (g, h) = (first.axes[i].group, first.axes[j].group);
        if g == h {
            let (x0, y0) = point(i, n, 1.0);
            let (x1, y1) = point(j, n, 1.0);
            let _ = writeln!(
                out,
                r#"<polygon points="{:.3},{:.3} {x0:.3},{y0:.3} {x1:.3},{y1:.3}" fill="{}" stroke="none"/>"#,
                SIZE / 2.0,
                SIZE / 2.0,
                group_fill(g)
            );
        }
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r##"<g class="grid" fill="none" stroke="#bbbbbb" stroke-width="0.8">"##);
    for ring in [0.25, 0.5, 0.75, 1.0] {
        let _ = writeln!(out, r#"<circle cx="{:.3}" cy="{:.3}" r="{:.3}"/>"#, SIZE / 2.0, SIZE / 2.0, RADIUS * ring);
    }
    for i in 0..n {
        let (x, y) = point(i, n, 1.0);
        let _ = writeln!(out, r#"<line x1="{:.3}" y1="{:.3}" x2="{x:.3}" y2="{y:.3}"/>"#, SIZE / 2.0, SIZE / 2.0);
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r#"<g class="labels" font-family="sans-serif" font-size="11" text-anchor="middle">"#);
    for (i, axis) in first.axes.iter().enumerate() {
        let (x, y) = point(i, n, 1.12);
        let _ = writeln!(out, r#"<text x="{x:.3}" y="{y:.3}">{}</text>"#, escape(&axis.name));
    }
    let _ = writeln!(out, "</g>");

    if let Some(c) = threshold.filter(|c| c.radii.len() == n) {
        let _ = writeln!(
            out,
            r##"<polygon class="threshold" points="{}" fill="none" stroke="#d62828" stroke-width="1.5" stroke-dasharray="5,3"/>"##,
            points_attr(&c.radii)
        );
    }

    for (k, fp) in fingerprints.iter().take(MAX_OVERLAY).enumerate() {
        let radii: Vec<f64> = fp.axes.iter().map(|a| a.radius).collect();
        let color = PALETTE[k];
        let _ = writeln!(
            out,
            r#"<polygon class="fingerprint" data-t="{:.3}" points="{}" fill="{color}" fill-opacity="0.3" stroke="{color}" stroke-width="2"/>"#,
            fp.t,
            points_attr(&radii)
        );
    }

    let _ = writeln!(out, r#"<g class="legend" font-family="sans-serif" font-size="12">"#);
    for (k, fp) in fingerprints.iter().take(MAX_OVERLAY).enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="10" y="{}" fill="{}">t={:.3} s, area={:.4}</text>"#,
            18 + 16 * k,
            PALETTE[k],
            fp.t,
            fp.area_total
        );
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    out
}

/// Renders one fingerprint.
pub fn render(fingerprint: &Fingerprint, threshold: Option<&ThresholdCircle>) -> String {
    render_overlay(&[fingerprint], threshold, &format!("scene t={:.3}", fingerprint.t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fingerprint::Axis;
    use std::collections::BTreeMap;

    fn fp(t: f64, n: usize) -> Fingerprint {
        let axes = (0..n)
            .map(|i| Axis { name: format!("m<{i}>"), group: if i < 4 { MetricGroup::TrafficQuality } else { MetricGroup::Universal }, radius: 0.5 })
            .collect();
        Fingerprint { t, axes, area_total: 0.25, area_by_group: BTreeMap::new() }
    }

    #[test]
    fn one_polygon_and_axes() {
        let f = fp(1.0, 12);
        let svg = render(&f, None);
        assert_eq!(svg.matches(r#"class="fingerprint""#).count(), 1);
        assert_eq!(svg.matches("<line ").count(), 12);
        assert!(svg.contains("m&lt;3&gt;"));
        assert_eq!(svg, render(&f, None));
    }

    #[test]
    fn overlay_is_capped() {
        let fs: Vec<Fingerprint> = (0..4).map(|k| fp(k as f64, 5)).collect();
        let refs: Vec<&Fingerprint> = fs.iter().collect();
        let svg = render_overlay(&refs, None, "cmp");
        assert_eq!(svg.matches(r#"class="fingerprint""#).count(), 3);
    }

    #[test]
    fn first_axis_points_up() {
        let (x, y) = point(0, 8, 1.0);
        assert!((x - SIZE / 2.0).abs() < 1e-9);
        assert!((y - (SIZE / 2.0 - RADIUS)).abs() < 1e-9);
    }
}
