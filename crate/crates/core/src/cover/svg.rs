use std::fmt::Write;

use super::nerve::NerveComplex;
use super::net::Net;
use crate::geometry::{classify, Kind, MinSet, Model, Point};
use crate::lattice::{orbit_ball, LatticeSpec, OrbitOptions};

const W: f64 = 800.0;
const H: f64 = 800.0;
const PAD: f64 = 20.0;

/// The region's bounding box (up to the thickness ceiling) mapped onto a
/// fixed canvas, with net points, nerve edges and markers for elliptic fixed
/// points. H² only; other models yield `None`.
pub fn render_svg(l: &LatticeSpec, net: &Net, nerve: Option<&NerveComplex>) -> Option<String> {
    if l.model != Model::H2 {
        return None;
    }
    let (x0, x1) = l.region.x_range;
    let (h0, h1) = (
        l.region.floor.min(0.9 * net.ceiling) * 0.95,
        net.ceiling * 1.02,
    );
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |h: f64| H - PAD - (h - h0) / (h1 - h0) * (H - 2.0 * PAD);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        sx(x0),
        sy(h1),
        sx(x1) - sx(x0),
        sy(h0) - sy(h1)
    );
    for b in &l.region.excluded_balls {
        let (cx, r) = (b.center[0], b.radius);
        let _ = writeln!(
            s,
            r#"<ellipse cx="{:.2}" cy="{:.2}" rx="{:.2}" ry="{:.2}" fill="lightgray" stroke="gray"/>"#,
            sx(cx),
            sy(0.0),
            sx(cx + r) - sx(cx),
            sy(0.0) - sy(r)
        );
    }
    if let Some(nerve) = nerve {
        let _ = writeln!(s, r#"<g stroke="steelblue" stroke-width="0.6">"#);
        for e in &nerve.edges {
            let p = &net.points[e.i];
            let q = e.element.apply(&net.points[e.j]);
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
                sx(p.x()),
                sy(p.height()),
                sx(q.x()),
                sy(q.height())
            );
        }
        let _ = writeln!(s, "</g>");
    }
    let _ = writeln!(s, r#"<g fill="black">"#);
    for p in &net.points {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="1.5"/>"#,
            sx(p.x()),
            sy(p.height())
        );
    }
    let _ = writeln!(s, "</g>");
    for p in elliptic_points(l) {
        let (cx, cy) = (sx(p.x()), sy(p.height()));
        let _ = writeln!(
            s,
            r#"<path d="M{:.2},{:.2}L{:.2},{:.2}M{:.2},{:.2}L{:.2},{:.2}" stroke="crimson" stroke-width="2"/>"#,
            cx - 6.0,
            cy - 6.0,
            cx + 6.0,
            cy + 6.0,
            cx - 6.0,
            cy + 6.0,
            cx + 6.0,
            cy - 6.0
        );
    }
    s.push_str("</svg>\n");
    Some(s)
}

/// Fixed points of elliptic elements lying in the region.
fn elliptic_points(l: &LatticeSpec) -> Vec<Point> {
    let Ok(ball) = orbit_ball(l, &l.basepoint, 3.0, &OrbitOptions::default()) else {
        return Vec::new();
    };
    let mut out: Vec<Point> = Vec::new();
    for e in ball.nontrivial() {
        let c = classify(&e.element);
        if let (Kind::Elliptic, MinSet::Point(p)) = (c.kind, c.min_set) {
            let boundary = l.region.contains(&p);
            if boundary && !out.iter().any(|q| crate::geometry::dist(q, &p) < 1e-6) {
                out.push(p);
            }
        }
    }
    out
}
