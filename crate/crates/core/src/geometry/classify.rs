use num_complex::Complex64;
use serde::Serialize;

use super::isometry::{Ideal, Isometry};
use super::point::{Model, Point};
use super::GeometryError;

/// Half-width of the band around `|tr| = 2` declared parabolic.
pub const TAU_PAR: f64 = 1e-9;

/// Identity detection tolerance; looser than the determinant tolerance
/// because long products accumulate rounding.
const TAU_IDENTITY: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Kind {
    Identity,
    Elliptic,
    Parabolic,
    /// Includes loxodromic elements of PSL(2,C).
    Hyperbolic,
}

/// Where the displacement function attains its infimum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum MinSet {
    Everything,
    /// Fixed point of an elliptic element of PSL(2,R).
    Point(Point),
    /// A geodesic. For hyperbolic elements the order is (repelling,
    /// attracting); for elliptic elements of PSL(2,C) it is the rotation axis.
    Axis(Ideal, Ideal),
    /// Parabolic: the infimum 0 is not attained; the fixed boundary point.
    Empty(Ideal),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IsometryClass {
    pub kind: Kind,
    /// `inf d_g`.
    pub translation_length: f64,
    /// Rotation angle in `[0, π]` (elliptic or loxodromic part).
    pub rotation: f64,
    pub min_set: MinSet,
    /// Distance of `|tr|` from 2, for auditing the parabolic band.
    pub trace_gap: f64,
}

impl IsometryClass {
    /// Order of an elliptic element when its angle is a rational multiple of
    /// 2π with denominator at most `max_order`.
    pub fn elliptic_order(&self, max_order: u32) -> Option<u32> {
        if self.kind != Kind::Elliptic {
            return None;
        }
        (2..=max_order).find(|&n| {
            let k = self.rotation * n as f64 / std::f64::consts::TAU;
            (k - k.round()).abs() < 1e-7
        })
    }
}

/// Classifies by trace, resolving the parabolic band in favour of parabolic.
pub fn classify(g: &Isometry) -> IsometryClass {
    classify_inner(g)
}

/// Like [`classify`], but refuses traces that are within `TAU_PAR` of ±2
/// without being exactly ±2.
pub fn classify_strict(g: &Isometry) -> Result<IsometryClass, GeometryError> {
    let c = classify_inner(g);
    if c.kind != Kind::Identity && c.trace_gap > 0.0 && c.trace_gap <= TAU_PAR {
        return Err(GeometryError::AmbiguousClass(c.trace_gap));
    }
    Ok(c)
}

fn classify_inner(g: &Isometry) -> IsometryClass {
    let t = g.trace();
    let real = t.im.abs() <= TAU_PAR;
    let gap = if real {
        (t.re.abs() - 2.0).abs()
    } else {
        f64::INFINITY
    };
    if g.is_identity(TAU_IDENTITY) {
        return IsometryClass {
            kind: Kind::Identity,
            translation_length: 0.0,
            rotation: 0.0,
            min_set: MinSet::Everything,
            trace_gap: gap,
        };
    }
    if real && gap <= TAU_PAR {
        let [a, _, c, d] = g.entries();
        let xi = if c.norm() <= 1e-14 * g.max_abs_entry() {
            Ideal::Infinity
        } else {
            Ideal::Finite((a - d) / (c * 2.0))
        };
        return IsometryClass {
            kind: Kind::Parabolic,
            translation_length: 0.0,
            rotation: 0.0,
            min_set: MinSet::Empty(xi),
            trace_gap: gap,
        };
    }
    if real && t.re.abs() < 2.0 {
        let rotation = 2.0 * (t.re.abs() / 2.0).acos();
        let min_set = match g.model() {
            Model::H2 => {
                let [a, _, c, d] = g.entries();
                let (a, c, d) = (a.re, c.re, d.re);
                let x = (a - d) / (2.0 * c);
                let y = (4.0 - t.re * t.re).sqrt() / (2.0 * c.abs());
                MinSet::Point(Point::raw(Model::H2, Complex64::new(x, 0.0), y))
            }
            Model::H3 => {
                let (p, q) = fixed_points(g);
                MinSet::Axis(p, q)
            }
        };
        return IsometryClass {
            kind: Kind::Elliptic,
            translation_length: 0.0,
            rotation,
            min_set,
            trace_gap: gap,
        };
    }
    // hyperbolic or loxodromic: λ + 1/λ = tr with |λ| ≥ 1
    let disc = (t * t - 4.0).sqrt();
    let mut lambda = (t + disc) / 2.0;
    if lambda.norm() < 1.0 {
        lambda = (t - disc) / 2.0;
    }
    let translation_length = if real {
        2.0 * (t.re.abs() / 2.0).acosh()
    } else {
        2.0 * lambda.norm().ln()
    };
    let rotation = {
        let r = (2.0 * lambda.arg()).rem_euclid(std::f64::consts::TAU);
        if r > std::f64::consts::PI {
            std::f64::consts::TAU - r
        } else {
            r
        }
    };
    let (p, q) = fixed_points(g);
    let (rep, att) = if is_attracting(g, &p) { (q, p) } else { (p, q) };
    IsometryClass {
        kind: Kind::Hyperbolic,
        translation_length,
        rotation: if real { 0.0 } else { rotation },
        min_set: MinSet::Axis(rep, att),
        trace_gap: gap,
    }
}

fn is_attracting(g: &Isometry, xi: &Ideal) -> bool {
    let [a, _, c, d] = g.entries();
    match xi {
        Ideal::Infinity => a.norm() > d.norm(),
        Ideal::Finite(z) => (c * z + d).norm() > 1.0,
    }
}

/// The two boundary fixed points: roots of `c z² + (d − a) z − b = 0`,
/// solved in the cancellation-free form. A parabolic element returns its
/// fixed point twice.
pub fn fixed_points(g: &Isometry) -> (Ideal, Ideal) {
    let [a, b, c, d] = g.entries();
    let scale = g.max_abs_entry();
    let qb = d - a;
    if c.norm() <= 1e-14 * scale {
        if qb.norm() <= 1e-14 * scale {
            return (Ideal::Infinity, Ideal::Infinity);
        }
        return (Ideal::Finite(b / qb), Ideal::Infinity);
    }
    let t = a + d;
    let root = (t * t - 4.0).sqrt();
    // pick the sign making |qb + s·root| large
    let s = if (qb.conj() * root).re >= 0.0 {
        1.0
    } else {
        -1.0
    };
    let q = -(qb + root * s) / 2.0;
    let z1 = q / c;
    let z2 = if q.norm() <= 1e-300 { z1 } else { -b / q };
    (Ideal::Finite(z1), Ideal::Finite(z2))
}
