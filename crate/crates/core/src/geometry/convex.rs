use num_complex::Complex64;
use serde::Serialize;

use super::classify::{classify, Kind, MinSet};
use super::displacement::{displacement, TAU_ZERO};
use super::isometry::{Ideal, Isometry};
use super::point::{dist, geodesic_point, Model, Point};
use super::GeometryError;

const PROJ_TOL: f64 = 1e-10;
const PROJ_CAP: usize = 10_000;

/// Closed convex subsets with exact nearest-point projections.
#[derive(Clone, Debug, Serialize)]
pub enum ConvexSet {
    Point(Point),
    Ball {
        center: Point,
        radius: f64,
    },
    /// The complete geodesic between two distinct boundary points.
    Geodesic(Ideal, Ideal),
    /// `{x : d_g(x) ≤ t}`.
    SublevelSet {
        g: Isometry,
        t: f64,
    },
    /// Horoball at `at`: `{h ≥ param}` when `at = ∞`, otherwise the Euclidean
    /// ball of diameter `param` tangent to the boundary at `at`.
    Horoball {
        at: Ideal,
        param: f64,
    },
    Intersection(Vec<ConvexSet>),
}

/// Normalized form of a sublevel set.
enum Resolved {
    Empty,
    Everything,
    Tube(Tube),
}

enum Tube {
    Ball(Point, f64),
    AroundGeodesic(Ideal, Ideal, f64),
    Horoball(Ideal, f64),
}

/// An isometry taking `xi1 ↦ 0` and `xi2 ↦ ∞`.
pub fn standardizer(model: Model, xi1: &Ideal, xi2: &Ideal) -> Result<Isometry, GeometryError> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let m = match (xi1, xi2) {
        (Ideal::Infinity, Ideal::Infinity) => return Err(GeometryError::DegenerateGeodesic),
        (Ideal::Finite(a), Ideal::Infinity) => [one, -a, zero, one],
        (Ideal::Infinity, Ideal::Finite(b)) => [zero, -one, one, -b],
        (Ideal::Finite(a), Ideal::Finite(b)) => {
            if (a - b).norm() <= 1e-14 * (1.0 + a.norm()) {
                return Err(GeometryError::DegenerateGeodesic);
            }
            if model == Model::H2 && a.re < b.re {
                [one, -a, -one, *b]
            } else {
                [one, -a, one, -b]
            }
        }
    };
    Isometry::from_entries(model, m)
}

/// Distance from `p` to the geodesic `(xi1, xi2)`.
pub fn dist_to_geodesic(xi1: &Ideal, xi2: &Ideal, p: &Point) -> Result<f64, GeometryError> {
    let s = standardizer(p.model(), xi1, xi2)?;
    let q = s.apply(p);
    Ok((q.w().norm() / q.height()).asinh())
}

/// Nearest point of the geodesic `(xi1, xi2)` to `p`.
pub fn project_to_geodesic(xi1: &Ideal, xi2: &Ideal, p: &Point) -> Result<Point, GeometryError> {
    let s = standardizer(p.model(), xi1, xi2)?;
    let q = s.apply(p);
    let foot = Point::raw(
        p.model(),
        Complex64::new(0.0, 0.0),
        q.w().norm().hypot(q.height()),
    );
    Ok(s.inverse().apply(&foot))
}

/// The point of the geodesic `(xi1, xi2)` at signed arclength `s` from the
/// foot of `j`'s standard position, oriented towards `xi2`.
pub fn geodesic_point_at(
    model: Model,
    xi1: &Ideal,
    xi2: &Ideal,
    s: f64,
) -> Result<Point, GeometryError> {
    let st = standardizer(model, xi1, xi2)?;
    Ok(st
        .inverse()
        .apply(&Point::raw(model, Complex64::new(0.0, 0.0), s.exp())))
}

/// Conjugator taking a boundary point to ∞.
fn to_infinity(model: Model, xi: &Ideal) -> Isometry {
    match xi {
        Ideal::Infinity => Isometry::identity(model),
        Ideal::Finite(z) => Isometry::from_entries(
            model,
            [
                Complex64::new(0.0, 0.0),
                Complex64::new(-1.0, 0.0),
                Complex64::new(1.0, 0.0),
                -z,
            ],
        )
        .expect("unit determinant"),
    }
}

/// Height of the horosphere `{h = H}` at ∞ in coordinates where `xi` is ∞.
fn horo_height(xi: &Ideal, param: f64) -> f64 {
    match xi {
        Ideal::Infinity => param,
        Ideal::Finite(_) => 1.0 / param,
    }
}

fn resolve_sublevel(g: &Isometry, t: f64) -> Resolved {
    let class = classify(g);
    match class.kind {
        Kind::Identity => {
            if t >= 0.0 {
                Resolved::Everything
            } else {
                Resolved::Empty
            }
        }
        Kind::Parabolic => {
            if t <= 0.0 {
                return Resolved::Empty;
            }
            let xi = match class.min_set {
                MinSet::Empty(xi) => xi,
                _ => unreachable!("parabolic min set"),
            };
            let m = to_infinity(g.model(), &xi);
            let std = g.conjugate_by(&m);
            let [_, b, _, d] = std.entries();
            let beta = (b / d).norm();
            let height = beta / (2.0 * (0.5 * t).sinh());
            let param = match xi {
                Ideal::Infinity => height,
                Ideal::Finite(_) => 1.0 / height,
            };
            Resolved::Tube(Tube::Horoball(xi, param))
        }
        Kind::Elliptic | Kind::Hyperbolic => {
            let ell = class.translation_length;
            if t < ell - TAU_ZERO {
                return Resolved::Empty;
            }
            let ch_l = ell.cosh();
            let denom = ch_l - class.rotation.cos();
            let rho = if denom <= 0.0 {
                0.0
            } else {
                ((t.cosh() - ch_l).max(0.0) / denom).sqrt().asinh()
            };
            match class.min_set {
                MinSet::Point(p) => Resolved::Tube(Tube::Ball(p, rho)),
                MinSet::Axis(p, q) => Resolved::Tube(Tube::AroundGeodesic(p, q, rho)),
                _ => unreachable!("semisimple min set"),
            }
        }
    }
}

fn project_tube(tube: &Tube, p: &Point) -> Result<Point, GeometryError> {
    match tube {
        Tube::Ball(c, r) => Ok(project_ball(c, *r, p)),
        Tube::AroundGeodesic(a, b, r) => {
            let foot = project_to_geodesic(a, b, p)?;
            let d = dist(&foot, p);
            if d <= *r {
                Ok(*p)
            } else {
                Ok(geodesic_point(&foot, p, *r))
            }
        }
        Tube::Horoball(xi, param) => {
            let m = to_infinity(p.model(), xi);
            let q = m.apply(p);
            let h0 = horo_height(xi, *param);
            if q.height() >= h0 {
                Ok(*p)
            } else {
                Ok(m.inverse().apply(&Point::raw(p.model(), q.w(), h0)))
            }
        }
    }
}

fn project_ball(c: &Point, r: f64, p: &Point) -> Point {
    if dist(c, p) <= r {
        *p
    } else {
        geodesic_point(c, p, r)
    }
}

impl ConvexSet {
    /// The tube `{d_g ≤ t}` expressed as a primitive set, when it is one.
    pub fn sublevel(g: Isometry, t: f64) -> Self {
        ConvexSet::SublevelSet { g, t }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            ConvexSet::Ball { radius, .. } => *radius < 0.0,
            ConvexSet::Geodesic(a, b) => a.chordal_dist(b) <= 1e-14,
            ConvexSet::Horoball { param, .. } => !(*param > 0.0),
            ConvexSet::SublevelSet { g, t } => matches!(resolve_sublevel(g, *t), Resolved::Empty),
            ConvexSet::Intersection(parts) => {
                parts.iter().any(|c| c.is_empty()) || self.project(&first_point(parts)).is_err()
            }
            ConvexSet::Point(_) => false,
        }
    }

    /// Membership up to `tol` (in distance units).
    pub fn contains(&self, p: &Point, tol: f64) -> bool {
        match self {
            ConvexSet::Point(q) => dist(p, q) <= tol,
            ConvexSet::Ball { center, radius } => dist(center, p) <= radius + tol,
            ConvexSet::Geodesic(a, b) => dist_to_geodesic(a, b, p).is_ok_and(|d| d <= tol),
            ConvexSet::SublevelSet { g, t } => displacement(g, p) <= t + tol.max(TAU_ZERO),
            ConvexSet::Horoball { at, param } => {
                let q = to_infinity(p.model(), at).apply(p);
                (horo_height(at, *param) / q.height()).ln() <= tol
            }
            ConvexSet::Intersection(parts) => parts.iter().all(|c| c.contains(p, tol)),
        }
    }

    /// Nearest point of the set. Intersections use cyclic alternating
    /// projection, which returns a point of the intersection.
    pub fn project(&self, p: &Point) -> Result<Point, GeometryError> {
        match self {
            ConvexSet::Point(q) => Ok(*q),
            ConvexSet::Ball { center, radius } => {
                if *radius < 0.0 {
                    return Err(GeometryError::EmptySet);
                }
                Ok(project_ball(center, *radius, p))
            }
            ConvexSet::Geodesic(a, b) => project_to_geodesic(a, b, p),
            ConvexSet::Horoball { at, param } => {
                if !(*param > 0.0) {
                    return Err(GeometryError::EmptySet);
                }
                project_tube(&Tube::Horoball(*at, *param), p)
            }
            ConvexSet::SublevelSet { g, t } => match resolve_sublevel(g, *t) {
                Resolved::Empty => Err(GeometryError::EmptySet),
                Resolved::Everything => Ok(*p),
                Resolved::Tube(tube) => project_tube(&tube, p),
            },
            ConvexSet::Intersection(parts) => {
                if parts.is_empty() {
                    return Ok(*p);
                }
                let mut x = *p;
                for _ in 0..PROJ_CAP {
                    let mut moved: f64 = 0.0;
                    for c in parts {
                        let y = c.project(&x)?;
                        moved = moved.max(dist(&x, &y));
                        x = y;
                    }
                    if moved <= PROJ_TOL {
                        return Ok(x);
                    }
                }
                Err(GeometryError::NotConverged(PROJ_CAP))
            }
        }
    }
}

fn first_point(parts: &[ConvexSet]) -> Point {
    for c in parts {
        if let ConvexSet::Point(p) | ConvexSet::Ball { center: p, .. } = c {
            return *p;
        }
    }
    let model = parts
        .iter()
        .find_map(|c| match c {
            ConvexSet::SublevelSet { g, .. } => Some(g.model()),
            _ => None,
        })
        .unwrap_or(Model::H2);
    Point::origin(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_onto_vertical_geodesic() {
        let c = ConvexSet::Geodesic(Ideal::real(0.0), Ideal::Infinity);
        let p = Point::h2(1.0, 1.0).unwrap();
        let q = c.project(&p).unwrap();
        assert!(q.x().abs() < 1e-15);
        assert!((q.height() - 2f64.sqrt()).abs() < 1e-15);
        // idempotent
        let qq = c.project(&q).unwrap();
        assert!(dist(&q, &qq) < 1e-15);
    }

    #[test]
    fn standardizer_maps_ends() {
        for (a, b) in [(-1.0, 2.0), (3.0, -0.5)] {
            let s = standardizer(Model::H2, &Ideal::real(a), &Ideal::real(b)).unwrap();
            assert!(
                s.apply_ideal(&Ideal::real(a))
                    .chordal_dist(&Ideal::real(0.0))
                    < 1e-15
            );
            assert_eq!(s.apply_ideal(&Ideal::real(b)), Ideal::Infinity);
        }
        let s = standardizer(Model::H2, &Ideal::Infinity, &Ideal::real(1.5)).unwrap();
        assert_eq!(s.apply_ideal(&Ideal::Infinity), Ideal::real(0.0));
    }

    #[test]
    fn hyperbolic_sublevel_projection_hits_level() {
        let h = Isometry::real(2.0, 1.0, 1.0, 1.0).unwrap();
        let g = Isometry::real(2.0, 0.0, 0.0, 0.5).unwrap().conjugate_by(&h);
        let t = 2.0;
        let c = ConvexSet::sublevel(g, t);
        let p = Point::h2(3.0, 0.1).unwrap();
        assert!(!c.contains(&p, 0.0));
        let q = c.project(&p).unwrap();
        assert!((displacement(&g, &q) - t).abs() < 1e-9);
    }

    #[test]
    fn parabolic_sublevel_projection() {
        let t = Isometry::real(1.0, 1.0, 0.0, 1.0).unwrap();
        let c = ConvexSet::sublevel(t, 1.5f64.acosh());
        let q = c.project(&Point::h2(0.25, 0.3).unwrap()).unwrap();
        assert!((q.height() - 1.0).abs() < 1e-12 && (q.x() - 0.25).abs() < 1e-15);
        assert!(ConvexSet::sublevel(t, 0.0).is_empty());
        // finite fixed point: conjugate by S
        let s = Isometry::real(0.0, -1.0, 1.0, 0.0).unwrap();
        let u = t.conjugate_by(&s);
        let level = 0.3;
        let q = ConvexSet::sublevel(u, level)
            .project(&Point::h2(0.7, 1.3).unwrap())
            .unwrap();
        assert!((displacement(&u, &q) - level).abs() < 1e-9);
    }

    #[test]
    fn elliptic_sublevel_is_ball() {
        let s = Isometry::real(0.0, -1.0, 1.0, 0.0).unwrap();
        let c = ConvexSet::sublevel(s, 0.5);
        let q = c.project(&Point::h2(2.0, 3.0).unwrap()).unwrap();
        assert!((displacement(&s, &q) - 0.5).abs() < 1e-12);
        assert!((dist(&q, &Point::h2(0.0, 1.0).unwrap()) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn empty_sublevel_below_translation_length() {
        let g = Isometry::real(2.0, 0.0, 0.0, 0.5).unwrap();
        let c = ConvexSet::sublevel(g, 1.0);
        assert!(c.is_empty());
        assert_eq!(
            c.project(&Point::origin(Model::H2)),
            Err(GeometryError::EmptySet)
        );
    }

    #[test]
    fn intersection_lands_in_all_parts() {
        let g = Isometry::real(2.0, 0.0, 0.0, 0.5).unwrap();
        let c = ConvexSet::Intersection(vec![
            ConvexSet::sublevel(g, 2.0),
            ConvexSet::Ball {
                center: Point::h2(0.5, 1.0).unwrap(),
                radius: 0.6,
            },
        ]);
        let q = c.project(&Point::h2(3.0, 0.2).unwrap()).unwrap();
        assert!(c.contains(&q, 1e-9));
    }
}
