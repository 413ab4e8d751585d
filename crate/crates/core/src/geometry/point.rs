use std::fmt;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::GeometryError;

/// Which upper half-space model a value lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    /// Upper half-plane, acted on by PSL(2,R).
    H2,
    /// Upper half-space, acted on by PSL(2,C).
    H3,
}

impl Model {
    pub fn dimension(self) -> usize {
        match self {
            Model::H2 => 2,
            Model::H3 => 3,
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::H2 => write!(f, "H2"),
            Model::H3 => write!(f, "H3"),
        }
    }
}

impl std::str::FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "H2" => Ok(Model::H2),
            "H3" => Ok(Model::H3),
            other => Err(format!("unknown model `{other}` (expected H2 or H3)")),
        }
    }
}

/// A point of H² or H³ in upper half-space coordinates.
///
/// Both models share one representation: a horizontal part `w` and a
/// height `h > 0`. In H² the horizontal part is real, so the point is
/// `x + i·y` with `x = w.re`, `y = h`. In H³ the point is the quaternion
/// `w + h·j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    model: Model,
    w: Complex64,
    h: f64,
}

impl Point {
    pub fn h2(x: f64, y: f64) -> Result<Self, GeometryError> {
        Self::new(Model::H2, Complex64::new(x, 0.0), y)
    }

    pub fn h3(x1: f64, x2: f64, t: f64) -> Result<Self, GeometryError> {
        Self::new(Model::H3, Complex64::new(x1, x2), t)
    }

    pub fn new(model: Model, w: Complex64, h: f64) -> Result<Self, GeometryError> {
        if !(w.re.is_finite() && w.im.is_finite() && h.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if h <= 0.0 {
            return Err(GeometryError::NonPositiveHeight(h));
        }
        if model == Model::H2 && w.im != 0.0 {
            return Err(GeometryError::ComplexEntries);
        }
        Ok(Self { model, w, h })
    }

    /// Builds a point from coordinates: `[x, y]` for H², `[x1, x2, t]` for H³.
    pub fn from_coords(coords: &[f64]) -> Result<Self, GeometryError> {
        match *coords {
            [x, y] => Self::h2(x, y),
            [x1, x2, t] => Self::h3(x1, x2, t),
            _ => Err(GeometryError::BadCoordinates(coords.len())),
        }
    }

    /// Internal constructor for results of exact formulas; the height is
    /// clamped away from zero and H² points are projected back to the plane.
    pub(crate) fn raw(model: Model, w: Complex64, h: f64) -> Self {
        let w = match model {
            Model::H2 => Complex64::new(w.re, 0.0),
            Model::H3 => w,
        };
        Self {
            model,
            w,
            h: h.max(f64::MIN_POSITIVE),
        }
    }

    /// The basepoint `i` (H²) or `j` (H³).
    pub fn origin(model: Model) -> Self {
        Self::raw(model, Complex64::new(0.0, 0.0), 1.0)
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn w(&self) -> Complex64 {
        self.w
    }

    pub fn x(&self) -> f64 {
        self.w.re
    }

    pub fn height(&self) -> f64 {
        self.h
    }

    pub fn coords(&self) -> Vec<f64> {
        match self.model {
            Model::H2 => vec![self.w.re, self.h],
            Model::H3 => vec![self.w.re, self.w.im, self.h],
        }
    }

    /// Squared Euclidean distance between the model coordinates.
    pub(crate) fn euclid_sq(&self, other: &Point) -> f64 {
        (self.w - other.w).norm_sqr() + (self.h - other.h).powi(2)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.model {
            Model::H2 => write!(f, "({:.12}, {:.12})", self.w.re, self.h),
            Model::H3 => write!(f, "({:.12}, {:.12}, {:.12})", self.w.re, self.w.im, self.h),
        }
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.coords().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let coords = Vec::<f64>::deserialize(deserializer)?;
        Point::from_coords(&coords).map_err(D::Error::custom)
    }
}

/// Hyperbolic distance (curvature −1).
///
/// Uses `d = 2 asinh(|p − q|_E / (2 √(h_p h_q)))`, which is the same closed
/// form as `cosh d = 1 + |p − q|²/(2 h_p h_q)` but keeps full relative
/// precision for nearby points.
pub fn dist(p: &Point, q: &Point) -> f64 {
    debug_assert_eq!(p.model, q.model, "dist across models");
    let e = p.euclid_sq(q).sqrt();
    2.0 * (e / (2.0 * (p.h * q.h).sqrt())).asinh()
}

/// A tangent vector, stored by its Euclidean coordinate components.
///
/// The Riemannian metric at `p` is `(|dw|² + dh²) / h²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tangent {
    pub dw: Complex64,
    pub dh: f64,
}

impl Tangent {
    pub const ZERO: Tangent = Tangent {
        dw: Complex64 { re: 0.0, im: 0.0 },
        dh: 0.0,
    };

    pub fn new(dw: Complex64, dh: f64) -> Self {
        Self { dw, dh }
    }

    pub fn scale(self, s: f64) -> Self {
        Self {
            dw: self.dw * s,
            dh: self.dh * s,
        }
    }

    pub fn add(self, other: Tangent) -> Self {
        Self {
            dw: self.dw + other.dw,
            dh: self.dh + other.dh,
        }
    }

    /// Riemannian inner product at `p`.
    pub fn dot_at(&self, other: &Tangent, p: &Point) -> f64 {
        (self.dw.re * other.dw.re + self.dw.im * other.dw.im + self.dh * other.dh) / (p.h * p.h)
    }

    /// Riemannian norm at `p`.
    pub fn norm_at(&self, p: &Point) -> f64 {
        self.dot_at(self, p).sqrt()
    }

    fn euclid_norm(&self) -> f64 {
        (self.dw.norm_sqr() + self.dh * self.dh).sqrt()
    }
}

/// Riemannian exponential map.
///
/// From `j` the unit-speed geodesic with orthonormal direction `(ξ, η)` is
/// `w(t) = ξ sinh t / D`, `h(t) = 1 / D` with `D = cosh t − η sinh t`; the
/// similarity `x ↦ w_p + h_p x` carries that to `p`.
pub fn exp(p: &Point, v: &Tangent) -> Point {
    let speed = v.norm_at(p);
    if speed == 0.0 {
        return *p;
    }
    let e = v.euclid_norm();
    let xi = v.dw / e;
    let eta = v.dh / e;
    let (s, c) = (speed.sinh(), speed.cosh());
    let denom = c - eta * s;
    Point::raw(p.model, p.w + xi * (p.h * s / denom), p.h / denom)
}

/// Inverse of [`exp`]: the tangent at `p` whose geodesic reaches `q` at time 1.
pub fn log(p: &Point, q: &Point) -> Tangent {
    let d = dist(p, q);
    if d == 0.0 {
        return Tangent::ZERO;
    }
    // q moved by the similarity taking p to j
    let big_w = (q.w - p.w) / p.h;
    let big_h = q.h / p.h;
    let sh = d.sinh();
    let xi = big_w / (big_h * sh);
    let half = (0.5 * d).sinh();
    let eta = (2.0 * half * half + (big_h - 1.0) / big_h) / sh;
    Tangent::new(xi * (p.h * d), eta * p.h * d)
}

/// The point at distance `s` from `p` along the geodesic towards `q`.
pub fn geodesic_point(p: &Point, q: &Point, s: f64) -> Point {
    let v = log(p, q);
    let n = v.norm_at(p);
    if n == 0.0 {
        return *p;
    }
    exp(p, &v.scale(s / n))
}
