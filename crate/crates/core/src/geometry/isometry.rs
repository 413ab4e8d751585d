use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::point::{Model, Point};
use super::GeometryError;

/// Determinant tolerance after normalization.
pub const TAU_DET: f64 = 1e-12;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// A point of the boundary at infinity: `ℝ ∪ {∞}` or `ℂ ∪ {∞}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Ideal {
    Finite(Complex64),
    Infinity,
}

impl Ideal {
    pub fn real(x: f64) -> Self {
        Ideal::Finite(Complex64::new(x, 0.0))
    }

    /// Chordal distance on the Riemann sphere; bounded by 2 and finite at ∞.
    pub fn chordal_dist(&self, other: &Ideal) -> f64 {
        match (self, other) {
            (Ideal::Infinity, Ideal::Infinity) => 0.0,
            (Ideal::Finite(z), Ideal::Infinity) | (Ideal::Infinity, Ideal::Finite(z)) => {
                2.0 / (1.0 + z.norm_sqr()).sqrt()
            }
            (Ideal::Finite(a), Ideal::Finite(b)) => {
                2.0 * (a - b).norm() / ((1.0 + a.norm_sqr()).sqrt() * (1.0 + b.norm_sqr()).sqrt())
            }
        }
    }
}

impl fmt::Display for Ideal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ideal::Infinity => write!(f, "∞"),
            Ideal::Finite(z) if z.im == 0.0 => write!(f, "{:.12}", z.re),
            Ideal::Finite(z) => write!(f, "{:.12}{:+.12}i", z.re, z.im),
        }
    }
}

/// An orientation-preserving isometry, stored as a unit-determinant 2×2
/// matrix `[[a, b], [c, d]]` and identified with its negative.
#[derive(Clone, Copy, Debug)]
pub struct Isometry {
    m: [Complex64; 4],
    model: Model,
}

/// Hashable fingerprint of an isometry up to sign, for projective deduplication.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementKey([i64; 8]);

const KEY_SCALE: f64 = 1e7;

impl Isometry {
    /// A real matrix acting on H².
    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Result<Self, GeometryError> {
        Self::from_entries(
            Model::H2,
            [
                Complex64::new(a, 0.0),
                Complex64::new(b, 0.0),
                Complex64::new(c, 0.0),
                Complex64::new(d, 0.0),
            ],
        )
    }

    /// A complex matrix acting on H³.
    pub fn complex(
        a: Complex64,
        b: Complex64,
        c: Complex64,
        d: Complex64,
    ) -> Result<Self, GeometryError> {
        Self::from_entries(Model::H3, [a, b, c, d])
    }

    /// Normalizes `[a, b, c, d]` to determinant one.
    pub fn from_entries(model: Model, m: [Complex64; 4]) -> Result<Self, GeometryError> {
        if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(GeometryError::NonFinite);
        }
        if model == Model::H2 && m.iter().any(|z| z.im != 0.0) {
            return Err(GeometryError::ComplexEntries);
        }
        let det = m[0] * m[3] - m[1] * m[2];
        let scale = m.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        if det.norm() <= 1e-14 * scale {
            return Err(GeometryError::Singular(det.norm()));
        }
        if model == Model::H2 && det.re < 0.0 {
            return Err(GeometryError::OrientationReversing);
        }
        Ok(Self { m, model }.normalized())
    }

    pub fn identity(model: Model) -> Self {
        Self {
            m: [ONE, ZERO, ZERO, ONE],
            model,
        }
    }

    /// `z ↦ z + b`, a parabolic fixing ∞.
    pub fn translation(model: Model, b: Complex64) -> Self {
        let b = match model {
            Model::H2 => Complex64::new(b.re, 0.0),
            Model::H3 => b,
        };
        Self {
            m: [ONE, b, ZERO, ONE],
            model,
        }
    }

    /// The similarity `x ↦ w + h x` taking the origin to `p`.
    pub fn lift_of(p: &Point) -> Self {
        let s = p.height().sqrt();
        Self {
            m: [
                Complex64::new(s, 0.0),
                p.w() / s,
                ZERO,
                Complex64::new(1.0 / s, 0.0),
            ],
            model: p.model(),
        }
    }

    fn normalized(mut self) -> Self {
        let det = self.det();
        let s = match self.model {
            Model::H2 => Complex64::new(det.re.sqrt(), 0.0),
            Model::H3 => det.sqrt(),
        };
        for z in &mut self.m {
            *z /= s;
        }
        self
    }

    pub fn model(&self) -> Model {
        self.model
    }

    /// Entries `[a, b, c, d]`.
    pub fn entries(&self) -> [Complex64; 4] {
        self.m
    }

    pub fn det(&self) -> Complex64 {
        self.m[0] * self.m[3] - self.m[1] * self.m[2]
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0] + self.m[3]
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Möbius action on H², Poincaré extension on H³:
    /// `w' = ((a w + b) conj(c w + d) + a conj(c) h²) / D`, `h' = h / D`,
    /// `D = |c w + d|² + |c|² h²`.
    pub fn apply(&self, p: &Point) -> Point {
        debug_assert_eq!(self.model, p.model());
        let [a, b, c, d] = self.m;
        let (w, h) = (p.w(), p.height());
        let cwd = c * w + d;
        let den = cwd.norm_sqr() + c.norm_sqr() * h * h;
        let num = (a * w + b) * cwd.conj() + a * c.conj() * (h * h);
        Point::raw(self.model, num / den, h / den)
    }

    /// Action on the boundary at infinity.
    pub fn apply_ideal(&self, xi: &Ideal) -> Ideal {
        let [a, b, c, d] = self.m;
        let scale = self.max_abs_entry();
        match xi {
            Ideal::Infinity => {
                if c.norm() <= 1e-14 * scale {
                    Ideal::Infinity
                } else {
                    Ideal::Finite(a / c)
                }
            }
            Ideal::Finite(z) => {
                let den = c * z + d;
                if den.norm() <= 1e-14 * scale * (1.0 + z.norm()) {
                    Ideal::Infinity
                } else {
                    Ideal::Finite((a * z + b) / den)
                }
            }
        }
    }

    pub fn inverse(&self) -> Self {
        let [a, b, c, d] = self.m;
        Self {
            m: [d, -b, -c, a],
            model: self.model,
        }
    }

    /// `self^k` by repeated squaring.
    pub fn pow(&self, k: i64) -> Self {
        let mut base = if k < 0 { self.inverse() } else { *self };
        let mut n = k.unsigned_abs();
        let mut acc = Self::identity(self.model);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }

    pub fn conjugate_by(&self, h: &Isometry) -> Self {
        *h * *self * h.inverse()
    }

    pub fn commutator(&self, other: &Isometry) -> Self {
        *self * *other * self.inverse() * other.inverse()
    }

    /// `A ≡ B` iff `A = B` or `A = −B` entrywise within `tol` (relative to
    /// the entry scale).
    pub fn projectively_eq(&self, other: &Isometry, tol: f64) -> bool {
        let scale = 1.0f64.max(self.max_abs_entry()).max(other.max_abs_entry());
        let t = tol * scale;
        let plus = self
            .m
            .iter()
            .zip(&other.m)
            .all(|(x, y)| (x - y).norm() <= t);
        plus || self
            .m
            .iter()
            .zip(&other.m)
            .all(|(x, y)| (x + y).norm() <= t)
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.projectively_eq(&Self::identity(self.model), tol)
    }

    /// Sign-normalized, quantized entries.
    pub fn key(&self) -> ElementKey {
        let lead = self
            .m
            .iter()
            .find(|z| z.norm() > 1e-9)
            .copied()
            .unwrap_or(ONE);
        let flip = if lead.re.abs() > 1e-9 {
            lead.re < 0.0
        } else {
            lead.im < 0.0
        };
        let sign = if flip { -1.0 } else { 1.0 };
        let mut k = [0i64; 8];
        for (i, z) in self.m.iter().enumerate() {
            k[2 * i] = (sign * z.re * KEY_SCALE).round() as i64;
            k[2 * i + 1] = (sign * z.im * KEY_SCALE).round() as i64;
        }
        ElementKey(k)
    }
}

impl Mul for Isometry {
    type Output = Isometry;

    fn mul(self, rhs: Isometry) -> Isometry {
        debug_assert_eq!(self.model, rhs.model);
        let [a, b, c, d] = self.m;
        let [p, q, r, s] = rhs.m;
        Isometry {
            m: [a * p + b * r, a * q + b * s, c * p + d * r, c * q + d * s],
            model: self.model,
        }
        .normalized()
    }
}

impl fmt::Display for Isometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |z: &Complex64| match self.model {
            Model::H2 => format!("{:.6}", z.re),
            Model::H3 => format!("{:.6}{:+.6}i", z.re, z.im),
        };
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            show(&self.m[0]),
            show(&self.m[1]),
            show(&self.m[2]),
            show(&self.m[3])
        )
    }
}

/// Serialized form: `[[a, b], [c, d]]` with each entry `[re, im]`.
impl Serialize for Isometry {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let e = |z: Complex64| [z.re, z.im];
        let rows = [[e(self.m[0]), e(self.m[1])], [e(self.m[2]), e(self.m[3])]];
        rows.serialize(serializer)
    }
}
