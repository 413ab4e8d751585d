use num_complex::Complex64;

use super::isometry::Isometry;
use super::point::{dist, Model, Point, Tangent};
use super::GeometryError;

/// Below this a displacement is treated as zero.
pub const TAU_ZERO: f64 = 1e-10;

/// `d_g(p) = d(p, g·p)`.
pub fn displacement(g: &Isometry, p: &Point) -> f64 {
    dist(p, &g.apply(p))
}

/// `d_g(p) ≤ t + TAU_ZERO`.
pub fn sublevel_contains(g: &Isometry, t: f64, p: &Point) -> bool {
    displacement(g, p) <= t + TAU_ZERO
}

/// Riemannian gradient of `d_g` at `p`, returned in Euclidean components.
///
/// With `A = a − c w`, `D = c w + d`, `B = b + (a − d) w − c w²`,
/// `cosh d_g = ½(|A|² + |D|² + |c|² h² + |B|²/h²)`; the gradient of this
/// closed form divided by `sinh d_g` is the Euclidean gradient of `d_g`,
/// and the metric `Euclidean/h²` raises the index by a factor `h²`.
pub fn grad_displacement(g: &Isometry, p: &Point) -> Result<Tangent, GeometryError> {
    let d = displacement(g, p);
    if d <= TAU_ZERO {
        return Err(GeometryError::OnFixedSet(d));
    }
    let [a, b, c, dd] = g.entries();
    let (w, h) = (p.w(), p.height());
    let big_a = a - c * w;
    let big_d = c * w + dd;
    let big_b = b + (a - dd) * w - c * w * w;
    let b_prime = (a - dd) - c * w * 2.0;
    let h2 = h * h;
    let partial = |da: Complex64, dd: Complex64, db: Complex64| {
        (big_a.conj() * da).re + (big_d.conj() * dd).re + (big_b.conj() * db).re / h2
    };
    let i = Complex64::new(0.0, 1.0);
    let k_u = partial(-c, c, b_prime);
    let k_v = match p.model() {
        Model::H2 => 0.0,
        Model::H3 => partial(-c * i, c * i, b_prime * i),
    };
    let k_h = c.norm_sqr() * h - big_b.norm_sqr() / (h2 * h);
    let s = h2 / d.sinh();
    Ok(Tangent::new(Complex64::new(k_u * s, k_v * s), k_h * s))
}
