use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{
    classify, ConvexSet, GeometryError, Isometry, IsometryClass, Kind, MinSet, Model, Point,
};

/// The RNG for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn matrix(model: Model, m: [Complex64; 4]) -> Isometry {
    Isometry::from_entries(model, m).expect("determinant-one construction")
}

/// A nonzero integer (H²) or Gaussian integer (H³) of modulus at most `r`.
fn lattice_scalar(rng: &mut ChaCha8Rng, model: Model, r: i32) -> Complex64 {
    loop {
        let a = rng.gen_range(-r..=r) as f64;
        let b = if model == Model::H3 {
            rng.gen_range(-r..=r) as f64
        } else {
            0.0
        };
        if a != 0.0 || b != 0.0 {
            return c(a, b);
        }
    }
}

/// Translation, dilation (with a twist in H³) and a rotation about the
/// origin, each with bounded parameters.
pub fn random_conjugator(rng: &mut ChaCha8Rng, model: Model) -> Isometry {
    let b = c(
        rng.gen_range(-1.0..1.0),
        if model == Model::H3 {
            rng.gen_range(-1.0..1.0)
        } else {
            0.0
        },
    );
    let s = rng.gen_range(-1.0..1.0);
    let twist = if model == Model::H3 {
        rng.gen_range(-3.0..3.0)
    } else {
        0.0
    };
    let lam = c(0.5 * s, 0.5 * twist).exp();
    let theta: f64 = rng.gen_range(0.0..std::f64::consts::PI);
    let (sn, cs) = theta.sin_cos();
    let one = c(1.0, 0.0);
    let zero = c(0.0, 0.0);
    let t = matrix(model, [one, b, zero, one]);
    let d = matrix(model, [lam, zero, zero, one / lam]);
    let r = matrix(model, [c(cs, 0.0), c(-sn, 0.0), c(sn, 0.0), c(cs, 0.0)]);
    t * d * r
}

/// Products of two or three elementary integer matrices, kept when
/// hyperbolic with translation length in `[0.3, 4]`, then conjugated.
pub fn random_hyperbolic(rng: &mut ChaCha8Rng, model: Model, conj: &Isometry) -> Isometry {
    let one = c(1.0, 0.0);
    let zero = c(0.0, 0.0);
    loop {
        let n = rng.gen_range(2..=3);
        let mut g = Isometry::identity(model);
        for i in 0..n {
            let k = lattice_scalar(rng, model, 2);
            let e = if i % 2 == 0 {
                [one, k, zero, one]
            } else {
                [one, zero, k, one]
            };
            g = g * matrix(model, e);
        }
        let cls = classify(&g);
        if cls.kind == Kind::Hyperbolic && (0.3..=4.0).contains(&cls.translation_length) {
            return g.conjugate_by(conj);
        }
    }
}

/// A rotation about the origin, conjugated. Half the angles are `2πk/n`
/// with `n ≤ 6`, the rest uniform away from zero.
pub fn random_elliptic(rng: &mut ChaCha8Rng, model: Model, conj: &Isometry) -> Isometry {
    let theta = if rng.gen_bool(0.5) {
        let n = rng.gen_range(2..=6);
        let k = rng.gen_range(1..n);
        std::f64::consts::TAU * k as f64 / n as f64
    } else {
        rng.gen_range(0.2..std::f64::consts::TAU - 0.2)
    };
    let (sn, cs) = (0.5 * theta).sin_cos();
    matrix(model, [c(cs, 0.0), c(-sn, 0.0), c(sn, 0.0), c(cs, 0.0)]).conjugate_by(conj)
}

/// An integer translation, conjugated.
pub fn random_parabolic(rng: &mut ChaCha8Rng, model: Model, conj: &Isometry) -> Isometry {
    let k = lattice_scalar(rng, model, 3);
    Isometry::translation(model, k).conjugate_by(conj)
}

/// A point within bounded distance of the conjugator's image of the origin.
pub fn random_point(rng: &mut ChaCha8Rng, model: Model, conj: &Isometry) -> Point {
    let w = c(
        rng.gen_range(-1.5..1.5),
        if model == Model::H3 {
            rng.gen_range(-1.5..1.5)
        } else {
            0.0
        },
    );
    let h = rng.gen_range(-1.5f64..1.5).exp();
    conj.apply(&Point::new(model, w, h).expect("positive height"))
}

/// An isometry with a convex set it preserves.
#[derive(Clone, Debug)]
pub struct InvariantSet {
    pub g: Isometry,
    pub class: IsometryClass,
    pub set: ConvexSet,
    pub conjugator: Isometry,
}

/// Axis or sublevel set of a hyperbolic element, centre, ball or sublevel
/// set of an elliptic one, sublevel set (horoball) of a parabolic one.
pub fn random_invariant_set(
    rng: &mut ChaCha8Rng,
    model: Model,
) -> Result<InvariantSet, GeometryError> {
    let conj = random_conjugator(rng, model);
    let kind = rng.gen_range(0..3);
    let g = match kind {
        0 => random_hyperbolic(rng, model, &conj),
        1 => random_elliptic(rng, model, &conj),
        _ => random_parabolic(rng, model, &conj),
    };
    let class = classify(&g);
    let level = class.translation_length + rng.gen_range(0.05..1.5);
    let choice = rng.gen_range(0..3);
    let set = match (class.min_set, choice) {
        (MinSet::Axis(a, b), 0) => ConvexSet::Geodesic(a, b),
        (MinSet::Point(p), 0) => ConvexSet::Point(p),
        (MinSet::Point(p), 1) => ConvexSet::Ball {
            center: p,
            radius: rng.gen_range(0.1..1.5),
        },
        // a point on a rotation axis in H³: the conjugated origin
        (MinSet::Axis(..), 1) if class.kind == Kind::Elliptic => ConvexSet::Ball {
            center: conj.apply(&Point::origin(model)),
            radius: rng.gen_range(0.1..1.5),
        },
        _ => ConvexSet::SublevelSet { g, t: level },
    };
    Ok(InvariantSet {
        g,
        class,
        set,
        conjugator: conj,
    })
}
