//! Randomized checks of the convexity lemmas behind the retraction: the
//! projection claim, monotone convex displacement along rays, common points
//! of commuting sublevel sets, `Min(g) = Min(gᵐ)`, and the codimension of
//! minimal sets in H³.
//!
//! Each check draws its trials from a ChaCha stream keyed by
//! `(seed, trial)`, so any single trial can be replayed. The per-trial
//! functions are public so other test suites can reuse them as property
//! generators.

mod random;

pub use random::{
    random_conjugator, random_elliptic, random_hyperbolic, random_invariant_set, random_parabolic,
    random_point, trial_rng, InvariantSet,
};

use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{
    classify, displacement, dist, exp, fixed_points, log, ConvexSet, GeometryError, Ideal,
    Isometry, Kind, MinSet, Model, Point,
};
use crate::lattice::{bundled, LatticeError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LemmaError {
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error("this check needs model {0:?}")]
    WrongModel(Model),
    #[error("sample resolution must be at least 3, got {0}")]
    Resolution(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialConfig {
    pub trials: usize,
    pub seed: u64,
    pub model: Model,
    pub tau: f64,
    /// Grid points per sampled ray.
    pub resolution: usize,
    /// Length of each sampled ray.
    pub ray_length: f64,
    /// Largest exponent in the power checks.
    pub max_power: i64,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            trials: 10_000,
            seed: 2024,
            model: Model::H2,
            tau: 1e-9,
            resolution: 48,
            ray_length: 3.0,
            max_power: 4,
        }
    }
}

impl TrialConfig {
    pub fn with_model(model: Model) -> Self {
        Self {
            model,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), LemmaError> {
        if self.trials == 0 {
            return Err(LemmaError::NoTrials);
        }
        if self.resolution < 3 {
            return Err(LemmaError::Resolution(self.resolution));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialReport {
    pub check: String,
    pub model: Model,
    pub trials: usize,
    pub seed: u64,
    pub tau: f64,
    /// Individual assertions evaluated.
    pub assertions: usize,
    /// Assertions failing by more than `tau`.
    pub violations: usize,
    /// Largest amount by which any assertion failed (0 if none did).
    pub max_violation: f64,
    /// Trial with the largest violation.
    pub worst_trial: Option<usize>,
    /// Trials that were vacuous (e.g. parabolic elements in the codimension check).
    pub vacuous: usize,
    pub pass: bool,
}

/// Accumulates signed slack: an assertion `lhs ≥ rhs` is recorded as
/// `rhs − lhs`, so positive values are failures.
#[derive(Default)]
pub struct Tally {
    assertions: usize,
    violations: usize,
    max_violation: f64,
    worst: Option<usize>,
    vacuous: usize,
    tau: f64,
    trial: usize,
}

impl Tally {
    pub fn new(tau: f64) -> Self {
        Self {
            tau,
            ..Self::default()
        }
    }

    pub fn assertions(&self) -> usize {
        self.assertions
    }

    pub fn violations(&self) -> usize {
        self.violations
    }

    pub fn max_violation(&self) -> f64 {
        self.max_violation
    }

    /// Records one assertion whose failure amount is `excess`.
    pub fn check(&mut self, excess: f64) {
        self.assertions += 1;
        let excess = if excess.is_nan() {
            f64::INFINITY
        } else {
            excess
        };
        if excess > self.tau {
            self.violations += 1;
        }
        if excess > self.max_violation {
            self.max_violation = excess;
            self.worst = Some(self.trial);
        }
    }

    pub fn vacuous(&mut self) {
        self.vacuous += 1;
    }

    fn report(self, name: &str, cfg: &TrialConfig) -> TrialReport {
        TrialReport {
            check: name.to_string(),
            model: cfg.model,
            trials: cfg.trials,
            seed: cfg.seed,
            tau: cfg.tau,
            assertions: self.assertions,
            violations: self.violations,
            max_violation: self.max_violation,
            worst_trial: self.worst,
            vacuous: self.vacuous,
            pass: self.violations == 0,
        }
    }
}

fn run<F>(name: &str, cfg: &TrialConfig, mut trial: F) -> Result<TrialReport, LemmaError>
where
    F: FnMut(&mut ChaCha8Rng, &mut Tally) -> Result<(), LemmaError>,
{
    cfg.validate()?;
    let mut tally = Tally::new(cfg.tau);
    for t in 0..cfg.trials {
        tally.trial = t;
        let mut rng = trial_rng(cfg.seed, t as u64);
        trial(&mut rng, &mut tally)?;
    }
    Ok(tally.report(name, cfg))
}

/// `d_g(x) ≥ d_g(P_C(x))` for a `g`-invariant convex `C`.
pub fn projection_trial(
    rng: &mut ChaCha8Rng,
    model: Model,
    tally: &mut Tally,
) -> Result<(), LemmaError> {
    let inv = random_invariant_set(rng, model)?;
    let x = random_point(rng, model, &inv.conjugator);
    let px = inv.set.project(&x)?;
    tally.check(displacement(&inv.g, &px) - displacement(&inv.g, &x));
    // projection onto the axis attains the translation length
    if let (Kind::Hyperbolic, ConvexSet::Geodesic(..)) = (inv.class.kind, &inv.set) {
        tally.check((displacement(&inv.g, &px) - inv.class.translation_length).abs());
    }
    // points of C are fixed by the projection
    let inside = inv.set.project(&px)?;
    tally.check(dist(&inside, &px) - 1e-12);
    Ok(())
}

pub fn check_projection_claim(cfg: &TrialConfig) -> Result<TrialReport, LemmaError> {
    run("projection_claim", cfg, |rng, t| {
        projection_trial(rng, cfg.model, t)
    })
}

/// Samples `h(t) = d_g(c(t))` along the ray from `P_C(x)` through `x` and
/// checks monotonicity, convexity and strict growth past the start value.
pub fn ray_trial(
    rng: &mut ChaCha8Rng,
    cfg: &TrialConfig,
    tally: &mut Tally,
) -> Result<(), LemmaError> {
    let inv = random_invariant_set(rng, cfg.model)?;
    let x = random_point(rng, cfg.model, &inv.conjugator);
    let c0 = inv.set.project(&x)?;
    let v = log(&c0, &x);
    let speed = v.norm_at(&c0);
    if speed < 1e-6 {
        tally.vacuous();
        return Ok(());
    }
    let unit = v.scale(1.0 / speed);
    let n = cfg.resolution;
    let step = cfg.ray_length / (n - 1) as f64;
    let samples: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let t = k as f64 * step;
            (t, displacement(&inv.g, &exp(&c0, &unit.scale(t))))
        })
        .collect();
    let h0 = samples[0].1;
    for w in samples.windows(2) {
        tally.check(w[0].1 - w[1].1);
        if w[0].1 > h0 + 10.0 * cfg.tau {
            // strict growth: a nonpositive step counts as a failure of size τ⁺
            let rise = w[1].1 - w[0].1;
            tally.check(if rise > 0.0 {
                0.0
            } else {
                2.0 * cfg.tau - rise
            });
        }
    }
    for w in samples.windows(3) {
        tally.check(2.0 * w[1].1 - w[0].1 - w[2].1);
    }
    closed_form_ray(&inv, &c0, &unit, &samples, tally);
    Ok(())
}

/// Rays leaving a rotation centre or an axis orthogonally have explicit
/// displacement: `sinh(h/2) = sinh t · sin(θ/2)` about a point and
/// `cosh h = cosh²t cosh ℓ − sinh²t cos θ` away from an axis.
fn closed_form_ray(
    inv: &InvariantSet,
    c0: &Point,
    unit: &crate::geometry::Tangent,
    samples: &[(f64, f64)],
    tally: &mut Tally,
) {
    let cls = &inv.class;
    match (&inv.set, cls.kind) {
        (ConvexSet::Point(_), Kind::Elliptic) if c0.model() == Model::H2 => {
            for &(t, h) in samples {
                let want = 2.0 * (t.sinh() * (0.5 * cls.rotation).sin()).asinh();
                tally.check((h - want).abs() / want.max(1.0));
            }
        }
        (ConvexSet::Geodesic(a, b), Kind::Hyperbolic) => {
            // only when the ray leaves the axis orthogonally
            let along = crate::geometry::project_to_geodesic(a, b, &exp(c0, &unit.scale(1.0)));
            let Ok(foot) = along else { return };
            if dist(&foot, c0) > 1e-9 {
                return;
            }
            let l = cls.translation_length;
            for &(t, h) in samples {
                let want =
                    (t.cosh().powi(2) * l.cosh() - t.sinh().powi(2) * cls.rotation.cos()).acosh();
                tally.check((h - want).abs() / want.max(1.0));
            }
        }
        _ => {}
    }
}

pub fn check_ray_lemma(cfg: &TrialConfig) -> Result<TrialReport, LemmaError> {
    run("ray_lemma", cfg, |rng, t| ray_trial(rng, cfg, t))
}

/// Commuting families share a point in every sublevel set at or above the
/// infima, and `d_{g₂}(g₁x) = d_{g₂}(x)`.
pub fn commuting_trial(
    rng: &mut ChaCha8Rng,
    cfg: &TrialConfig,
    tally: &mut Tally,
) -> Result<(), LemmaError> {
    use rand::Rng;
    let model = cfg.model;
    let conj = random_conjugator(rng, model);
    let family: Vec<Isometry> = match rng.gen_range(0..3) {
        0 => {
            let g = random_hyperbolic(rng, model, &conj);
            (1..=3).map(|k| g.pow(k)).collect()
        }
        1 => {
            let g = random_elliptic(rng, model, &conj);
            let h = random_elliptic(rng, model, &conj);
            vec![g, h, g * h, g.pow(2)]
        }
        _ => (0..3)
            .map(|_| random_parabolic(rng, model, &conj))
            .collect(),
    };
    let classes: Vec<_> = family.iter().map(classify).collect();
    let mut family = family;
    let mut classes = classes;
    // elliptic powers can land on the identity
    let keep: Vec<bool> = classes.iter().map(|c| c.kind != Kind::Identity).collect();
    let mut k = 0;
    family.retain(|_| {
        k += 1;
        keep[k - 1]
    });
    classes.retain(|c| c.kind != Kind::Identity);
    if family.is_empty() {
        tally.vacuous();
        return Ok(());
    }

    let levels: Vec<f64> = classes
        .iter()
        .map(|c| c.translation_length + rng.gen_range(0.05..1.5))
        .collect();
    let common = common_point(&family[0], &classes[0], &family, &levels)?;
    for ((g, c), t) in family.iter().zip(&classes).zip(&levels) {
        tally.check(displacement(g, &common) - t);
        // part (ii): the infima themselves
        if c.kind != Kind::Parabolic {
            tally.check(displacement(g, &common) - c.translation_length);
        }
    }
    for _ in 0..4 {
        let x = random_point(rng, model, &conj);
        for a in &family {
            for b in &family {
                let lhs = displacement(b, &a.apply(&x));
                let rhs = displacement(b, &x);
                tally.check((lhs - rhs).abs() / rhs.max(1.0));
            }
        }
    }
    Ok(())
}

/// A point of every sublevel set: on the shared axis or centre, or high
/// enough in the shared horoball.
fn common_point(
    g: &Isometry,
    class: &crate::geometry::IsometryClass,
    family: &[Isometry],
    levels: &[f64],
) -> Result<Point, LemmaError> {
    match class.min_set {
        MinSet::Point(p) => Ok(p),
        MinSet::Axis(a, b) => {
            let s = crate::geometry::standardizer(g.model(), &a, &b)?;
            Ok(s.inverse().apply(&Point::origin(g.model())))
        }
        MinSet::Empty(xi) => {
            let s = crate::geometry::standardizer(g.model(), &other_end(&xi), &xi)?;
            let mut height = 1.0f64;
            for (f, t) in family.iter().zip(levels) {
                let m = (s * *f * s.inverse()).entries();
                // a translation by b/d at infinity
                let shift = (m[1] / m[3]).norm();
                height = height.max(shift / (2.0 * (0.5 * t).sinh()));
            }
            let top = Point::new(
                g.model(),
                num_complex::Complex64::new(0.0, 0.0),
                2.0 * height,
            )?;
            Ok(s.inverse().apply(&top))
        }
        MinSet::Everything => Ok(Point::origin(g.model())),
    }
}

fn other_end(xi: &Ideal) -> Ideal {
    match xi {
        Ideal::Infinity => Ideal::real(0.0),
        Ideal::Finite(z) => Ideal::Finite(z + 1.0),
    }
}

pub fn check_commuting_sublevels(cfg: &TrialConfig) -> Result<TrialReport, LemmaError> {
    run("commuting_sublevels", cfg, |rng, t| {
        commuting_trial(rng, cfg, t)
    })
}

/// Axis endpoints of `g` and `gᵐ` agree as sets, and conjugation moves them by the
/// conjugator.
pub fn min_power_trial(
    rng: &mut ChaCha8Rng,
    cfg: &TrialConfig,
    tally: &mut Tally,
) -> Result<(), LemmaError> {
    use rand::Rng;
    let conj = random_conjugator(rng, cfg.model);
    let g0 = random_hyperbolic(rng, cfg.model, &Isometry::identity(cfg.model));
    let g = g0.conjugate_by(&conj);
    let m = rng.gen_range(2..=cfg.max_power.max(2));
    let (a, b) = fixed_points(&g);
    let (am, bm) = fixed_points(&g.pow(m));
    tally.check(axis_gap((a, b), (am, bm)));
    let (a0, b0) = fixed_points(&g0);
    tally.check(axis_gap(
        (a, b),
        (conj.apply_ideal(&a0), conj.apply_ideal(&b0)),
    ));
    Ok(())
}

/// Chordal distance between two unordered endpoint pairs.
fn axis_gap(p: (Ideal, Ideal), q: (Ideal, Ideal)) -> f64 {
    let same = p.0.chordal_dist(&q.0).max(p.1.chordal_dist(&q.1));
    let swapped = p.0.chordal_dist(&q.1).max(p.1.chordal_dist(&q.0));
    same.min(swapped)
}

pub fn check_min_power(cfg: &TrialConfig) -> Result<TrialReport, LemmaError> {
    run("min_power", cfg, |rng, t| min_power_trial(rng, cfg, t))
}

/// Dimension of `Min(g)`, `None` when it is empty.
pub fn min_set_dimension(class: &crate::geometry::IsometryClass, model: Model) -> Option<usize> {
    match class.min_set {
        MinSet::Point(_) => Some(0),
        MinSet::Axis(..) => Some(1),
        MinSet::Empty(_) => None,
        MinSet::Everything => Some(model.dimension()),
    }
}

/// Random words in the generators of the bundled H³ lattices: every
/// nontrivial element has a minimal set of codimension at least two.
pub fn check_codim_h3(cfg: &TrialConfig) -> Result<TrialReport, LemmaError> {
    if cfg.model != Model::H3 {
        return Err(LemmaError::WrongModel(Model::H3));
    }
    let lattices: Vec<_> = crate::lattice::bundled_names()
        .iter()
        .filter_map(|n| bundled(n).ok())
        .filter(|l| l.model == Model::H3)
        .collect();
    let letters: Vec<Vec<(i32, Isometry)>> = lattices.iter().map(|l| l.letters()).collect();
    run("codim_h3", cfg, |rng, tally| {
        use rand::Rng;
        let ls = &letters[rng.gen_range(0..letters.len())];
        let len = rng.gen_range(1..=8);
        let mut g = Isometry::identity(Model::H3);
        for _ in 0..len {
            g = g * ls[rng.gen_range(0..ls.len())].1;
        }
        let class = classify(&g);
        if class.kind == Kind::Identity {
            tally.vacuous();
            return Ok(());
        }
        match min_set_dimension(&class, Model::H3) {
            None => tally.vacuous(),
            Some(d) => tally.check(d as f64 - 1.0),
        }
        Ok(())
    })
}

/// The four H²/H³ checks, plus the codimension check in H³.
pub fn run_all(cfg: &TrialConfig) -> Result<Vec<TrialReport>, LemmaError> {
    let mut out = vec![
        check_projection_claim(cfg)?,
        check_ray_lemma(cfg)?,
        check_commuting_sublevels(cfg)?,
        check_min_power(cfg)?,
    ];
    if cfg.model == Model::H3 {
        out.push(check_codim_h3(cfg)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(model: Model) -> TrialConfig {
        TrialConfig {
            trials: 400,
            ..TrialConfig::with_model(model)
        }
    }

    #[test]
    fn all_checks_pass_in_both_models() {
        for model in [Model::H2, Model::H3] {
            for r in run_all(&small(model)).unwrap() {
                assert!(r.pass, "{r:?}");
                assert!(r.assertions > r.trials / 2, "{r:?}");
            }
        }
    }

    #[test]
    fn diagonal_axis_is_vertical() {
        let g = Isometry::real(2.0, 0.0, 0.0, 0.5).unwrap();
        for m in 1..5 {
            let (a, b) = fixed_points(&g.pow(m));
            assert!(a.chordal_dist(&Ideal::real(0.0)) < 1e-15);
            assert_eq!(b, Ideal::Infinity);
        }
    }

    #[test]
    fn tally_flags_violations() {
        let mut t = Tally::new(1e-9);
        t.check(-1.0);
        t.check(5e-10);
        assert_eq!(t.violations, 0);
        t.check(1e-6);
        t.check(f64::NAN);
        assert_eq!(t.violations, 2);
        assert!(t.max_violation.is_infinite());
    }

    #[test]
    fn configuration_errors() {
        let mut cfg = small(Model::H2);
        assert!(matches!(
            check_codim_h3(&cfg),
            Err(LemmaError::WrongModel(Model::H3))
        ));
        cfg.trials = 0;
        assert!(matches!(check_min_power(&cfg), Err(LemmaError::NoTrials)));
    }

    #[test]
    fn trials_replay_from_seed() {
        let cfg = small(Model::H2);
        let a = check_ray_lemma(&cfg).unwrap();
        let b = check_ray_lemma(&cfg).unwrap();
        assert_eq!(a.max_violation, b.max_violation);
        assert_eq!(a.assertions, b.assertions);
    }
}
