use std::collections::HashSet;

use serde::Serialize;

use super::{MorseConfig, MorseError};
use crate::geometry::{
    classify, displacement, grad_displacement, Isometry, IsometryClass, Kind, Point, Tangent,
};
use crate::lattice::{bar, orbit_ball, LatticeSpec, OrbitCache};

/// `ψ` and `∇ψ` at a point.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PsiValue {
    pub psi: f64,
    pub grad: Tangent,
    /// Number of nonzero terms.
    pub terms: usize,
}

/// Value and `dφ/dd` of one term, or `None` outside its support.
fn term(
    cfg: &MorseConfig,
    class: &IsometryClass,
    d: f64,
) -> Result<Option<(f64, f64)>, MorseError> {
    let eps = cfg.epsilon();
    let mu = cfg.mu() as f64;
    let (arg, factor) = match class.kind {
        Kind::Identity => return Ok(None),
        Kind::Parabolic => (d, 1.0),
        Kind::Elliptic => (mu * d, mu),
        Kind::Hyperbolic => {
            let ell = class.translation_length;
            if ell >= eps {
                return Ok(None);
            }
            (d - ell, 1.0)
        }
    };
    if arg >= eps {
        return Ok(None);
    }
    if arg <= cfg.tau_zero {
        return Err(MorseError::OnSingularSet(arg));
    }
    debug_assert!(d <= 2.0 * eps, "support radius violated: d = {d}");
    Ok(Some((
        cfg.cutoff_f(arg)?,
        factor * cfg.cutoff_f_prime(arg)?,
    )))
}

/// `φ_γ̄(x)` from the case table: parabolic `f(d)`, elliptic `f(μd)`,
/// hyperbolic `f(d − ℓ)` when `ℓ < ε`, and 0 otherwise.
pub fn phi(g_bar: &Isometry, x: &Point, cfg: &MorseConfig) -> Result<f64, MorseError> {
    let class = classify(g_bar);
    match term(cfg, &class, displacement(g_bar, x)) {
        Ok(t) => Ok(t.map_or(0.0, |(v, _)| v)),
        Err(MorseError::OnSingularSet(a)) => Err(MorseError::SingularArgument(a)),
        Err(e) => Err(e),
    }
}

/// Evaluates `ψ` with a reusable orbit cache. Candidates are the
/// nontrivial elements with displacement at most `2εμ`; each contributes
/// `φ` of its bar.
pub struct PsiEvaluator<'a> {
    lattice: &'a LatticeSpec,
    cfg: &'a MorseConfig,
    cache: OrbitCache,
    bars: Vec<(Isometry, IsometryClass)>,
    built_at: usize,
    pub evaluations: usize,
}

impl<'a> PsiEvaluator<'a> {
    pub fn new(lattice: &'a LatticeSpec, cfg: &'a MorseConfig) -> Self {
        Self {
            lattice,
            cfg,
            cache: OrbitCache::new(cfg.cache_slack, cfg.orbit_options()),
            bars: Vec::new(),
            built_at: 0,
            evaluations: 0,
        }
    }

    pub fn lattice(&self) -> &LatticeSpec {
        self.lattice
    }

    pub fn config(&self) -> &MorseConfig {
        self.cfg
    }

    fn support_radius(&self) -> f64 {
        2.0 * self.cfg.epsilon() * self.cfg.mu() as f64
    }

    fn refresh(&mut self, x: &Point) -> Result<(), MorseError> {
        let r = self.support_radius();
        self.cache.candidates(self.lattice, x, r)?;
        if self.cache.rebuilds != self.built_at {
            let cands = self.cache.candidates(self.lattice, x, r)?;
            let (m, nu) = (self.cfg.m() as u32, self.cfg.nu);
            let mut bars = Vec::with_capacity(cands.len());
            for c in cands {
                let b = if c.class.kind == Kind::Hyperbolic {
                    bar(&c.element, m, nu)?
                } else {
                    c.element
                };
                let class = if b.key() == c.element.key() {
                    c.class
                } else {
                    classify(&b)
                };
                bars.push((b, class));
            }
            self.bars = bars;
            self.built_at = self.cache.rebuilds;
        }
        Ok(())
    }

    /// Pruned orbit search is only reliable near the region, so terms are
    /// found at the reduced point `y = gx` and conjugated back by `g`.
    fn reduced(&mut self, x: &Point) -> Result<(Point, Option<Isometry>), MorseError> {
        let red = self.lattice.reduce(x);
        self.refresh(&red.point)?;
        let back = (!red.element.is_identity(1e-12)).then(|| red.element.inverse());
        Ok((red.point, back))
    }

    pub fn eval(&mut self, x: &Point, with_grad: bool) -> Result<PsiValue, MorseError> {
        let (y, back) = self.reduced(x)?;
        self.evaluations += 1;
        let mut psi = 0.0;
        let mut grad = Tangent::ZERO;
        let mut terms = 0;
        for (b, class) in &self.bars {
            if let Some((v, coeff)) = term(self.cfg, class, displacement(b, &y))? {
                psi += v;
                terms += 1;
                if with_grad {
                    let at_x = back.map_or(*b, |h| b.conjugate_by(&h));
                    grad = grad.add(grad_displacement(&at_x, x)?.scale(coeff));
                }
            }
        }
        Ok(PsiValue { psi, grad, terms })
    }

    pub fn psi(&mut self, x: &Point) -> Result<f64, MorseError> {
        Ok(self.eval(x, false)?.psi)
    }

    /// The distinct bars with `φ > 0` at `x`.
    pub fn sigma(&mut self, x: &Point) -> Result<Vec<Isometry>, MorseError> {
        let (y, back) = self.reduced(x)?;
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (b, class) in &self.bars {
            if term(self.cfg, class, displacement(b, &y))?.is_some() {
                let at_x = back.map_or(*b, |h| b.conjugate_by(&h));
                if seen.insert(at_x.key()) {
                    out.push(at_x);
                }
            }
        }
        Ok(out)
    }
}

/// `ψ(x) = Σ_{γ ≠ 1} φ_γ̄(x)`.
pub fn psi(l: &LatticeSpec, x: &Point, cfg: &MorseConfig) -> Result<f64, MorseError> {
    PsiEvaluator::new(l, cfg).psi(x)
}

/// Riemannian gradient of `ψ` in Euclidean components.
pub fn grad_psi(l: &LatticeSpec, x: &Point, cfg: &MorseConfig) -> Result<Tangent, MorseError> {
    Ok(PsiEvaluator::new(l, cfg).eval(x, true)?.grad)
}

/// `Σ_x = {γ̄ : φ_γ̄(x) > 0}`.
pub fn sigma_set(
    l: &LatticeSpec,
    x: &Point,
    cfg: &MorseConfig,
) -> Result<Vec<Isometry>, MorseError> {
    PsiEvaluator::new(l, cfg).sigma(x)
}

/// `ψ(x) = 0`, i.e. `Σ_x = ∅`.
pub fn is_thick(l: &LatticeSpec, x: &Point, cfg: &MorseConfig) -> Result<bool, MorseError> {
    match psi(l, x, cfg) {
        Ok(v) => Ok(v == 0.0),
        Err(MorseError::OnSingularSet(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Height above which the shortest translation moves points less than ε,
/// so no point above it is thick: `min|β| / (2 sinh(ε/2))`.
pub fn thickness_ceiling(l: &LatticeSpec, cfg: &MorseConfig) -> Option<f64> {
    l.min_translation()
        .map(|beta| beta / (2.0 * (0.5 * cfg.epsilon()).sinh()))
}

/// Smallest displacement at `x` of a nontrivial element within radius `r`
/// (infinite if there is none).
pub fn min_nontrivial_displacement(
    l: &LatticeSpec,
    x: &Point,
    r: f64,
    cfg: &MorseConfig,
) -> Result<f64, MorseError> {
    // the minimum is conjugation invariant, so search at the reduced point
    let ball = orbit_ball(l, &l.reduce(x).point, r, &cfg.orbit_options())?;
    Ok(ball
        .nontrivial()
        .filter(|e| !e.element.is_identity(1e-9))
        .map(|e| e.displacement)
        .fold(f64::INFINITY, f64::min))
}
