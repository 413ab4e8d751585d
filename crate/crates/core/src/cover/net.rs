use serde::Serialize;

use super::cells::CellCover;
use super::lift::LiftIndex;
use super::probe::ProbeSequence;
use super::CoverError;
use std::collections::VecDeque;

use crate::geometry::{dist, exp, geodesic_point, log, Model, Point, Tangent};
use crate::lattice::LatticeSpec;
use crate::morse::{
    flow_to_sublevel, settle_to_zero, thickness_ceiling, MorseConfig, MorseError, PsiEvaluator,
};
use num_complex::Complex64;

#[derive(Clone, Debug, Serialize)]
pub struct NetOptions {
    /// Quasi-random probes in the first pass.
    pub probes: usize,
    pub seed: u64,
    /// Fresh probes used to certify coverage after each round.
    pub verification_probes: usize,
    /// Ring radii around new points, in units of α.
    pub ring_radii: Vec<f64>,
    /// Directions per ring (H²; H³ uses a fixed spherical set).
    pub ring_angles: usize,
    /// Radius of the lift index; `None` means `2α`.
    pub lift_radius: Option<f64>,
    pub lift_margin: f64,
    pub max_rounds: usize,
}

impl Default for NetOptions {
    fn default() -> Self {
        Self {
            probes: 2000,
            seed: 1,
            verification_probes: 10_000,
            ring_radii: vec![1.2, 1.6, 2.0],
            ring_angles: 12,
            lift_radius: None,
            lift_margin: 2.5,
            max_rounds: 8,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct NetStats {
    pub global_probes: usize,
    pub ring_probes: usize,
    pub verification_probes: usize,
    /// Probes that needed the flow (`ψ > 0` at the start).
    pub flowed: usize,
    pub flow_iterations: usize,
    pub skipped_singular: usize,
    pub rounds: usize,
    /// Uncovered verification probes found (and inserted) before the last round.
    pub uncovered_repaired: usize,
    pub lifts: usize,
    pub search_nodes: usize,
    pub psi_evaluations: usize,
}

/// A maximal α-discrete subset of the thick part, stored as points of the
/// region, with the index of their lifts near the region.
#[derive(Clone, Debug, Serialize)]
pub struct Net {
    pub lattice: String,
    pub model: Model,
    pub alpha: f64,
    pub ceiling: f64,
    pub points: Vec<Point>,
    pub coverage_certificate: f64,
    pub stats: NetStats,
    #[serde(skip)]
    pub index: LiftIndex,
}

fn ring_directions(model: Model, angles: usize) -> Vec<(f64, f64, f64)> {
    match model {
        Model::H2 => (0..angles)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / angles as f64;
                (t.cos(), 0.0, t.sin())
            })
            .collect(),
        Model::H3 => {
            // Fibonacci sphere
            let n = 2 * angles;
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
                    let r = (1.0 - z * z).sqrt();
                    let t = golden * k as f64;
                    (r * t.cos(), r * t.sin(), z)
                })
                .collect()
        }
    }
}

struct Builder<'a> {
    l: &'a LatticeSpec,
    cfg: &'a MorseConfig,
    ev: PsiEvaluator<'a>,
    alpha: f64,
    points: Vec<Point>,
    index: LiftIndex,
    stats: NetStats,
    directions: Vec<(f64, f64, f64)>,
    radii: Vec<f64>,
}

impl Builder<'_> {
    /// Flows a probe into `ψ = 0` and reduces it into the region; `None`
    /// for probes that land on the singular set.
    fn thicken(&mut self, probe: usize, p: &Point) -> Result<Option<Point>, CoverError> {
        let fail = |source| CoverError::FlowFailure { probe, source };
        let start = match self.ev.psi(p) {
            Ok(v) => v,
            Err(MorseError::OnSingularSet(_)) => {
                self.stats.skipped_singular += 1;
                return Ok(None);
            }
            Err(e) => return Err(fail(e)),
        };
        let mut x = *p;
        if start > 0.0 {
            self.stats.flowed += 1;
            let out = flow_to_sublevel(&mut self.ev, &x, self.cfg.delta_floor).map_err(fail)?;
            self.stats.flow_iterations += out.iterations;
            x = settle_to_zero(&mut self.ev, &out.point).map_err(fail)?;
        }
        let y = self.l.reduce(&x).point;
        if self.index.cover().dist(&y) > 1e-9 {
            return Err(CoverError::OutsideRegion(format!(
                "thick point {:?} reduced to {:?}, outside the region cover",
                x.coords(),
                y.coords()
            )));
        }
        Ok(Some(y))
    }

    fn covered(&self, q: &Point) -> bool {
        self.index
            .nearest(q, self.alpha)
            .is_some_and(|(_, d)| d < self.alpha)
    }

    fn try_insert(&mut self, q: Point) -> Result<bool, CoverError> {
        if self.covered(&q) {
            return Ok(false);
        }
        let id = self.points.len();
        self.points.push(q);
        self.index.insert(self.l, id, &q)?;
        Ok(true)
    }

    fn ring_probes(&self, p: &Point) -> Vec<Point> {
        let h = p.height();
        let mut out = Vec::with_capacity(self.radii.len() * self.directions.len());
        for &r in &self.radii {
            for &(a, b, c) in &self.directions {
                let v = Tangent::new(Complex64::new(a * h, b * h), c * h);
                out.push(exp(p, &v.scale(r * self.alpha)));
            }
        }
        out
    }

    /// Points at distance just over `α` from both `p` and `q` (H² only):
    /// every hole in the cover bounded by two circles has such a corner.
    fn corner_probes(&self, p: &Point, q: &Point) -> Vec<Point> {
        let d = dist(p, q);
        let rho = self.alpha * (1.0 + 1e-7);
        if p.model() != Model::H2 || d <= 0.0 || d >= 2.0 * rho {
            return Vec::new();
        }
        let m = geodesic_point(p, q, 0.5 * d);
        let toward = log(&m, q);
        let norm = toward.norm_at(&m);
        let perp = Tangent::new(Complex64::new(-toward.dh, 0.0), toward.dw.re).scale(1.0 / norm);
        let s = (rho.cosh() / (0.5 * d).cosh()).acosh();
        vec![exp(&m, &perp.scale(s)), exp(&m, &perp.scale(-s))]
    }

    /// Ring and corner probes around each new point until nothing is added.
    fn grow(&mut self, fresh: Vec<usize>) -> Result<(), CoverError> {
        let mut queue: VecDeque<usize> = fresh.into();
        while let Some(id) = queue.pop_front() {
            let p = self.points[id];
            let mut probes = self.ring_probes(&p);
            for (lift, _) in self.index.query(&p, 2.0 * self.alpha) {
                let other = &self.index.lifts()[lift];
                if other.net != id || !other.element.is_identity(1e-9) {
                    probes.extend(self.corner_probes(&p, &other.point));
                }
            }
            for q in probes {
                self.stats.ring_probes += 1;
                let n = self.stats.ring_probes;
                if let Some(y) = self.thicken(n, &q)? {
                    if self.try_insert(y)? {
                        queue.push_back(self.points.len() - 1);
                    }
                }
            }
        }
        Ok(())
    }
}

/// Greedy maximal α-discrete net of the thick part with default options.
pub fn build_net(l: &LatticeSpec, cfg: &MorseConfig, probes: usize) -> Result<Net, CoverError> {
    build_net_with(
        l,
        cfg,
        &NetOptions {
            probes,
            ..NetOptions::default()
        },
    )
}

/// Greedy insertion over a quasi-random probe sequence, each probe flowed
/// into the thick part and reduced into the region, followed by ring passes
/// around every new point and a verification pass with fresh probes.
pub fn build_net_with(
    l: &LatticeSpec,
    cfg: &MorseConfig,
    opts: &NetOptions,
) -> Result<Net, CoverError> {
    if opts.probes == 0 {
        return Err(CoverError::InvalidArgument(
            "probes must be at least 1".into(),
        ));
    }
    cfg.validate()?;
    let alpha = cfg.alpha();
    let ceiling = thickness_ceiling(l, cfg).ok_or_else(|| {
        CoverError::InvalidArgument(format!(
            "lattice `{}` has no translation generator to bound the thick part's height",
            l.name
        ))
    })?;
    let radius = opts.lift_radius.unwrap_or(2.0 * alpha);
    if radius < alpha {
        return Err(CoverError::InvalidArgument(
            "lift radius must be at least alpha".into(),
        ));
    }
    let cover = CellCover::new(l.model, &l.region, ceiling);
    let mut b = Builder {
        l,
        cfg,
        ev: PsiEvaluator::new(l, cfg),
        alpha,
        points: Vec::new(),
        index: LiftIndex::new(cover, radius, opts.lift_margin, cfg.budget),
        stats: NetStats::default(),
        directions: ring_directions(l.model, opts.ring_angles.max(1)),
        radii: opts.ring_radii.clone(),
    };

    let mut fresh = Vec::new();
    for (i, p) in ProbeSequence::new(l.model, &l.region, ceiling, opts.seed, 0)
        .take(opts.probes)
        .enumerate()
    {
        b.stats.global_probes += 1;
        if let Some(y) = b.thicken(i, &p)? {
            if b.try_insert(y)? {
                fresh.push(b.points.len() - 1);
            }
        }
    }
    b.grow(fresh)?;

    let mut certificate = 0.0;
    let mut uncovered = 0;
    for round in 0..opts.max_rounds.max(1) {
        b.stats.rounds = round + 1;
        let mut misses = Vec::new();
        let mut checked = 0usize;
        let seq = ProbeSequence::new(l.model, &l.region, ceiling, opts.seed, 1 + round as u64);
        for (i, p) in seq.take(opts.verification_probes).enumerate() {
            b.stats.verification_probes += 1;
            if let Some(y) = b.thicken(opts.probes + i, &p)? {
                checked += 1;
                if !b.covered(&y) {
                    misses.push(y);
                }
            }
        }
        uncovered = misses.len();
        certificate = if checked == 0 {
            1.0
        } else {
            1.0 - uncovered as f64 / checked as f64
        };
        if misses.is_empty() {
            break;
        }
        let mut fresh = Vec::new();
        for y in misses {
            if b.try_insert(y)? {
                fresh.push(b.points.len() - 1);
            }
        }
        b.stats.uncovered_repaired += uncovered;
        b.grow(fresh)?;
    }
    if uncovered > 0 {
        return Err(CoverError::CoverageIncomplete {
            fraction: certificate,
            uncovered,
        });
    }
    b.stats.lifts = b.index.lifts().len();
    b.stats.search_nodes = b.index.search_nodes;
    b.stats.psi_evaluations = b.ev.evaluations;
    Ok(Net {
        lattice: l.name.clone(),
        model: l.model,
        alpha,
        ceiling,
        points: b.points,
        coverage_certificate: certificate,
        stats: b.stats,
        index: b.index,
    })
}
