//! Lattices in PSL(2,R) and PSL(2,C): specifications, orbit enumeration,
//! quotient distance, and the power/centralizer machinery.

mod bundled;
mod margulis;
mod orbit;
mod power;
mod spec_io;
mod word;

pub use bundled::{bundled, bundled_names};
pub use margulis::{margulis_components, ElementaryKind, MargulisComponents};
pub use orbit::{
    budget_from_env, max_generator_displacement, orbit_ball, quotient_dist, word_search, Candidate,
    OrbitBall, OrbitCache, OrbitEntry, OrbitOptions, QuotientDist, SearchResult, DEFAULT_BUDGET,
};
pub use power::{bar, centralizer_signature, j_of, CentralizerSig};
pub use word::Word;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{classify, dist, GeometryError, Ideal, Isometry, Kind, MinSet, Model, Point};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("enumeration budget exceeded ({nodes} nodes, cap {cap})")]
    BudgetExceeded { nodes: usize, cap: usize },
    #[error("element is not semisimple (identity or parabolic)")]
    NotSemisimple,
    #[error("identity element is not allowed here")]
    IdentityInput,
    #[error("centralizer chain did not stabilize within ν = {0} steps")]
    CentralizerChainUnstable(u32),
    #[error("configuration is not elementary: {0}")]
    NotElementary(String),
    #[error("unknown lattice `{0}` (bundled: {1})")]
    UnknownLattice(String, String),
    #[error("invalid lattice spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Clone, Debug, Serialize)]
pub struct Generator {
    pub name: String,
    pub element: Isometry,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Covolume {
    pub value: f64,
    pub source: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExcludedBall {
    pub center: [f64; 2],
    pub radius: f64,
}

/// A region containing a fundamental domain: a horizontal box minus open
/// Euclidean balls centred on the boundary, above a height floor.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Region {
    pub x_range: (f64, f64),
    /// Second horizontal coordinate (H³ only).
    pub x2_range: Option<(f64, f64)>,
    /// Lower bound for the height of region points.
    pub floor: f64,
    pub excluded_balls: Vec<ExcludedBall>,
}

impl Region {
    /// Horizontal position and ball exclusion; heights are unconstrained.
    pub fn contains(&self, p: &Point) -> bool {
        let w = p.w();
        let in_x = w.re >= self.x_range.0 && w.re <= self.x_range.1;
        let in_x2 = match self.x2_range {
            Some((lo, hi)) => w.im >= lo && w.im <= hi,
            None => true,
        };
        in_x && in_x2 && !self.excludes(p)
    }

    /// True when `p` lies strictly inside an excluded ball.
    pub fn excludes(&self, p: &Point) -> bool {
        self.excluded_balls.iter().any(|b| {
            let c = Complex64::new(b.center[0], b.center[1]);
            (p.w() - c).norm_sqr() + p.height().powi(2) < b.radius * b.radius
        })
    }

    pub fn x_center(&self) -> Complex64 {
        let c1 = 0.5 * (self.x_range.0 + self.x_range.1);
        let c2 = self.x2_range.map_or(0.0, |(lo, hi)| 0.5 * (lo + hi));
        Complex64::new(c1, c2)
    }
}

/// A translation `z ↦ z + β` among the generators.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Translation {
    letter: i32,
    beta: Complex64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LatticeSpec {
    pub name: String,
    pub model: Model,
    pub generators: Vec<Generator>,
    pub known_covolume: Option<Covolume>,
    pub known_rank: Option<u32>,
    pub region: Region,
    pub basepoint: Point,
    #[serde(skip)]
    translations: Vec<Translation>,
    /// Short parabolic words fixing cusps of the region other than `∞`,
    /// used as extra search letters.
    #[serde(skip)]
    cusp_letters: Vec<(Word, Isometry)>,
}

/// Result of moving a point into the region by group elements.
#[derive(Clone, Debug)]
pub struct Reduced {
    pub element: Isometry,
    pub word: Word,
    pub point: Point,
}

const REDUCE_CAP: usize = 10_000;

impl LatticeSpec {
    pub fn new(
        name: impl Into<String>,
        model: Model,
        generators: Vec<Generator>,
        known_covolume: Option<Covolume>,
        known_rank: Option<u32>,
        region: Region,
        basepoint: Point,
    ) -> Result<Self, LatticeError> {
        if generators.is_empty() {
            return Err(LatticeError::InvalidSpec("no generators".into()));
        }
        if generators.iter().any(|g| g.element.model() != model) || basepoint.model() != model {
            return Err(LatticeError::Geometry(GeometryError::ModelMismatch));
        }
        if let Some(c) = &known_covolume {
            if !(c.value > 0.0) {
                return Err(LatticeError::InvalidSpec(
                    "covolume must be positive".into(),
                ));
            }
        }
        if model == Model::H3 && region.x2_range.is_none() {
            return Err(LatticeError::InvalidSpec("H3 region needs x2_range".into()));
        }
        let mut spec = Self {
            name: name.into(),
            model,
            generators,
            known_covolume,
            known_rank,
            region,
            basepoint,
            translations: Vec::new(),
            cusp_letters: Vec::new(),
        };
        spec.translations = spec.find_translations();
        spec.cusp_letters = spec.find_cusp_letters()?;
        Ok(spec)
    }

    /// Generators and their inverses, ordered g1, g1⁻¹, g2, g2⁻¹, …; letter
    /// `+k` is generator `k − 1` and `−k` its inverse.
    pub fn letters(&self) -> Vec<(i32, Isometry)> {
        let mut out = Vec::with_capacity(2 * self.generators.len());
        for (i, g) in self.generators.iter().enumerate() {
            let l = i as i32 + 1;
            out.push((l, g.element));
            out.push((-l, g.element.inverse()));
        }
        out
    }

    /// [`letters`](Self::letters) followed by the cusp letters, coded
    /// `±(n + k + 1)` for `n` generators.
    pub fn search_letters(&self) -> Vec<(i32, Isometry)> {
        let mut out = self.letters();
        let n = self.generators.len() as i32;
        for (k, (_, g)) in self.cusp_letters.iter().enumerate() {
            let code = n + k as i32 + 1;
            out.push((code, *g));
            out.push((-code, g.inverse()));
        }
        out
    }

    /// Rewrites a word over [`search_letters`](Self::search_letters) in the
    /// generators.
    pub fn expand(&self, word: &Word) -> Word {
        let n = self.generators.len() as i32;
        if word.0.iter().all(|l| l.abs() <= n) {
            return word.clone();
        }
        let mut out = Vec::with_capacity(word.len());
        for &l in &word.0 {
            if l.abs() <= n {
                out.push(l);
            } else {
                let w = &self.cusp_letters[(l.abs() - n - 1) as usize].0;
                if l > 0 {
                    out.extend_from_slice(&w.0);
                } else {
                    out.extend(w.inverse().0);
                }
            }
        }
        Word(out).free_reduce()
    }

    /// Parabolic words of length at most 3 whose fixed point is a cusp of
    /// the region, i.e. the region reaches down to it.
    fn find_cusp_letters(&self) -> Result<Vec<(Word, Isometry)>, LatticeError> {
        let found = word_search(
            &self.letters(),
            Isometry::identity(self.model),
            3,
            100_000,
            |_| true,
        )?;
        let centre = self.region.x_center();
        let mut out: Vec<(Word, Isometry, Complex64)> = Vec::new();
        for i in 1..found.len() {
            let g = found.element(i);
            let class = classify(&g);
            let (Kind::Parabolic, MinSet::Empty(Ideal::Finite(xi))) = (class.kind, class.min_set)
            else {
                continue;
            };
            let nudged = xi + (centre - xi) * 1e-12;
            let Ok(probe) = Point::new(self.model, nudged, 1e-4) else {
                continue;
            };
            if !self.region.contains(&probe) || out.iter().any(|(_, _, z)| (z - xi).norm() < 1e-9) {
                continue;
            }
            out.push((found.word(i), g, xi));
        }
        Ok(out.into_iter().map(|(w, g, _)| (w, g)).collect())
    }

    pub fn generator_elements(&self) -> Vec<Isometry> {
        self.generators.iter().map(|g| g.element).collect()
    }

    pub fn generator_names(&self) -> Vec<String> {
        self.generators.iter().map(|g| g.name.clone()).collect()
    }

    pub fn letter_element(&self, letter: i32) -> Isometry {
        let g = self.generators[(letter.unsigned_abs() - 1) as usize].element;
        if letter > 0 {
            g
        } else {
            g.inverse()
        }
    }

    pub fn evaluate(&self, word: &Word) -> Isometry {
        word.0
            .iter()
            .fold(Isometry::identity(self.model), |acc, &l| {
                acc * self.letter_element(l)
            })
    }

    fn find_translations(&self) -> Vec<Translation> {
        let mut basis: Vec<Translation> = Vec::new();
        for (i, g) in self.generators.iter().enumerate() {
            let [a, b, c, d] = g.element.entries();
            let scale = g.element.max_abs_entry();
            if c.norm() > 1e-12 * scale || (a - d).norm() > 1e-12 * scale {
                continue;
            }
            let beta = b / d;
            if beta.norm() < 1e-12 {
                continue;
            }
            let t = Translation {
                letter: i as i32 + 1,
                beta,
            };
            match basis.len() {
                0 => basis.push(t),
                1 => {
                    let cross = (basis[0].beta.conj() * beta).im;
                    if cross.abs() > 1e-9 * basis[0].beta.norm() * beta.norm() {
                        basis.push(t);
                    } else if beta.norm() < basis[0].beta.norm() {
                        basis[0] = t;
                    }
                }
                _ => {}
            }
        }
        basis
    }

    /// Shortest translation length among the translation generators.
    pub fn min_translation(&self) -> Option<f64> {
        self.translations
            .iter()
            .map(|t| t.beta.norm())
            .min_by(|a, b| a.total_cmp(b))
    }

    /// Moves `p` into the region: reduce modulo the translation lattice,
    /// then apply whichever non-translation generator (or inverse) raises
    /// the height most, and repeat. Lattices without translation generators
    /// fall back to greedy descent of the distance to the basepoint.
    pub fn reduce(&self, p: &Point) -> Reduced {
        let mut applied: Vec<i32> = Vec::new();
        let mut element = Isometry::identity(self.model);
        let mut point = *p;
        let letters = self.letters();
        if self.translations.is_empty() {
            for _ in 0..REDUCE_CAP {
                let here = dist(&point, &self.basepoint);
                let best = letters
                    .iter()
                    .map(|(l, g)| (*l, *g, g.apply(&point)))
                    .map(|(l, g, q)| (l, g, q, dist(&q, &self.basepoint)))
                    .min_by(|a, b| a.3.total_cmp(&b.3));
                match best {
                    Some((l, g, q, d)) if d < here - 1e-12 => {
                        applied.push(l);
                        element = g * element;
                        point = q;
                    }
                    _ => break,
                }
            }
        } else {
            let skip: Vec<i32> = self.translations.iter().map(|t| t.letter).collect();
            for _ in 0..REDUCE_CAP {
                self.reduce_translations(&mut point, &mut element, &mut applied);
                let h = point.height();
                let best = letters
                    .iter()
                    .filter(|(l, _)| !skip.contains(&l.abs()))
                    .map(|(l, g)| (*l, *g, g.apply(&point)))
                    .max_by(|a, b| a.2.height().total_cmp(&b.2.height()));
                match best {
                    Some((l, g, q)) if q.height() > h * (1.0 + 1e-12) => {
                        applied.push(l);
                        element = g * element;
                        point = q;
                    }
                    _ => break,
                }
            }
        }
        applied.reverse();
        Reduced {
            element,
            word: Word(applied),
            point,
        }
    }

    fn reduce_translations(
        &self,
        point: &mut Point,
        element: &mut Isometry,
        applied: &mut Vec<i32>,
    ) {
        let rel = point.w() - self.region.x_center();
        let counts: Vec<i64> = match self.translations.as_slice() {
            [t] => {
                let n = (rel * t.beta.conj()).re / t.beta.norm_sqr();
                vec![n.round() as i64]
            }
            [t1, t2] => {
                // solve rel = n1 β1 + n2 β2 over the reals
                let (a, b, c, d) = (t1.beta.re, t2.beta.re, t1.beta.im, t2.beta.im);
                let det = a * d - b * c;
                let n1 = (d * rel.re - b * rel.im) / det;
                let n2 = (-c * rel.re + a * rel.im) / det;
                vec![n1.round() as i64, n2.round() as i64]
            }
            _ => return,
        };
        for (t, n) in self.translations.iter().zip(counts) {
            if n == 0 {
                continue;
            }
            let letter = if n > 0 { -t.letter } else { t.letter };
            let g = self.letter_element(letter);
            let g_n = g.pow(n.abs());
            *point = g_n.apply(point);
            *element = g_n * *element;
            applied.extend(std::iter::repeat_n(letter, n.unsigned_abs() as usize));
        }
    }
}
