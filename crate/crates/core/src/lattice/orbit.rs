use std::collections::HashSet;

use serde::Serialize;

use super::{LatticeError, LatticeSpec, Word};
use crate::geometry::{classify, dist, ElementKey, Isometry, IsometryClass, Kind, Point};

/// Node cap for a single enumeration unless `THICKNET_BUDGET` overrides it.
pub const DEFAULT_BUDGET: usize = 2_000_000;

pub fn budget_from_env() -> usize {
    std::env::var("THICKNET_BUDGET")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&b: &usize| b > 0)
        .unwrap_or(DEFAULT_BUDGET)
}

#[derive(Clone, Debug)]
struct Node {
    parent: u32,
    letter: i32,
    element: Isometry,
}

/// Breadth-first enumeration of words whose elements pass a predicate.
#[derive(Clone, Debug)]
pub struct SearchResult {
    nodes: Vec<Node>,
    /// Longest word length that produced admitted elements.
    pub depth: usize,
    /// True when the frontier emptied before the length cap.
    pub exhausted: bool,
}

impl SearchResult {
    /// Number of admitted elements, the identity included.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn element(&self, i: usize) -> Isometry {
        self.nodes[i].element
    }

    pub fn word(&self, mut i: usize) -> Word {
        let mut letters = Vec::new();
        while i != 0 {
            letters.push(self.nodes[i].letter);
            i = self.nodes[i].parent as usize;
        }
        letters.reverse();
        Word(letters)
    }

    pub fn elements(&self) -> impl Iterator<Item = &Isometry> {
        self.nodes.iter().map(|n| &n.element)
    }
}

/// Enumerates the identity and every freely reduced word (extended on the
/// right, letters in generator order) whose element passes `admit`, where
/// each prefix must also pass. Elements are deduplicated projectively, so
/// each is recorded under its first, shortlex-least, discovered word.
pub fn word_search<F>(
    letters: &[(i32, Isometry)],
    identity: Isometry,
    max_len: usize,
    budget: usize,
    mut admit: F,
) -> Result<SearchResult, LatticeError>
where
    F: FnMut(&Isometry) -> bool,
{
    let mut nodes = vec![Node {
        parent: 0,
        letter: 0,
        element: identity,
    }];
    let mut seen: HashSet<ElementKey> = HashSet::new();
    seen.insert(identity.key());
    let mut frontier = vec![0usize];
    let mut depth = 0;
    while !frontier.is_empty() && depth < max_len {
        let mut next = Vec::new();
        for &i in &frontier {
            let last = nodes[i].letter;
            let base = nodes[i].element;
            for &(l, g) in letters {
                if i != 0 && l == -last {
                    continue;
                }
                let e = base * g;
                if !seen.insert(e.key()) {
                    continue;
                }
                if admit(&e) {
                    if nodes.len() >= budget {
                        return Err(LatticeError::BudgetExceeded {
                            nodes: nodes.len(),
                            cap: budget,
                        });
                    }
                    next.push(nodes.len());
                    nodes.push(Node {
                        parent: i as u32,
                        letter: l,
                        element: e,
                    });
                }
            }
        }
        if !next.is_empty() {
            depth += 1;
        }
        frontier = next;
    }
    Ok(SearchResult {
        nodes,
        depth,
        exhausted: frontier.is_empty(),
    })
}

/// Largest displacement of a generator at `x`.
pub fn max_generator_displacement(l: &LatticeSpec, x: &Point) -> f64 {
    l.generators
        .iter()
        .map(|g| dist(x, &g.element.apply(x)))
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct OrbitOptions {
    /// Upper bound on the pruning margin `2·max_gen_displacement(x)`.
    pub margin_cap: f64,
    pub max_len: usize,
    pub budget: usize,
    /// Run the two-letter extension check and record the result.
    pub certify: bool,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        Self {
            margin_cap: 3.0,
            max_len: 256,
            budget: budget_from_env(),
            certify: false,
        }
    }
}

impl OrbitOptions {
    fn margin(&self, l: &LatticeSpec, x: &Point) -> f64 {
        (2.0 * max_generator_displacement(l, x)).min(self.margin_cap)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitEntry {
    pub word: Word,
    pub element: Isometry,
    pub point: Point,
    pub displacement: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitBall {
    pub basepoint: Point,
    pub radius: f64,
    pub prune_radius: f64,
    /// Identity first, then in discovery (shortlex) order.
    pub entries: Vec<OrbitEntry>,
    pub exhaustive_to: usize,
    /// Whether extending every kept word by two letters finds nothing new
    /// within the radius; `None` when not requested.
    pub stable: Option<bool>,
}

impl OrbitBall {
    pub fn nontrivial(&self) -> impl Iterator<Item = &OrbitEntry> {
        self.entries.iter().skip(1)
    }
}

/// Every element `γ` with `d(x, γx) ≤ r` reachable by breadth-first word
/// search pruned at `r + min(2·max_gen_displacement(x), margin_cap)`.
pub fn orbit_ball(
    l: &LatticeSpec,
    x: &Point,
    r: f64,
    opts: &OrbitOptions,
) -> Result<OrbitBall, LatticeError> {
    if r < 0.0 {
        return Ok(OrbitBall {
            basepoint: *x,
            radius: r,
            prune_radius: r,
            entries: Vec::new(),
            exhaustive_to: 0,
            stable: Some(true),
        });
    }
    let prune = r + opts.margin(l, x);
    let letters = l.search_letters();
    let found = word_search(
        &letters,
        crate::geometry::Isometry::identity(l.model),
        opts.max_len,
        opts.budget,
        |g| dist(x, &g.apply(x)) <= prune,
    )?;
    let mut entries = Vec::new();
    let mut keys = HashSet::new();
    for i in 0..found.len() {
        let e = found.element(i);
        let p = e.apply(x);
        let d = dist(x, &p);
        if d <= r {
            keys.insert(e.key());
            entries.push(OrbitEntry {
                word: l.expand(&found.word(i)),
                element: e,
                point: p,
                displacement: d,
            });
        }
    }
    let stable = if opts.certify {
        let mut ok = found.exhausted;
        'outer: for e in found.elements() {
            for &(_, g1) in &letters {
                let e1 = *e * g1;
                for &(_, g2) in &letters {
                    let e2 = e1 * g2;
                    if dist(x, &e2.apply(x)) <= r && !keys.contains(&e2.key()) {
                        ok = false;
                        break 'outer;
                    }
                }
            }
        }
        Some(ok)
    } else {
        None
    };
    Ok(OrbitBall {
        basepoint: *x,
        radius: r,
        prune_radius: prune,
        entries,
        exhaustive_to: if found.exhausted {
            found.depth + 1
        } else {
            found.depth
        },
        stable,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct QuotientDist {
    pub dist: f64,
    pub element: Isometry,
    pub word: Word,
}

/// `min_γ d(x, γy)` over the pruned word search around `y`.
pub fn quotient_dist(
    l: &LatticeSpec,
    x: &Point,
    y: &Point,
    r_cap: f64,
    opts: &OrbitOptions,
) -> Result<QuotientDist, LatticeError> {
    let direct = dist(x, y);
    let target = direct.min(r_cap.max(0.0));
    let prune = target + opts.margin(l, y);
    let letters = l.search_letters();
    let found = word_search(
        &letters,
        Isometry::identity(l.model),
        opts.max_len,
        opts.budget,
        |g| dist(x, &g.apply(y)) <= prune,
    )?;
    let mut best = (direct, 0usize);
    for i in 1..found.len() {
        let d = dist(x, &found.element(i).apply(y));
        if d < best.0 - 1e-12 {
            best = (d, i);
        }
    }
    Ok(QuotientDist {
        dist: best.0,
        element: found.element(best.1),
        word: l.expand(&found.word(best.1)),
    })
}

/// A nontrivial group element with its classification cached.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub element: Isometry,
    pub class: IsometryClass,
    pub word: Word,
}

/// Reuses one orbit ball for nearby queries: a ball of radius `R` at anchor
/// `a` contains every element with `d_γ(x) ≤ r` whenever
/// `r + 2·d(x, a) ≤ R`.
#[derive(Clone, Debug)]
pub struct OrbitCache {
    lattice: String,
    anchor: Option<Point>,
    built_radius: f64,
    slack: f64,
    opts: OrbitOptions,
    candidates: Vec<Candidate>,
    pub rebuilds: usize,
    pub hits: usize,
}

impl OrbitCache {
    pub fn new(slack: f64, opts: OrbitOptions) -> Self {
        Self {
            lattice: String::new(),
            anchor: None,
            built_radius: 0.0,
            slack,
            opts,
            candidates: Vec::new(),
            rebuilds: 0,
            hits: 0,
        }
    }

    /// A superset of the nontrivial elements with `d_γ(x) ≤ r`.
    pub fn candidates(
        &mut self,
        l: &LatticeSpec,
        x: &Point,
        r: f64,
    ) -> Result<&[Candidate], LatticeError> {
        let reusable = self.lattice == l.name
            && self.anchor.is_some_and(|a| {
                a.model() == x.model() && r + 2.0 * dist(x, &a) <= self.built_radius
            });
        if reusable {
            self.hits += 1;
        } else {
            let radius = r + self.slack;
            let ball = orbit_ball(l, x, radius, &self.opts)?;
            self.candidates = ball
                .nontrivial()
                .map(|e| Candidate {
                    element: e.element,
                    class: classify(&e.element),
                    word: e.word.clone(),
                })
                .filter(|c| c.class.kind != Kind::Identity)
                .collect();
            self.lattice = l.name.clone();
            self.anchor = Some(*x);
            self.built_radius = radius;
            self.rebuilds += 1;
        }
        Ok(&self.candidates)
    }
}
