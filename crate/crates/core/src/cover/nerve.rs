use std::collections::{HashMap, HashSet, VecDeque};

use serde::Serialize;

use super::net::Net;
use super::CoverError;
use crate::constants::{ball_volume, degree_cap, known_covolume, packing_cap};
use crate::geometry::{dist, ElementKey, Isometry};
use crate::lattice::{orbit_ball, word_search, LatticeSpec, OrbitOptions, Word};
use crate::morse::MorseConfig;

/// One edge of the nerve: `d(p_i, γ p_j) ≤ threshold`. Distinct lifts give
/// distinct edges, so a pair of vertices may carry several.
#[derive(Clone, Debug, Serialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub element: Isometry,
    pub word: Word,
    pub dist: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NerveComplex {
    pub vertices: usize,
    pub threshold: f64,
    pub edges: Vec<Edge>,
    /// Vertex pairs joined by at least one edge (loops count once).
    pub pairs: usize,
    pub degrees: Vec<usize>,
    pub max_degree: usize,
    pub root: usize,
    /// Indices into `edges` forming a spanning forest.
    pub tree: Vec<usize>,
    /// `lifts[j]`: the tree-propagated element placing vertex `j`.
    pub lifts: Vec<Isometry>,
    /// One element per non-tree edge, in edge order.
    pub generators: Vec<Isometry>,
    pub components: usize,
}

/// Nerve of the `α`-ball cover, with edges at `2α`.
pub fn build_nerve(l: &LatticeSpec, net: &Net) -> Result<NerveComplex, CoverError> {
    build_nerve_with_threshold(l, net, 2.0 * net.alpha)
}

pub fn build_nerve_with_threshold(
    l: &LatticeSpec,
    net: &Net,
    threshold: f64,
) -> Result<NerveComplex, CoverError> {
    if threshold > net.index.radius() + 1e-12 {
        return Err(CoverError::InvalidArgument(format!(
            "threshold {threshold} exceeds the lift index radius {}",
            net.index.radius()
        )));
    }
    let n = net.points.len();
    let lifts = net.index.lifts();
    let mut edges = Vec::new();
    for (i, p) in net.points.iter().enumerate() {
        for (id, d) in net.index.query(p, threshold) {
            let lift = &lifts[id];
            let j = lift.net;
            if j < i || (j == i && lift.element.is_identity(1e-9)) {
                continue;
            }
            if j == i && lift.element.key() > lift.element.inverse().key() {
                continue;
            }
            edges.push(Edge {
                i,
                j,
                element: lift.element,
                word: lift.word.clone(),
                dist: d,
            });
        }
    }
    edges.sort_by(|a, b| {
        (a.i, a.j)
            .cmp(&(b.i, b.j))
            .then(a.dist.total_cmp(&b.dist))
            .then_with(|| a.word.shortlex_cmp(&b.word))
    });

    let mut degrees = vec![0usize; n];
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut pair_set = HashSet::new();
    for (k, e) in edges.iter().enumerate() {
        degrees[e.i] += 1;
        degrees[e.j] += 1;
        adjacency[e.i].push(k);
        if e.j != e.i {
            adjacency[e.j].push(k);
        }
        pair_set.insert((e.i, e.j));
    }

    let root = net
        .points
        .iter()
        .enumerate()
        .min_by(|a, b| dist(a.1, &l.basepoint).total_cmp(&dist(b.1, &l.basepoint)))
        .map_or(0, |(i, _)| i);
    let identity = Isometry::identity(l.model);
    let mut placed: Vec<Option<Isometry>> = vec![None; n];
    let mut in_tree = vec![false; edges.len()];
    let mut tree = Vec::new();
    let mut components = 0;
    let order = std::iter::once(root).chain((0..n).filter(|&v| v != root));
    for start in order {
        if placed[start].is_some() {
            continue;
        }
        components += 1;
        placed[start] = Some(identity);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            let lv = placed[v].expect("queued vertices are placed");
            for &k in &adjacency[v] {
                let e = &edges[k];
                let (w, step) = if e.i == v {
                    (e.j, e.element)
                } else {
                    (e.i, e.element.inverse())
                };
                if placed[w].is_none() {
                    placed[w] = Some(lv * step);
                    in_tree[k] = true;
                    tree.push(k);
                    queue.push_back(w);
                }
            }
        }
    }
    let lift_elems: Vec<Isometry> = placed.into_iter().map(|p| p.unwrap_or(identity)).collect();
    let generators = edges
        .iter()
        .enumerate()
        .filter(|(k, _)| !in_tree[*k])
        .map(|(_, e)| lift_elems[e.i] * e.element * lift_elems[e.j].inverse())
        .collect();
    Ok(NerveComplex {
        vertices: n,
        threshold,
        pairs: pair_set.len(),
        max_degree: degrees.iter().copied().max().unwrap_or(0),
        degrees,
        edges,
        root,
        tree,
        lifts: lift_elems,
        generators,
        components,
    })
}

/// One deck transformation per non-tree edge: `lift_i · γ_ij · lift_j⁻¹`.
pub fn extract_generators(nerve: &NerveComplex) -> Result<Vec<Isometry>, CoverError> {
    if nerve.components != 1 {
        return Err(CoverError::DisconnectedNerve(nerve.components));
    }
    Ok(nerve.generators.clone())
}

/// Nontrivial generators with duplicates and inverse pairs removed.
pub fn distinct_generators(gens: &[Isometry]) -> Vec<Isometry> {
    let mut seen: HashSet<ElementKey> = HashSet::new();
    let mut out = Vec::new();
    for g in gens {
        if g.is_identity(1e-9) {
            continue;
        }
        if seen.insert(g.key()) && seen.insert(g.inverse().key()) {
            out.push(*g);
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneratorCheck {
    pub pass: bool,
    pub distinct: usize,
    pub radius: f64,
    pub depth: usize,
    pub prune_radius: f64,
    pub ball_size: usize,
    pub reached: usize,
    /// Lattice generators written in the candidate set (`g1, g2, …`), or
    /// `None` when the bounded search missed them.
    pub known_words: Vec<(String, Option<String>)>,
}

/// Whether `⟨gens⟩` reaches every element of the radius-`r` orbit ball at
/// the basepoint, and each lattice generator, within `depth` letters. The
/// search keeps prefixes whose basepoint displacement is at most `r` plus
/// the largest generator displacement (capped at `prune_cap`).
pub fn verify_generators(
    l: &LatticeSpec,
    gens: &[Isometry],
    r: f64,
    depth: usize,
    budget: usize,
) -> Result<GeneratorCheck, CoverError> {
    const PRUNE_CAP: f64 = 7.0;
    if gens.is_empty() {
        return Err(CoverError::InvalidArgument(
            "generator list is empty".into(),
        ));
    }
    let distinct = distinct_generators(gens);
    let b = l.basepoint;
    let target = orbit_ball(
        l,
        &b,
        r,
        &OrbitOptions {
            budget,
            ..OrbitOptions::default()
        },
    )?;
    let reach = distinct
        .iter()
        .map(|g| dist(&b, &g.apply(&b)))
        .fold(0.0, f64::max);
    let prune = r + reach.min(PRUNE_CAP);
    let letters: Vec<(i32, Isometry)> = distinct
        .iter()
        .enumerate()
        .flat_map(|(k, g)| [(k as i32 + 1, *g), (-(k as i32) - 1, g.inverse())])
        .collect();
    let found = word_search(&letters, Isometry::identity(l.model), depth, budget, |g| {
        dist(&b, &g.apply(&b)) <= prune
    })?;
    let index: HashMap<ElementKey, usize> = found
        .elements()
        .enumerate()
        .map(|(i, e)| (e.key(), i))
        .collect();
    let reached = target
        .entries
        .iter()
        .filter(|e| index.contains_key(&e.element.key()))
        .count();
    let names: Vec<String> = (1..=distinct.len()).map(|k| format!("g{k}")).collect();
    let known_words: Vec<(String, Option<String>)> = l
        .generators
        .iter()
        .map(|g| {
            let word = index
                .get(&g.element.key())
                .map(|&i| found.word(i).render(&names));
            (g.name.clone(), word)
        })
        .collect();
    let pass = reached == target.entries.len() && known_words.iter().all(|(_, w)| w.is_some());
    Ok(GeneratorCheck {
        pass,
        distinct: distinct.len(),
        radius: r,
        depth,
        prune_radius: prune,
        ball_size: target.entries.len(),
        reached,
        known_words,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RankCertificate {
    pub alpha: f64,
    pub net_size: usize,
    pub edges: usize,
    pub max_degree: usize,
    pub generators: usize,
    pub covolume: Option<f64>,
    pub v_half_alpha: f64,
    pub v_two_and_half_alpha: f64,
    /// `vol / v(α/2)`.
    pub packing_cap: Option<f64>,
    /// Slack applied to the packing cap in the net-size flag.
    pub packing_slack: f64,
    /// `v(2.5α) / v(α/2)`.
    pub degree_cap: f64,
    /// `vol · v(2.5α) / (2 v(α/2)²)`.
    pub edge_cap: Option<f64>,
    pub net_ok: Option<bool>,
    pub degree_ok: bool,
    pub edges_ok: Option<bool>,
    pub generator_count_ok: bool,
}

pub const PACKING_SLACK: f64 = 0.05;

pub fn rank_bound_certificate(
    l: &LatticeSpec,
    net: &Net,
    nerve: &NerveComplex,
    cfg: &MorseConfig,
) -> Result<RankCertificate, CoverError> {
    rank_bound_certificate_at(l, net, nerve, cfg.alpha())
}

/// The certificate with the caps evaluated at `alpha`, which need not be
/// the spacing the net was built with.
pub fn rank_bound_certificate_at(
    l: &LatticeSpec,
    net: &Net,
    nerve: &NerveComplex,
    alpha: f64,
) -> Result<RankCertificate, CoverError> {
    let vol = known_covolume(l).ok();
    let small = ball_volume(l.model, 0.5 * alpha)?;
    let large = ball_volume(l.model, 2.5 * alpha)?;
    let deg_cap = degree_cap(l.model, alpha)?;
    let pack = vol.map(|v| packing_cap(l.model, alpha, v)).transpose()?;
    let edge_cap = vol.map(|v| v * large / (2.0 * small * small));
    let edges = nerve.edges.len();
    Ok(RankCertificate {
        alpha,
        net_size: net.points.len(),
        edges,
        max_degree: nerve.max_degree,
        generators: nerve.generators.len(),
        covolume: vol,
        v_half_alpha: small,
        v_two_and_half_alpha: large,
        packing_cap: pack,
        packing_slack: PACKING_SLACK,
        degree_cap: deg_cap,
        edge_cap,
        net_ok: pack.map(|c| net.points.len() as f64 <= c * (1.0 + PACKING_SLACK)),
        degree_ok: nerve.max_degree as f64 <= deg_cap,
        edges_ok: edge_cap.map(|c| edges as f64 <= c),
        generator_count_ok: nerve.generators.len() + nerve.vertices == edges + nerve.components,
    })
}
