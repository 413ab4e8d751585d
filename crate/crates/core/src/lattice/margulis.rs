use std::collections::HashSet;

use serde::Serialize;

use super::LatticeError;
use crate::geometry::{classify, standardizer, ElementKey, Ideal, Isometry, Kind, MinSet};

const FIX_TOL: f64 = 1e-9;
const FINITE_CAP: usize = 120;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ElementaryKind {
    Trivial,
    /// Finite group with a common fixed point in X.
    Finite,
    /// All elements fix one boundary point, at least one parabolic.
    ParabolicType(Ideal),
    /// All elements preserve one geodesic.
    Axial(Ideal, Ideal),
}

#[derive(Clone, Debug, Serialize)]
pub struct MargulisComponents {
    pub is_elementary: bool,
    pub kind: ElementaryKind,
    /// Nontrivial words of length ≤ `i_cap` in Σ ∪ Σ⁻¹ lying in the
    /// nilpotent core.
    pub nilpotent_part: Vec<Isometry>,
    /// Index of the core in the group.
    pub index: u32,
}

fn fixes(g: &Isometry, xi: &Ideal) -> bool {
    g.apply_ideal(xi).chordal_dist(xi) < FIX_TOL
}

fn words_up_to(sigma: &[Isometry], len: u32) -> Vec<Isometry> {
    let mut letters: Vec<Isometry> = sigma.to_vec();
    letters.extend(sigma.iter().map(|g| g.inverse()));
    let mut seen: HashSet<ElementKey> = HashSet::new();
    let mut out = Vec::new();
    let mut layer = vec![Isometry::identity(sigma[0].model())];
    seen.insert(layer[0].key());
    for _ in 0..len {
        let mut next = Vec::new();
        for e in &layer {
            for g in &letters {
                let w = *e * *g;
                if seen.insert(w.key()) && !w.is_identity(1e-9) {
                    out.push(w);
                    next.push(w);
                }
            }
        }
        layer = next;
    }
    out
}

/// Closure of Σ under products, if it has at most `FINITE_CAP` elements.
fn finite_closure(sigma: &[Isometry]) -> Option<Vec<Isometry>> {
    let mut seen: HashSet<ElementKey> = HashSet::new();
    let id = Isometry::identity(sigma[0].model());
    seen.insert(id.key());
    let mut all = vec![id];
    let mut frontier = vec![id];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for e in &frontier {
            for g in sigma {
                let w = *e * *g;
                if seen.insert(w.key()) {
                    if all.len() >= FINITE_CAP {
                        return None;
                    }
                    all.push(w);
                    next.push(w);
                }
            }
        }
        frontier = next;
    }
    Some(all)
}

/// Decides whether ⟨Σ⟩ is elementary by fixed-set geometry and extracts
/// its nilpotent core.
pub fn margulis_components(
    sigma: &[Isometry],
    i_cap: u32,
) -> Result<MargulisComponents, LatticeError> {
    let sigma: Vec<Isometry> = sigma
        .iter()
        .filter(|g| !g.is_identity(1e-9))
        .copied()
        .collect();
    if sigma.is_empty() {
        return Ok(MargulisComponents {
            is_elementary: true,
            kind: ElementaryKind::Trivial,
            nilpotent_part: Vec::new(),
            index: 1,
        });
    }
    let classes: Vec<_> = sigma.iter().map(classify).collect();
    let words = words_up_to(&sigma, i_cap.max(1));

    if classes.iter().all(|c| c.kind == Kind::Elliptic) {
        if let Some(group) = finite_closure(&sigma) {
            let order = group.len() as u32;
            let cyclic = group
                .iter()
                .filter_map(|g| classify(g).elliptic_order(FINITE_CAP as u32))
                .max()
                .unwrap_or(1);
            // core: the cyclic subgroup generated by an element of maximal order
            let mut core: HashSet<ElementKey> = HashSet::new();
            let generator = group
                .iter()
                .find(|g| classify(g).elliptic_order(FINITE_CAP as u32) == Some(cyclic))
                .copied();
            if let Some(c) = generator {
                let mut p = c;
                for _ in 0..cyclic {
                    core.insert(p.key());
                    p = p * c;
                }
            }
            return Ok(MargulisComponents {
                is_elementary: true,
                kind: ElementaryKind::Finite,
                nilpotent_part: words
                    .into_iter()
                    .filter(|w| core.contains(&w.key()))
                    .collect(),
                index: order / cyclic.max(1),
            });
        }
    }

    if let Some(pc) = classes.iter().find(|c| c.kind == Kind::Parabolic) {
        let xi = match pc.min_set {
            MinSet::Empty(xi) => xi,
            _ => unreachable!("parabolic min set"),
        };
        for (g, c) in sigma.iter().zip(&classes) {
            if c.kind == Kind::Hyperbolic || !fixes(g, &xi) {
                return Err(LatticeError::NotElementary(
                    "elements do not share the parabolic fixed point".into(),
                ));
            }
        }
        // rotation part at ξ: conjugate ξ to ∞ and read off a/d
        let to_inf = match xi {
            Ideal::Infinity => Isometry::identity(sigma[0].model()),
            Ideal::Finite(_) => standardizer(sigma[0].model(), &Ideal::Infinity, &xi)?,
        };
        let rotation_key = |g: &Isometry| {
            let [a, _, _, d] = g.conjugate_by(&to_inf).entries();
            let r = (a / d).arg();
            let r = if r < -std::f64::consts::PI + 1e-9 {
                r + std::f64::consts::TAU
            } else {
                r
            };
            (r * 1e6).round() as i64
        };
        let rotations: HashSet<i64> = words.iter().map(rotation_key).chain([0]).collect();
        return Ok(MargulisComponents {
            is_elementary: true,
            kind: ElementaryKind::ParabolicType(xi),
            nilpotent_part: words
                .into_iter()
                .filter(|w| classify(w).kind == Kind::Parabolic)
                .collect(),
            index: rotations.len() as u32,
        });
    }

    let axis = classes
        .iter()
        .find(|c| c.kind == Kind::Hyperbolic)
        .or_else(|| {
            classes
                .iter()
                .find(|c| matches!(c.min_set, MinSet::Axis(..)))
        })
        .and_then(|c| match c.min_set {
            MinSet::Axis(a, b) => Some((a, b)),
            _ => None,
        });
    let Some((a, b)) = axis else {
        return Err(LatticeError::NotElementary(
            "elliptic elements without a common fixed point".into(),
        ));
    };
    let mut swaps = false;
    for g in &sigma {
        let keeps = fixes(g, &a) && fixes(g, &b);
        let swap = g.apply_ideal(&a).chordal_dist(&b) < FIX_TOL
            && g.apply_ideal(&b).chordal_dist(&a) < FIX_TOL;
        if swap && !keeps {
            swaps = true;
        } else if !keeps {
            return Err(LatticeError::NotElementary(
                "elements do not preserve a common axis".into(),
            ));
        }
    }
    Ok(MargulisComponents {
        is_elementary: true,
        kind: ElementaryKind::Axial(a, b),
        nilpotent_part: words
            .into_iter()
            .filter(|w| fixes(w, &a) && fixes(w, &b))
            .collect(),
        index: if swaps { 2 } else { 1 },
    })
}
