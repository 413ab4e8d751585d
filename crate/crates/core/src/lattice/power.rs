use serde::Serialize;

use super::LatticeError;
use crate::geometry::{classify, dist, Ideal, Isometry, Kind, MinSet, Model, Point};

const SIG_TOL: f64 = 1e-9;

/// The centralizer of a nontrivial element of PSL(2,·) is the stabilizer
/// of its fixed set, so it is determined by this data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum CentralizerSig {
    /// The identity: centralizer is everything.
    All,
    /// Rotations about a point (elliptic in PSL(2,R)).
    Point(Point),
    /// Elements preserving a geodesic and fixing both ends.
    Torus(Ideal, Ideal),
    /// Order-two rotation in PSL(2,C): its centralizer also swaps the ends.
    Dihedral(Ideal, Ideal),
    /// Parabolic: the stabilizer of the fixed point's horospheres.
    Horo(Ideal),
}

fn same_ends(a: (Ideal, Ideal), b: (Ideal, Ideal)) -> bool {
    let direct = a.0.chordal_dist(&b.0) < SIG_TOL && a.1.chordal_dist(&b.1) < SIG_TOL;
    let swapped = a.0.chordal_dist(&b.1) < SIG_TOL && a.1.chordal_dist(&b.0) < SIG_TOL;
    direct || swapped
}

impl CentralizerSig {
    pub fn same_as(&self, other: &CentralizerSig) -> bool {
        use CentralizerSig::*;
        match (self, other) {
            (All, All) => true,
            (Point(p), Point(q)) => dist(p, q) < SIG_TOL,
            (Torus(a, b), Torus(c, d)) | (Dihedral(a, b), Dihedral(c, d)) => {
                same_ends((*a, *b), (*c, *d))
            }
            (Horo(a), Horo(b)) => a.chordal_dist(b) < SIG_TOL,
            _ => false,
        }
    }
}

pub fn centralizer_signature(g: &Isometry) -> CentralizerSig {
    let c = classify(g);
    match (c.kind, c.min_set) {
        (Kind::Identity, _) => CentralizerSig::All,
        (Kind::Parabolic, MinSet::Empty(xi)) => CentralizerSig::Horo(xi),
        (Kind::Elliptic, MinSet::Point(p)) => CentralizerSig::Point(p),
        (Kind::Elliptic, MinSet::Axis(a, b)) => {
            let order_two = g.model() == Model::H3 && c.elliptic_order(2) == Some(2);
            if order_two {
                CentralizerSig::Dihedral(a, b)
            } else {
                CentralizerSig::Torus(a, b)
            }
        }
        (_, MinSet::Axis(a, b)) => CentralizerSig::Torus(a, b),
        (kind, set) => unreachable!("inconsistent class {kind:?} / {set:?}"),
    }
}

/// Least `j < ν` with `C(g^{m^j}) = C(g^{m^{j+1}})`.
pub fn j_of(g: &Isometry, m: u32, nu: u32) -> Result<u32, LatticeError> {
    let kind = classify(g).kind;
    if matches!(kind, Kind::Identity | Kind::Parabolic) {
        return Err(LatticeError::NotSemisimple);
    }
    let mut power = *g;
    let mut sig = centralizer_signature(&power);
    for j in 0..nu {
        let next = power.pow(m as i64);
        let next_sig = centralizer_signature(&next);
        if sig.same_as(&next_sig) {
            return Ok(j);
        }
        power = next;
        sig = next_sig;
    }
    Err(LatticeError::CentralizerChainUnstable(nu))
}

/// `γ̄ = γ^{m^{j(γ)}}` for hyperbolic `γ`, else `γ`.
pub fn bar(g: &Isometry, m: u32, nu: u32) -> Result<Isometry, LatticeError> {
    match classify(g).kind {
        Kind::Identity => Err(LatticeError::IdentityInput),
        Kind::Hyperbolic => {
            let j = j_of(g, m, nu)?;
            Ok(g.pow((m as i64).pow(j)))
        }
        _ => Ok(*g),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyperbolic_chain_is_stable_at_zero() {
        let h = Isometry::real(2.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(j_of(&h, 2, 1), Ok(0));
        assert!(bar(&h, 2, 1).unwrap().projectively_eq(&h, 0.0));
    }

    #[test]
    fn order_two_elliptic_jumps_to_identity() {
        let s = Isometry::real(0.0, -1.0, 1.0, 0.0).unwrap();
        // s ≠ 1 but s² = 1: the chain C(s) ≠ C(1) = C(1) stabilizes at j = 1
        assert_eq!(j_of(&s, 2, 2), Ok(1));
        assert_eq!(
            j_of(&s, 2, 1),
            Err(LatticeError::CentralizerChainUnstable(1))
        );
        assert!(bar(&s, 2, 1).unwrap().projectively_eq(&s, 0.0));
    }

    #[test]
    fn rejects_identity_and_parabolic() {
        let id = Isometry::identity(Model::H2);
        assert_eq!(j_of(&id, 2, 1), Err(LatticeError::NotSemisimple));
        assert_eq!(bar(&id, 2, 1).unwrap_err(), LatticeError::IdentityInput);
        let t = Isometry::real(1.0, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(j_of(&t, 2, 1), Err(LatticeError::NotSemisimple));
        assert!(bar(&t, 2, 1).unwrap().projectively_eq(&t, 0.0));
    }
}
