//! Ball volumes, the explicit rank constant, covolumes of the bundled
//! lattices, and the final rank-versus-volume inequality.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::Model;
use crate::lattice::LatticeSpec;
use crate::morse::MorseConfig;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstantsError {
    #[error("ball radius must be nonnegative, got {0}")]
    NegativeRadius(f64),
    #[error("no known covolume for lattice `{0}`")]
    Unknown(String),
    #[error("alpha must be positive, got {0}")]
    NonpositiveAlpha(f64),
}

/// Volume of a ball of radius `t`: `2π(cosh t − 1)` in H², `π(sinh 2t − 2t)`
/// in H³.
pub fn ball_volume(model: Model, t: f64) -> Result<f64, ConstantsError> {
    if !(t >= 0.0) {
        return Err(ConstantsError::NegativeRadius(t));
    }
    Ok(match model {
        // 4π sinh²(t/2) avoids the cancellation in cosh t − 1
        Model::H2 => 4.0 * std::f64::consts::PI * (0.5 * t).sinh().powi(2),
        Model::H3 => {
            let u = 2.0 * t;
            if u < 1.0 {
                // sinh u − u = Σ_{k≥1} u^{2k+1}/(2k+1)!
                let mut term = u * u * u / 6.0;
                let mut sum = 0.0f64;
                let mut k = 1.0;
                while term > 1e-18 * sum.max(f64::MIN_POSITIVE) {
                    sum += term;
                    term *= u * u / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
                    k += 1.0;
                }
                std::f64::consts::PI * sum
            } else {
                std::f64::consts::PI * (u.sinh() - u)
            }
        }
    })
}

/// `C(G) = v(2.5α) / (2 v(α/2)²)`.
pub fn paper_constant_c(model: Model, alpha: f64) -> Result<f64, ConstantsError> {
    if !(alpha > 0.0) {
        return Err(ConstantsError::NonpositiveAlpha(alpha));
    }
    let small = ball_volume(model, 0.5 * alpha)?;
    Ok(ball_volume(model, 2.5 * alpha)? / (2.0 * small * small))
}

/// Packing cap `vol / v(α/2)` on the net size.
pub fn packing_cap(model: Model, alpha: f64, vol: f64) -> Result<f64, ConstantsError> {
    Ok(vol / ball_volume(model, 0.5 * alpha)?)
}

/// Degree cap `v(2.5α) / v(α/2)` on nerve vertices.
pub fn degree_cap(model: Model, alpha: f64) -> Result<f64, ConstantsError> {
    Ok(ball_volume(model, 2.5 * alpha)? / ball_volume(model, 0.5 * alpha)?)
}

pub fn known_covolume(l: &LatticeSpec) -> Result<f64, ConstantsError> {
    l.known_covolume
        .as_ref()
        .map(|c| c.value)
        .ok_or_else(|| ConstantsError::Unknown(l.name.clone()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremCheck {
    /// Upper bound on the rank: the nerve's edge count.
    pub d_upper: u64,
    pub c: f64,
    pub covolume: f64,
    /// `C · vol`.
    pub c_vol: f64,
    pub known_rank: Option<u32>,
    pub bound_holds: bool,
    pub rank_consistent: bool,
    /// `2/C ≤ vol`.
    pub kazhdan_margulis: bool,
    pub pass: bool,
}

/// `d(Γ) ≤ |E| ≤ C·vol`, plus `known_rank ≤ |E|` when the rank is known.
pub fn theorem_check(
    l: &LatticeSpec,
    edges: u64,
    cfg: &MorseConfig,
) -> Result<TheoremCheck, ConstantsError> {
    let covolume = known_covolume(l)?;
    let c = paper_constant_c(l.model, cfg.alpha())?;
    let c_vol = c * covolume;
    let bound_holds = edges as f64 <= c_vol * (1.0 + 1e-9);
    let rank_consistent = l.known_rank.is_none_or(|r| r as u64 <= edges);
    let kazhdan_margulis = 2.0 / c <= covolume;
    Ok(TheoremCheck {
        d_upper: edges,
        c,
        covolume,
        c_vol,
        known_rank: l.known_rank,
        bound_holds,
        rank_consistent,
        kazhdan_margulis,
        pass: bound_holds && rank_consistent && kazhdan_margulis,
    })
}

/// Monte Carlo area of the hyperbolic `t`-disc about `(0, 1)` in the upper
/// half-plane. The disc is the Euclidean disc with centre `(0, cosh t)` and
/// radius `sinh t`; points are drawn uniformly in `(x, 1/y)`, where the area
/// element `dx dy / y²` is Lebesgue measure, and the hit fraction is scaled
/// by the sampling box.
pub fn monte_carlo_disc_area(t: f64, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (c, r) = (t.cosh(), t.sinh());
    let (u_lo, u_hi) = ((-t).exp(), t.exp());
    let mut hits = 0usize;
    for _ in 0..samples {
        let x = rng.gen_range(-r..=r);
        let y = 1.0 / rng.gen_range(u_lo..=u_hi);
        if x * x + (y - c) * (y - c) <= r * r {
            hits += 1;
        }
    }
    hits as f64 / samples as f64 * (2.0 * r) * (u_hi - u_lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn volume_values() {
        assert_eq!(ball_volume(Model::H2, 0.0).unwrap(), 0.0);
        assert_eq!(ball_volume(Model::H3, 0.0).unwrap(), 0.0);
        assert!((ball_volume(Model::H2, 2f64.ln()).unwrap() - PI / 2.0).abs() < 1e-15);
        let t = 1e-3;
        assert!((ball_volume(Model::H2, t).unwrap() / (PI * t * t) - 1.0).abs() < 1e-6);
        assert!(
            (ball_volume(Model::H3, t).unwrap() / (4.0 / 3.0 * PI * t.powi(3)) - 1.0).abs() < 1e-6
        );
        assert_eq!(
            ball_volume(Model::H2, -1.0),
            Err(ConstantsError::NegativeRadius(-1.0))
        );
        // series and closed form agree across the switch
        for t in [0.4f64, 0.49, 0.5, 0.51] {
            let closed = PI * ((2.0 * t).sinh() - 2.0 * t);
            assert!((ball_volume(Model::H3, t).unwrap() - closed).abs() < 1e-13 * closed);
        }
    }

    #[test]
    fn constant_for_default_alpha() {
        let c = paper_constant_c(Model::H2, 0.025).unwrap();
        assert!((c - 2.546e4).abs() / 2.546e4 < 1e-3);
        let deg = degree_cap(Model::H2, 0.025).unwrap();
        // 25 (sinh 0.03125 / (5 sinh 0.00625))² ≈ 25.0078
        assert!((deg - 25.0078).abs() < 1e-4);
        assert!((packing_cap(Model::H2, 0.025, PI / 3.0).unwrap() * 1.05 - 2240.0).abs() < 5.0);
        let ratio = c / paper_constant_c(Model::H2, 0.05).unwrap();
        assert!((ratio - 4.0).abs() < 0.01);
        let r3 = paper_constant_c(Model::H3, 0.025).unwrap()
            / paper_constant_c(Model::H3, 0.05).unwrap();
        assert!((r3 - 8.0).abs() < 0.02);
    }

    #[test]
    fn monte_carlo_agrees_with_formula() {
        for t in [0.5, 1.0, 2.0] {
            let est = monte_carlo_disc_area(t, 200_000, 7);
            let exact = ball_volume(Model::H2, t).unwrap();
            assert!(
                (est / exact - 1.0).abs() < 0.02,
                "t = {t}: {est} vs {exact}"
            );
        }
    }
}
