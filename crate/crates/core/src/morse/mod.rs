//! The Morse function built from per-element cutoff terms, its gradient,
//! and the descent flow onto its sublevel sets.

mod flow;
mod psi;

pub use flow::{flow_to_sublevel, settle_to_zero, FlowOutcome};
pub use psi::{
    grad_psi, is_thick, min_nontrivial_displacement, phi, psi, sigma_set, thickness_ceiling,
    PsiEvaluator, PsiValue,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, Model};
use crate::lattice::{LatticeError, OrbitOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MorseError {
    #[error("cutoff argument must be positive, got {0}")]
    NonpositiveInput(f64),
    #[error("cutoff argument {0:e} is at the singular set")]
    SingularArgument(f64),
    #[error("point lies on the singular set (cutoff argument {0:e})")]
    OnSingularSet(f64),
    #[error("flow did not reach the target within {0} iterations")]
    MaxIterations(usize),
    #[error("line search step underflow at iteration {iteration} (psi = {psi:e})")]
    StepUnderflow { iteration: usize, psi: f64 },
    #[error("invalid Morse configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Constants of the Morse function and the descent flow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MorseConfig {
    pub model: Model,
    pub epsilon_g: f64,
    pub m_g: u32,
    pub nu: u32,
    /// Cutoff exponent `k` in `f(t) = (ε/t − 1)^k`.
    pub k: i32,
    /// Replaces `α = ε/(2μ)` when set (used for coarse runs and controls).
    pub alpha_override: Option<f64>,
    /// Initial trial step, as a geodesic length.
    pub step0: f64,
    pub shrink: f64,
    pub armijo_c1: f64,
    pub max_iter: usize,
    pub tau_zero: f64,
    pub tau_grad: f64,
    pub delta_floor: f64,
    pub margin_cap: f64,
    pub budget: usize,
    /// Extra radius kept by the orbit cache so nearby queries reuse it.
    pub cache_slack: f64,
}

impl Default for MorseConfig {
    fn default() -> Self {
        Self::defaults(Model::H2)
    }
}

/// Derived constants, echoed into reports.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Derived {
    pub epsilon: f64,
    pub m: u64,
    pub nu: u32,
    pub mu: u64,
    pub alpha: f64,
    pub k: i32,
}

fn factorial(n: u32) -> u64 {
    (1..=n as u64).product()
}

impl MorseConfig {
    pub fn defaults(model: Model) -> Self {
        Self {
            model,
            epsilon_g: match model {
                Model::H2 => 0.2,
                Model::H3 => 0.1,
            },
            m_g: 2,
            nu: 1,
            k: 3,
            alpha_override: None,
            step0: 0.1,
            shrink: 0.5,
            armijo_c1: 1e-4,
            max_iter: 100_000,
            tau_zero: 1e-10,
            tau_grad: 1e-14,
            delta_floor: 1e-8,
            margin_cap: 3.0,
            budget: crate::lattice::budget_from_env(),
            cache_slack: 0.4,
        }
    }

    /// `ε = ε_G / 2`.
    pub fn epsilon(&self) -> f64 {
        self.epsilon_g / 2.0
    }

    /// `m = m_G!`.
    pub fn m(&self) -> u64 {
        factorial(self.m_g)
    }

    /// `μ = m^ν`.
    pub fn mu(&self) -> u64 {
        self.m().pow(self.nu)
    }

    /// `α = ε / (2μ)` unless overridden.
    pub fn alpha(&self) -> f64 {
        self.alpha_override
            .unwrap_or(self.epsilon() / (2.0 * self.mu() as f64))
    }

    pub fn derived(&self) -> Derived {
        Derived {
            epsilon: self.epsilon(),
            m: self.m(),
            nu: self.nu,
            mu: self.mu(),
            alpha: self.alpha(),
            k: self.k,
        }
    }

    pub fn orbit_options(&self) -> OrbitOptions {
        OrbitOptions {
            margin_cap: self.margin_cap,
            budget: self.budget,
            ..OrbitOptions::default()
        }
    }

    pub fn validate(&self) -> Result<(), MorseError> {
        let bad = |m: &str| Err(MorseError::InvalidConfig(m.into()));
        if !(self.epsilon_g > 0.0) {
            return bad("epsilon_g must be positive");
        }
        if self.m_g == 0 || self.m_g > 20 {
            return bad("m_g must be in 1..=20");
        }
        if self.m().checked_pow(self.nu).is_none() {
            return bad("mu = (m_g!)^nu overflows");
        }
        if self.k < 2 {
            return bad("cutoff exponent must be at least 2");
        }
        if let Some(a) = self.alpha_override {
            if !(a > 0.0) {
                return bad("alpha must be positive");
            }
        }
        let positive = [
            self.step0,
            self.armijo_c1,
            self.tau_zero,
            self.tau_grad,
            self.delta_floor,
            self.margin_cap,
        ];
        if positive.iter().any(|v| !(*v > 0.0)) {
            return bad("step size, tolerances and margin must be positive");
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return bad("shrink factor must lie in (0, 1)");
        }
        if self.max_iter == 0 || self.budget == 0 {
            return bad("iteration cap and budget must be positive");
        }
        Ok(())
    }

    /// `f(t) = (ε/t − 1)^k` on `(0, ε]`, zero beyond.
    pub fn cutoff_f(&self, t: f64) -> Result<f64, MorseError> {
        if !(t > 0.0) {
            return Err(MorseError::NonpositiveInput(t));
        }
        let eps = self.epsilon();
        Ok(if t >= eps {
            0.0
        } else {
            (eps / t - 1.0).powi(self.k)
        })
    }

    /// `f'(t) = −k ε (ε/t − 1)^{k−1} / t²` on `(0, ε]`, zero beyond.
    pub fn cutoff_f_prime(&self, t: f64) -> Result<f64, MorseError> {
        if !(t > 0.0) {
            return Err(MorseError::NonpositiveInput(t));
        }
        let eps = self.epsilon();
        Ok(if t >= eps {
            0.0
        } else {
            -(self.k as f64) * eps * (eps / t - 1.0).powi(self.k - 1) / (t * t)
        })
    }

    /// Inverse of the cutoff on `(0, ε]`: `f⁻¹(a) = ε / (1 + a^{1/k})`.
    pub fn cutoff_f_inv(&self, a: f64) -> f64 {
        self.epsilon() / (1.0 + a.max(0.0).powf(1.0 / self.k as f64))
    }
}
