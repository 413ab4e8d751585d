use serde::Serialize;

use super::{MorseError, PsiEvaluator};
use crate::geometry::{exp, Point};

const MIN_STEP: f64 = 1e-14;
const SETTLE_START: f64 = 1e-7;
const SETTLE_DOUBLINGS: i32 = 60;

#[derive(Clone, Debug, Serialize)]
pub struct FlowOutcome {
    pub point: Point,
    /// `ψ` after each accepted step, starting with the initial value.
    pub psi_trace: Vec<f64>,
    pub iterations: usize,
    pub backtracks: usize,
}

/// Steepest descent of `ψ` with Armijo backtracking until `ψ ≤ target`.
/// The first trial step of every iteration has geodesic length `step0`.
pub fn flow_to_sublevel(
    ev: &mut PsiEvaluator,
    x0: &Point,
    target: f64,
) -> Result<FlowOutcome, MorseError> {
    let cfg = ev.config().clone();
    let mut x = *x0;
    let mut v = ev.eval(&x, true)?;
    let mut trace = vec![v.psi];
    let mut iterations = 0;
    let mut backtracks = 0;
    while v.psi > target {
        if iterations >= cfg.max_iter {
            return Err(MorseError::MaxIterations(cfg.max_iter));
        }
        let gnorm = v.grad.norm_at(&x);
        let underflow = MorseError::StepUnderflow {
            iteration: iterations,
            psi: v.psi,
        };
        if !(gnorm > cfg.tau_grad) {
            return Err(underflow);
        }
        let mut s = cfg.step0 / gnorm;
        loop {
            let trial = exp(&x, &v.grad.scale(-s));
            match ev.eval(&trial, true) {
                Ok(tv) if tv.psi <= v.psi - cfg.armijo_c1 * s * gnorm * gnorm => {
                    x = trial;
                    v = tv;
                    break;
                }
                Ok(_) | Err(MorseError::OnSingularSet(_)) => {}
                Err(e) => return Err(e),
            }
            s *= cfg.shrink;
            backtracks += 1;
            if s * gnorm < MIN_STEP {
                return Err(underflow);
            }
        }
        iterations += 1;
        trace.push(v.psi);
    }
    Ok(FlowOutcome {
        point: x,
        psi_trace: trace,
        iterations,
        backtracks,
    })
}

/// Moves a point with small positive `ψ` to a nearby point where `ψ` is
/// exactly zero, stepping along `−∇ψ` with doubling lengths.
pub fn settle_to_zero(ev: &mut PsiEvaluator, x: &Point) -> Result<Point, MorseError> {
    let v = ev.eval(x, true)?;
    if v.psi == 0.0 {
        return Ok(*x);
    }
    let gnorm = v.grad.norm_at(x);
    if !(gnorm > 0.0) {
        return Err(MorseError::StepUnderflow {
            iteration: 0,
            psi: v.psi,
        });
    }
    let dir = v.grad.scale(-1.0 / gnorm);
    for k in 0..SETTLE_DOUBLINGS {
        let y = exp(x, &dir.scale(SETTLE_START * 2f64.powi(k)));
        match ev.psi(&y) {
            Ok(0.0) => return Ok(y),
            Ok(_) | Err(MorseError::OnSingularSet(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Err(MorseError::StepUnderflow {
        iteration: 0,
        psi: v.psi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Model;
    use crate::lattice::bundled;
    use crate::morse::MorseConfig;

    #[test]
    fn cusp_point_descends_to_thick_part() {
        let l = bundled("modular").unwrap();
        let cfg = MorseConfig::defaults(Model::H2);
        let mut ev = PsiEvaluator::new(&l, &cfg);
        let x0 = Point::h2(0.2, 30.0).unwrap();
        let out = flow_to_sublevel(&mut ev, &x0, 0.0).unwrap();
        assert_eq!(*out.psi_trace.last().unwrap(), 0.0);
        assert!(out.psi_trace.windows(2).all(|w| w[1] < w[0]));
        assert!(out.point.height() < x0.height());
        assert!(out.point.height() <= 10.0);
    }

    #[test]
    fn near_elliptic_point_moves_away() {
        let l = bundled("modular").unwrap();
        let cfg = MorseConfig::defaults(Model::H2);
        let mut ev = PsiEvaluator::new(&l, &cfg);
        let x0 = Point::h2(0.001, 1.003).unwrap();
        let start = ev.psi(&x0).unwrap();
        assert!(start > 0.0);
        let out = flow_to_sublevel(&mut ev, &x0, 1.0).unwrap();
        assert!(*out.psi_trace.last().unwrap() <= 1.0);
        let y = settle_to_zero(&mut ev, &out.point).unwrap();
        assert_eq!(ev.psi(&y).unwrap(), 0.0);
    }
}
