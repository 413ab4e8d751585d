use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Model, Point};
use crate::lattice::Region;

/// Radical inverse of `i` in base `b`.
pub fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let inv = 1.0 / b as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += (i % b) as f64 * f;
        i /= b;
        f *= inv;
    }
    r
}

/// Halton points over the region between `floor` and `ceiling`, uniform in
/// hyperbolic measure: `x` uniform and `1/h` (H²) or `1/h²` (H³) uniform.
/// A seeded random rotation of the sequence distinguishes runs.
#[derive(Clone, Debug)]
pub struct ProbeSequence {
    model: Model,
    region: Region,
    ceiling: f64,
    shift: [f64; 3],
    next: u64,
}

const BASES: [u64; 3] = [2, 3, 5];

impl ProbeSequence {
    pub fn new(model: Model, region: &Region, ceiling: f64, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let shift = [rng.gen(), rng.gen(), rng.gen()];
        Self {
            model,
            region: region.clone(),
            ceiling,
            shift,
            next: 1,
        }
    }

    fn coord(&self, i: u64, k: usize) -> f64 {
        (radical_inverse(i, BASES[k]) + self.shift[k]).fract()
    }

    fn point(&self, i: u64) -> Point {
        let (x0, x1) = self.region.x_range;
        let x = x0 + (x1 - x0) * self.coord(i, 0);
        let u = self.coord(i, self.model.dimension() - 1);
        let floor = self.region.floor;
        match self.model {
            Model::H2 => {
                let inv = 1.0 / self.ceiling + u * (1.0 / floor - 1.0 / self.ceiling);
                Point::h2(x, 1.0 / inv).expect("probe height is positive")
            }
            Model::H3 => {
                let (y0, y1) = self.region.x2_range.unwrap_or((0.0, 0.0));
                let y = y0 + (y1 - y0) * self.coord(i, 1);
                let c2 = self.ceiling.powi(-2);
                let inv = c2 + u * (floor.powi(-2) - c2);
                Point::h3(x, y, inv.sqrt().recip()).expect("probe height is positive")
            }
        }
    }
}

impl Iterator for ProbeSequence {
    type Item = Point;

    fn next(&mut self) -> Option<Point> {
        loop {
            let p = self.point(self.next);
            self.next += 1;
            if !self.region.excludes(&p) {
                return Some(p);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::bundled;

    #[test]
    fn radical_inverse_values() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(6, 2), 0.375);
        assert!((radical_inverse(5, 3) - 7.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn probes_lie_in_region_and_fill_it() {
        let l = bundled("modular").unwrap();
        let probes: Vec<Point> = ProbeSequence::new(Model::H2, &l.region, 10.0, 3, 0)
            .take(4000)
            .collect();
        assert!(probes
            .iter()
            .all(|p| l.region.contains(p) && p.height() <= 10.0 && p.height() >= 0.8));
        // area-uniform: the region below height 10 has area π/3 − 1/10, of
        // which 1/2 − 1/10 lies above height 2
        let above = probes.iter().filter(|p| p.height() > 2.0).count() as f64 / 4000.0;
        let expect = 0.4 / (std::f64::consts::PI / 3.0 - 0.1);
        assert!((above - expect).abs() < 0.02, "{above} vs {expect}");
        let other: Vec<Point> = ProbeSequence::new(Model::H2, &l.region, 10.0, 4, 0)
            .take(5)
            .collect();
        assert_ne!(probes[0], other[0]);
    }
}
