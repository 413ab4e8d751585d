use std::collections::HashMap;

use super::cells::CellCover;
use crate::geometry::{dist, Isometry, Point};
use crate::lattice::{word_search, LatticeError, LatticeSpec, Word};

/// An image `γp` of a net point lying near the region.
#[derive(Clone, Debug)]
pub struct Lift {
    pub net: usize,
    pub element: Isometry,
    pub word: Word,
    pub point: Point,
}

type Key = (i32, i64, i64);

/// Every image of every net point within `radius` of the region cover,
/// bucketed by `ln h` bands and horizontal cells scaled with the band.
#[derive(Clone, Debug)]
pub struct LiftIndex {
    radius: f64,
    margin: f64,
    scale: f64,
    max_len: usize,
    budget: usize,
    cover: CellCover,
    lifts: Vec<Lift>,
    grid: HashMap<Key, Vec<u32>>,
    /// Elements admitted by the lift searches, summed.
    pub search_nodes: usize,
}

impl LiftIndex {
    pub fn new(cover: CellCover, radius: f64, margin: f64, budget: usize) -> Self {
        Self {
            radius,
            margin,
            scale: radius.max(1e-3),
            max_len: 256,
            budget,
            cover,
            lifts: Vec::new(),
            grid: HashMap::new(),
            search_nodes: 0,
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn cover(&self) -> &CellCover {
        &self.cover
    }

    pub fn lifts(&self) -> &[Lift] {
        &self.lifts
    }

    fn band(&self, h: f64) -> i32 {
        (h.ln() / self.scale).floor() as i32
    }

    fn width(&self, band: i32) -> f64 {
        (band as f64 * self.scale).exp() * self.scale
    }

    fn key(&self, p: &Point) -> Key {
        let b = self.band(p.height());
        let w = self.width(b);
        let z = p.w();
        (b, (z.re / w).floor() as i64, (z.im / w).floor() as i64)
    }

    /// Adds the images of net point `net` at `p` that lie within `radius`
    /// of the cover. The word search keeps images within `radius + margin`,
    /// so chains of neighbouring translates around the region are followed.
    pub fn insert(
        &mut self,
        l: &LatticeSpec,
        net: usize,
        p: &Point,
    ) -> Result<usize, LatticeError> {
        let bound = self.radius + self.margin;
        let cover = &self.cover;
        let found = word_search(
            &l.search_letters(),
            crate::geometry::Isometry::identity(l.model),
            self.max_len,
            self.budget,
            |g| cover.dist(&g.apply(p)) <= bound,
        )?;
        self.search_nodes += found.len();
        let mut added = 0;
        for i in 0..found.len() {
            let element = found.element(i);
            let point = element.apply(p);
            if self.cover.dist(&point) <= self.radius {
                let key = self.key(&point);
                self.grid
                    .entry(key)
                    .or_default()
                    .push(self.lifts.len() as u32);
                self.lifts.push(Lift {
                    net,
                    element,
                    word: l.expand(&found.word(i)),
                    point,
                });
                added += 1;
            }
        }
        Ok(added)
    }

    /// Lifts within distance `r ≤ radius` of `q`, as `(lift index, distance)`
    /// sorted by distance then net index.
    pub fn query(&self, q: &Point, r: f64) -> Vec<(usize, f64)> {
        debug_assert!(r <= self.radius + 1e-12);
        let h = q.height();
        let z = q.w();
        let lo = ((h.ln() - r) / self.scale).floor() as i32;
        let hi = ((h.ln() + r) / self.scale).floor() as i32;
        let s = (0.5 * r).sinh();
        let planar = q.model().dimension() == 2;
        let mut out = Vec::new();
        for b in lo..=hi {
            let hmax = ((b + 1) as f64 * self.scale).exp();
            let reach = 2.0 * (hmax * h).sqrt() * s;
            let w = self.width(b);
            let (x0, x1) = (
                ((z.re - reach) / w).floor() as i64,
                ((z.re + reach) / w).floor() as i64,
            );
            let (y0, y1) = if planar {
                (0, 0)
            } else {
                (
                    ((z.im - reach) / w).floor() as i64,
                    ((z.im + reach) / w).floor() as i64,
                )
            };
            for xi in x0..=x1 {
                for yi in y0..=y1 {
                    if let Some(ids) = self.grid.get(&(b, xi, yi)) {
                        for &id in ids {
                            let d = dist(q, &self.lifts[id as usize].point);
                            if d <= r {
                                out.push((id as usize, d));
                            }
                        }
                    }
                }
            }
        }
        out.sort_by(|a, b| {
            a.1.total_cmp(&b.1)
                .then(self.lifts[a.0].net.cmp(&self.lifts[b.0].net))
        });
        out
    }

    /// Distance from `q` to the nearest lift, if one is within `r`.
    pub fn nearest(&self, q: &Point, r: f64) -> Option<(usize, f64)> {
        self.query(q, r).into_iter().next()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Model;
    use crate::lattice::{bundled, quotient_dist, OrbitOptions};

    #[test]
    fn query_matches_brute_force_and_quotient_distance() {
        let l = bundled("modular").unwrap();
        let cover = CellCover::new(Model::H2, &l.region, 10.0);
        let mut index = LiftIndex::new(cover, 0.3, 2.0, 1_000_000);
        let pts = [
            (0.49, 0.9),
            (-0.45, 0.95),
            (0.0, 1.02),
            (0.3, 3.0),
            (-0.2, 9.5),
            (0.499, 5.0),
        ];
        let pts: Vec<Point> = pts.iter().map(|&(x, h)| Point::h2(x, h).unwrap()).collect();
        for (i, p) in pts.iter().enumerate() {
            assert!(index.insert(&l, i, p).unwrap() >= 1);
        }
        let probes = [
            (-0.5, 0.87),
            (0.5, 0.87),
            (0.05, 1.01),
            (0.5, 5.1),
            (-0.5, 5.05),
            (0.25, 2.9),
        ];
        for &(x, h) in &probes {
            let q = Point::h2(x, h).unwrap();
            let hits = index.query(&q, 0.3);
            let brute: Vec<(usize, f64)> = index
                .lifts()
                .iter()
                .enumerate()
                .map(|(i, lf)| (i, dist(&q, &lf.point)))
                .filter(|x| x.1 <= 0.3)
                .collect();
            assert_eq!(hits.len(), brute.len());
            for (j, p) in pts.iter().enumerate() {
                let qd = quotient_dist(&l, &q, p, 1.0, &OrbitOptions::default())
                    .unwrap()
                    .dist;
                let best = hits
                    .iter()
                    .filter(|(id, _)| index.lifts()[*id].net == j)
                    .map(|x| x.1)
                    .next();
                match best {
                    Some(d) => assert!((d - qd).abs() < 1e-9, "{x},{h} vs {j}: {d} {qd}"),
                    None => assert!(qd > 0.3 - 1e-12, "{x},{h} vs {j}: missed {qd}"),
                }
            }
        }
    }
}
