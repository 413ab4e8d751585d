use crate::geometry::{Model, Point};
use crate::lattice::Region;

/// Axis-aligned box `[x0,x1] × [y0,y1] × [lo,hi]` in upper half-space
/// coordinates (`y` is unused in H²).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub h: (f64, f64),
}

impl Cell {
    /// Exact hyperbolic distance from `p` to the box: clamp horizontally,
    /// then the optimal height is `√(Δ² + h²)` clamped to the box.
    pub fn dist(&self, p: &Point) -> f64 {
        let w = p.w();
        let h = p.height();
        let dx = w.re - w.re.clamp(self.x.0, self.x.1);
        let dy = w.im - w.im.clamp(self.y.0, self.y.1);
        let horiz = dx * dx + dy * dy;
        let y = (horiz + h * h).sqrt().clamp(self.h.0, self.h.1);
        let num = horiz + (y - h) * (y - h);
        if num == 0.0 {
            return 0.0;
        }
        2.0 * ((num / (4.0 * h * y)).sqrt()).asinh()
    }
}

/// A finite union of boxes covering the part of the region between `floor`
/// and `ceiling`, refined where the region dips towards the boundary so that
/// every box is hyperbolically small across.
#[derive(Clone, Debug)]
pub struct CellCover {
    pub cells: Vec<Cell>,
}

const SAMPLES: usize = 16;
const MAX_DEPTH: u32 = 14;

fn lower_boundary(region: &Region, x: f64, y: f64) -> f64 {
    region
        .excluded_balls
        .iter()
        .map(|b| {
            let d2 = (x - b.center[0]).powi(2) + (y - b.center[1]).powi(2);
            (b.radius * b.radius - d2).max(0.0).sqrt()
        })
        .fold(0.0, f64::max)
}

impl CellCover {
    pub fn new(model: Model, region: &Region, ceiling: f64) -> Self {
        let floor = region.floor;
        let y_range = match model {
            Model::H2 => (0.0, 0.0),
            Model::H3 => region.x2_range.unwrap_or((0.0, 0.0)),
        };
        let mut cells = Vec::new();
        let mut stack = vec![(region.x_range, y_range, 0u32)];
        while let Some((xr, yr, depth)) = stack.pop() {
            // sampled minimum of the lower boundary, shaded down slightly
            let mut low = f64::INFINITY;
            for i in 0..=SAMPLES {
                let x = xr.0 + (xr.1 - xr.0) * i as f64 / SAMPLES as f64;
                let js = if model == Model::H3 { SAMPLES } else { 0 };
                for j in 0..=js {
                    let y = if js == 0 {
                        yr.0
                    } else {
                        yr.0 + (yr.1 - yr.0) * j as f64 / js as f64
                    };
                    low = low.min(lower_boundary(region, x, y));
                }
            }
            let lo = (0.98 * low).max(floor).min(ceiling);
            let width = (xr.1 - xr.0).max(yr.1 - yr.0);
            if width <= 0.5 * lo || depth >= MAX_DEPTH {
                cells.push(Cell {
                    x: xr,
                    y: yr,
                    h: (lo, ceiling),
                });
                continue;
            }
            let xm = 0.5 * (xr.0 + xr.1);
            if model == Model::H3 {
                let ym = 0.5 * (yr.0 + yr.1);
                for (a, b) in [
                    ((xr.0, xm), (yr.0, ym)),
                    ((xm, xr.1), (yr.0, ym)),
                    ((xr.0, xm), (ym, yr.1)),
                    ((xm, xr.1), (ym, yr.1)),
                ] {
                    stack.push((a, b, depth + 1));
                }
            } else {
                stack.push(((xr.0, xm), yr, depth + 1));
                stack.push(((xm, xr.1), yr, depth + 1));
            }
        }
        Self { cells }
    }

    pub fn dist(&self, p: &Point) -> f64 {
        self.cells
            .iter()
            .map(|c| c.dist(p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}
