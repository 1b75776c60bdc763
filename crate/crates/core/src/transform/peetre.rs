//! Peetre maximal functions restricted to masked samples.
//!
//! The sup runs over blocks of samples visited in rings around the target
//! point. A block is skipped when its largest value over the smallest
//! possible weight cannot beat the current best, so the result is the same
//! maximum a plain double loop would find.

use rayon::prelude::*;

use super::Pyramid;
use crate::domain::Mask;
use crate::error::{Error, Result};
use crate::grid::SampledField;
use crate::scalar::Real;

/// Slack on pruning bounds against rounding in `powf`.
const PRUNE_SLACK: f64 = 1.0 + 1e-12;

struct Blocks {
    dim: usize,
    count: usize,
    side: usize,
    per_axis: usize,
    /// Largest masked magnitude per block, `-1` when the block has no masked sample.
    gmax: Vec<f64>,
    top: f64,
    abs: Vec<f64>,
    inside: Vec<bool>,
    /// Weight `(1 + 2^j dist)^N`, indexed by `|d|` in 1-D and `d1^2 + d2^2` in 2-D.
    weight: Vec<f64>,
}

impl Blocks {
    fn new<T: Real>(field: &SampledField<T>, mask: &Mask, n: f64, j: usize) -> Self {
        let grid = *field.grid();
        let dim = grid.dim();
        let c = grid.count();
        let side = if dim == 1 { 64 } else { 8 };
        let per_axis = c.div_ceil(side);
        let abs: Vec<f64> = field.values().iter().map(|v| v.f64().abs()).collect();
        let inside = mask.as_slice().to_vec();
        let nblocks = per_axis.pow(dim as u32);
        let mut gmax = vec![-1.0f64; nblocks];
        for i in 0..grid.len() {
            if !inside[i] {
                continue;
            }
            let [a, b] = grid.unravel(i);
            let blk = if dim == 1 {
                a / side
            } else {
                (a / side) * per_axis + b / side
            };
            gmax[blk] = gmax[blk].max(abs[i]);
        }
        let top = gmax.iter().cloned().fold(-1.0, f64::max);
        let h = grid.spacing();
        let scale = 2f64.powi(j as i32);
        let weight = if dim == 1 {
            (0..c)
                .map(|d| (1.0 + scale * (d as f64 * h)).powf(n))
                .collect()
        } else {
            let dmax = 2 * (c - 1) * (c - 1);
            (0..=dmax)
                .map(|d| (1.0 + scale * (h * (d as f64).sqrt())).powf(n))
                .collect()
        };
        Blocks {
            dim,
            count: c,
            side,
            per_axis,
            gmax,
            top,
            abs,
            inside,
            weight,
        }
    }

    /// Index distance from `x` to the block range `[lo, hi]` along one axis.
    fn gap(x: usize, lo: usize, hi: usize) -> usize {
        if x < lo {
            lo - x
        } else if x > hi {
            x - hi
        } else {
            0
        }
    }

    fn wkey(&self, da: usize, db: usize) -> usize {
        if self.dim == 1 {
            da
        } else {
            da * da + db * db
        }
    }

    fn block_range(&self, blk: usize) -> (usize, usize) {
        (blk * self.side, ((blk + 1) * self.side).min(self.count) - 1)
    }

    fn scan(&self, x: [usize; 2], ba: usize, bb: usize, best: &mut f64) {
        let blk = if self.dim == 1 { ba } else { ba * self.per_axis + bb };
        let g = self.gmax[blk];
        if g < 0.0 {
            return;
        }
        let (a0, a1) = self.block_range(ba);
        let (b0, b1) = if self.dim == 1 { (0, 0) } else { self.block_range(bb) };
        let dmin = self.wkey(Self::gap(x[0], a0, a1), Self::gap(x[1], b0, b1));
        if g / self.weight[dmin] * PRUNE_SLACK < *best {
            return;
        }
        for a in a0..=a1 {
            let da = a.abs_diff(x[0]);
            for b in b0..=b1 {
                let i = if self.dim == 1 { a } else { a * self.count + b };
                if !self.inside[i] {
                    continue;
                }
                let v = self.abs[i] / self.weight[self.wkey(da, b.abs_diff(x[1]))];
                if v > *best {
                    *best = v;
                }
            }
        }
    }

    fn at(&self, x: [usize; 2]) -> f64 {
        let mut best = 0.0f64;
        if self.top < 0.0 {
            return best;
        }
        let xa = x[0] / self.side;
        let xb = if self.dim == 1 { 0 } else { x[1] / self.side };
        let p = self.per_axis as i64;
        for r in 0..self.per_axis as i64 {
            if r >= 1 {
                let gap = ((r - 1) as usize) * self.side + 1;
                let bound = self.top / self.weight[self.wkey(gap, 0)];
                if bound * PRUNE_SLACK < best {
                    break;
                }
            }
            if self.dim == 1 {
                for ba in [xa as i64 - r, xa as i64 + r] {
                    if (0..p).contains(&ba) {
                        self.scan(x, ba as usize, 0, &mut best);
                    }
                    if r == 0 {
                        break;
                    }
                }
            } else {
                let (ca, cb) = (xa as i64, xb as i64);
                for ba in ca - r..=ca + r {
                    if !(0..p).contains(&ba) {
                        continue;
                    }
                    let edge = ba == ca - r || ba == ca + r;
                    let step = if edge || r == 0 { 1 } else { 2 * r };
                    let mut bb = cb - r;
                    while bb <= cb + r {
                        if (0..p).contains(&bb) {
                            self.scan(x, ba as usize, bb as usize, &mut best);
                        }
                        bb += step.max(1);
                    }
                }
            }
        }
        best
    }
}

fn check<T: Real>(field: &SampledField<T>, mask: &Mask, n: f64) -> Result<()> {
    if mask.grid() != field.grid() {
        return Err(Error::GridMismatch("mask and field grids differ".into()));
    }
    if !(n >= 0.0 && n.is_finite()) {
        return Err(Error::InvalidParameter(format!("Peetre exponent {n}")));
    }
    Ok(())
}

/// `max_{y in mask} |v(y)| / (1 + 2^j |x - y|)^N` at every grid point `x`.
pub fn peetre_field<T: Real>(field: &SampledField<T>, mask: &Mask, n: f64, j: usize) -> Result<SampledField<T>> {
    check(field, mask, n)?;
    let blocks = Blocks::new(field, mask, n, j);
    let grid = *field.grid();
    let values = (0..grid.len())
        .into_par_iter()
        .map(|i| T::lit(blocks.at(grid.unravel(i))))
        .collect();
    Ok(SampledField::from_parts(grid, values))
}

/// Peetre maximal function of level `j` of a pyramid.
pub fn peetre_maximal<T: Real>(pyr: &Pyramid<T>, mask: &Mask, n: f64, j: usize) -> Result<SampledField<T>> {
    let level = pyr
        .level(j)
        .ok_or_else(|| Error::InvalidParameter(format!("level {j} above J_max {}", pyr.j_max())))?;
    peetre_field(level, mask, n, j)
}

/// The same maximum at an arbitrary point, by direct search.
pub fn peetre_at<T: Real>(field: &SampledField<T>, mask: &Mask, n: f64, j: usize, x: &[f64]) -> Result<f64> {
    check(field, mask, n)?;
    let grid = field.grid();
    let scale = 2f64.powi(j as i32);
    let mut best = 0.0f64;
    for i in 0..grid.len() {
        if !mask.contains(i) {
            continue;
        }
        let y = grid.point(i);
        let d2: f64 = (0..grid.dim()).map(|ax| (x[ax] - y[ax]) * (x[ax] - y[ax])).sum();
        let v = field.values()[i].f64().abs() / (1.0 + scale * d2.sqrt()).powf(n);
        best = best.max(v);
    }
    Ok(best)
}
