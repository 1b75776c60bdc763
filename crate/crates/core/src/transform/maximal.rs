//! Centered Hardy-Littlewood maximal function over open balls.
//!
//! Averages run over the grid samples in the ball that lie in the box, so a
//! constant field is its own maximal function. Radii form a geometric
//! sequence from `h` to the box diameter with a fixed number per octave.

use rayon::prelude::*;

use crate::grid::SampledField;
use crate::scalar::Real;

/// Radii per octave used by [`hl_maximal`].
pub const DEFAULT_RADII_PER_OCTAVE: u32 = 16;

/// Ball radii in units of `h`, from 1 up to the box diameter.
pub fn hl_radii(count: usize, dim: usize, per_octave: u32) -> Vec<f64> {
    let diameter = (count - 1) as f64 * (dim as f64).sqrt();
    let mut out = Vec::new();
    let mut k = 0;
    loop {
        let r = 2f64.powf(k as f64 / per_octave.max(1) as f64);
        if r >= diameter {
            out.push(diameter);
            break;
        }
        out.push(r);
        k += 1;
    }
    out
}

/// Largest integer `w` with `w^2 + d^2 < r^2`, or `None` if even `w = 0` fails.
fn half_width(r: f64, d: i64) -> Option<i64> {
    let r2 = r * r;
    let d2 = (d * d) as f64;
    if d2 >= r2 {
        return None;
    }
    let mut w = (r2 - d2).sqrt().ceil() as i64;
    while w > 0 && (w * w) as f64 + d2 >= r2 {
        w -= 1;
    }
    while ((w + 1) * (w + 1)) as f64 + d2 < r2 {
        w += 1;
    }
    Some(w)
}

struct Tables {
    dim: usize,
    count: usize,
    prefix: Vec<f64>,
    /// Per radius, the row half-widths for row offsets `0..=m`.
    widths: Vec<Vec<i64>>,
}

impl Tables {
    fn new<T: Real>(f: &SampledField<T>, per_octave: u32) -> Self {
        let grid = f.grid();
        let c = grid.count();
        let dim = grid.dim();
        let rows = if dim == 1 { 1 } else { c };
        let mut prefix = vec![0.0; rows * (c + 1)];
        for a in 0..rows {
            let mut acc = 0.0;
            for b in 0..c {
                acc += f.values()[a * c + b].f64().abs();
                prefix[a * (c + 1) + b + 1] = acc;
            }
        }
        let mut widths: Vec<Vec<i64>> = hl_radii(c, dim, per_octave)
            .into_iter()
            .map(|r| {
                if dim == 1 {
                    vec![half_width(r, 0).unwrap_or(0)]
                } else {
                    (0..)
                        .map_while(|d| half_width(r, d))
                        .collect()
                }
            })
            .collect();
        widths.dedup();
        Tables {
            dim,
            count: c,
            prefix,
            widths,
        }
    }

    fn row_sum(&self, row: usize, lo: i64, hi: i64) -> (f64, f64) {
        let c = self.count as i64;
        let lo = lo.max(0);
        let hi = hi.min(c - 1);
        if lo > hi {
            return (0.0, 0.0);
        }
        let base = row * (self.count + 1);
        (
            self.prefix[base + hi as usize + 1] - self.prefix[base + lo as usize],
            (hi - lo + 1) as f64,
        )
    }

    fn at(&self, idx: [usize; 2]) -> f64 {
        let c = self.count as i64;
        let mut best = 0.0f64;
        for w in &self.widths {
            let (mut s, mut n) = (0.0, 0.0);
            if self.dim == 1 {
                let (a, b) = self.row_sum(0, idx[0] as i64 - w[0], idx[0] as i64 + w[0]);
                s += a;
                n += b;
            } else {
                let m = w.len() as i64 - 1;
                for d in -m..=m {
                    let row = idx[0] as i64 + d;
                    if row < 0 || row >= c {
                        continue;
                    }
                    let hw = w[d.unsigned_abs() as usize];
                    let (a, b) = self.row_sum(row as usize, idx[1] as i64 - hw, idx[1] as i64 + hw);
                    s += a;
                    n += b;
                }
            }
            if n > 0.0 {
                best = best.max(s / n);
            }
        }
        best
    }
}

/// `M f` at every sample with the default radius sequence.
pub fn hl_maximal<T: Real>(f: &SampledField<T>) -> SampledField<T> {
    let all: Vec<usize> = (0..f.grid().len()).collect();
    let vals = hl_maximal_at(f, &all, DEFAULT_RADII_PER_OCTAVE);
    SampledField::from_parts(*f.grid(), vals)
}

/// `M f` at the listed flat indices.
pub fn hl_maximal_at<T: Real>(f: &SampledField<T>, points: &[usize], per_octave: u32) -> Vec<T> {
    let t = Tables::new(f, per_octave);
    let grid = *f.grid();
    points
        .par_iter()
        .map(|&i| T::lit(t.at(grid.unravel(i))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn constant_is_fixed() {
        let g = make_grid(2, 1.0, 4).unwrap();
        let f = SampledField::<f64>::from_fn(g, |_| 3.0);
        let m = hl_maximal(&f);
        assert!(m.values().iter().all(|&v| (v - 3.0).abs() < 1e-13));
    }

    #[test]
    fn half_widths() {
        assert_eq!(half_width(1.0, 0), Some(0));
        assert_eq!(half_width(1.5, 1), Some(1));
        assert_eq!(half_width(1.5, 2), None);
        assert_eq!(half_width(5.0, 3), Some(3));
    }
}
