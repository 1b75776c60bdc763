//! Zero-padded periodic workspaces for linear convolution by FFT.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::Real;

/// A periodic grid of `size^n` samples with spacing `h` hosting the box of a grid.
///
/// Box sample `k` sits at workspace index `k`; a kernel offset `o` sits at `o mod size`.
pub struct Workspace<T: Real> {
    grid: Grid,
    size: usize,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
}

impl<T: Real> fmt::Debug for Workspace<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Workspace")
            .field("grid", &self.grid)
            .field("size", &self.size)
            .finish()
    }
}

/// Rows processed per parallel task.
const ROW_CHUNK: usize = 16;

impl<T: Real> Workspace<T> {
    /// Smallest power-of-two workspace leaving `margin` samples of padding.
    pub fn with_margin(grid: &Grid, margin: usize) -> Arc<Self> {
        Self::with_size(grid, (grid.count() + margin).next_power_of_two())
    }

    pub fn with_size(grid: &Grid, size: usize) -> Arc<Self> {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(size);
        let inv = planner.plan_fft_inverse(size);
        Arc::new(Workspace {
            grid: *grid,
            size,
            fwd,
            inv,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Samples per axis.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn len(&self) -> usize {
        self.size.pow(self.grid.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest kernel offset radius that still gives wrap-free convolution.
    pub fn max_radius(&self) -> usize {
        self.size - self.grid.count()
    }

    pub fn check_radius(&self, radius: usize) -> Result<()> {
        if radius > self.max_radius() {
            return Err(Error::PaddingInsufficient {
                workspace: self.size,
                required: self.grid.count() + radius,
            });
        }
        Ok(())
    }

    /// Signed frequency index of workspace index `k`.
    pub fn signed_index(&self, k: usize) -> i64 {
        if k < self.size / 2 {
            k as i64
        } else {
            k as i64 - self.size as i64
        }
    }

    /// Frequency in cycles per unit length of workspace index `k`.
    pub fn frequency(&self, k: usize) -> f64 {
        self.signed_index(k) as f64 / (self.size as f64 * self.grid.spacing())
    }

    /// Frequency vector of a flat workspace index.
    pub fn frequency_of(&self, flat: usize) -> [f64; 2] {
        if self.grid.dim() == 1 {
            [self.frequency(flat), 0.0]
        } else {
            [
                self.frequency(flat / self.size),
                self.frequency(flat % self.size),
            ]
        }
    }

    /// Workspace position of a signed kernel offset.
    pub fn wrap(&self, offset: i64) -> usize {
        offset.rem_euclid(self.size as i64) as usize
    }

    pub fn flat(&self, a: usize, b: usize) -> usize {
        if self.grid.dim() == 1 {
            a
        } else {
            a * self.size + b
        }
    }

    /// Signed offsets of a flat workspace index.
    pub fn offsets_of(&self, flat: usize) -> [i64; 2] {
        if self.grid.dim() == 1 {
            [self.signed_index(flat), 0]
        } else {
            [
                self.signed_index(flat / self.size),
                self.signed_index(flat % self.size),
            ]
        }
    }

    /// Box values placed at the low corner of a zeroed workspace buffer.
    pub fn embed(&self, values: &[T]) -> Vec<Complex<T>> {
        let mut buf = vec![Complex::new(T::zero(), T::zero()); self.len()];
        let c = self.grid.count();
        if self.grid.dim() == 1 {
            for (b, v) in buf.iter_mut().zip(values) {
                b.re = *v;
            }
        } else {
            for a in 0..c {
                let row = &mut buf[a * self.size..a * self.size + c];
                for (b, v) in row.iter_mut().zip(&values[a * c..(a + 1) * c]) {
                    b.re = *v;
                }
            }
        }
        buf
    }

    /// Real parts of the box region.
    pub fn extract(&self, buf: &[Complex<T>]) -> Vec<T> {
        let c = self.grid.count();
        if self.grid.dim() == 1 {
            buf[..c].iter().map(|z| z.re).collect()
        } else {
            let mut out = Vec::with_capacity(c * c);
            for a in 0..c {
                out.extend(buf[a * self.size..a * self.size + c].iter().map(|z| z.re));
            }
            out
        }
    }

    pub fn forward(&self, buf: &mut [Complex<T>]) {
        self.transform(buf, &self.fwd);
    }

    /// Inverse transform including the `1/size^n` normalization.
    pub fn inverse(&self, buf: &mut [Complex<T>]) {
        self.transform(buf, &self.inv);
        let s = T::one() / T::lit(self.len() as f64);
        buf.par_iter_mut().for_each(|z| *z = *z * s);
    }

    fn transform(&self, buf: &mut [Complex<T>], plan: &Arc<dyn Fft<T>>) {
        assert_eq!(buf.len(), self.len());
        let p = self.size;
        if self.grid.dim() == 1 {
            plan.process(buf);
            return;
        }
        let rows = |buf: &mut [Complex<T>]| {
            buf.par_chunks_mut(p * ROW_CHUNK)
                .for_each(|chunk| plan.process(chunk));
        };
        rows(buf);
        transpose(buf, p);
        rows(buf);
        transpose(buf, p);
    }
}

fn transpose<T: Copy>(buf: &mut [T], p: usize) {
    for a in 0..p {
        for b in a + 1..p {
            buf.swap(a * p + b, b * p + a);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn roundtrip_2d() {
        let g = make_grid(2, 1.0, 4).unwrap();
        let ws = Workspace::<f64>::with_margin(&g, 5);
        assert_eq!(ws.size(), 64);
        let vals: Vec<f64> = (0..g.len()).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut buf = ws.embed(&vals);
        ws.forward(&mut buf);
        ws.inverse(&mut buf);
        let back = ws.extract(&buf);
        for (a, b) in vals.iter().zip(&back) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn frequencies() {
        let g = make_grid(1, 1.0, 4).unwrap();
        let ws = Workspace::<f64>::with_size(&g, 64);
        assert_eq!(ws.frequency(1), 0.25);
        assert_eq!(ws.frequency(63), -0.25);
        assert_eq!(ws.wrap(-3), 61);
    }
}
