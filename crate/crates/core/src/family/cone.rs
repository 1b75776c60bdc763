use std::sync::Arc;

use super::base::BaseKernel;
use super::{FamilyKind, Kernel, KernelSamples, LpFamily};
use crate::error::{Error, Result};
use crate::fft::Workspace;
use crate::grid::Grid;
use crate::scalar::Real;

/// Smallest number of cells the finest kernel must span per axis.
pub const MIN_LEVEL_CELLS: f64 = 4.0;

fn offset_box(grid: &Grid, lo: [f64; 2], hi: [f64; 2]) -> ([i64; 2], [i64; 2]) {
    let h = grid.spacing();
    let mut a = [0i64; 2];
    let mut b = [0i64; 2];
    for ax in 0..grid.dim() {
        a[ax] = (lo[ax] / h).ceil() as i64;
        b[ax] = (hi[ax] / h).floor() as i64;
    }
    (a, b)
}

/// Largest offset magnitude of the kernels of a cone family, in samples.
fn base_radius(base: &BaseKernel, grid: &Grid) -> usize {
    let (lo, hi) = base.level_support(1);
    let (a, b) = offset_box(grid, lo, hi);
    a.iter()
        .chain(b.iter())
        .map(|v| v.unsigned_abs() as usize)
        .max()
        .unwrap_or(0)
        + 1
}

/// Workspace wide enough for the family, its dual and their products.
pub fn cone_workspace<T: Real>(base: &BaseKernel, grid: &Grid) -> Arc<Workspace<T>> {
    Workspace::with_margin(grid, 3 * base_radius(base, grid) + 2)
}

pub(crate) fn sample_level<T: Real>(
    grid: &Grid,
    lo: [f64; 2],
    hi: [f64; 2],
    f: impl Fn(&[f64]) -> f64,
) -> KernelSamples<T> {
    let (a, b) = offset_box(grid, lo, hi);
    let h = grid.spacing();
    let dim = grid.dim();
    let shape = [(b[0] - a[0] + 1) as usize, (b[1] - a[1] + 1) as usize];
    let mut values = Vec::with_capacity(shape[0] * shape[1]);
    for i in a[0]..=b[0] {
        for k in a[1]..=b[1] {
            let x = [i as f64 * h, k as f64 * h];
            values.push(T::lit(f(&x[..dim])));
        }
    }
    KernelSamples {
        origin: a,
        shape,
        values,
    }
}

/// The family `phi_0, phi_1, ...` generated by `base` on `grid`.
pub fn scale_family<T: Real>(base: &BaseKernel, grid: &Grid, j_max: usize) -> Result<LpFamily<T>> {
    if base.dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            found: base.dim(),
        });
    }
    let (lo, hi) = base.level_support(j_max);
    for ax in 0..grid.dim() {
        let cells = (hi[ax] - lo[ax]) / grid.spacing();
        if cells < MIN_LEVEL_CELLS {
            return Err(Error::Resolution(format!(
                "level {j_max} kernel spans {cells} cells along axis {ax}"
            )));
        }
    }
    let ws = cone_workspace::<T>(base, grid);
    let kernels = (0..=j_max)
        .map(|j| {
            let (lo, hi) = base.level_support(j);
            let s = sample_level(grid, lo, hi, |x| base.eval_level(j, x));
            Kernel::from_samples(ws.clone(), s)
        })
        .collect();
    Ok(LpFamily::assemble(
        FamilyKind::Cone,
        base.moment_order(),
        base.aperture(),
        kernels,
        ws,
        Some(Arc::new(base.clone())),
        None,
    ))
}

/// Samples of `2^{Jn} phi_0(2^J x)` as a kernel on the family workspace.
pub(crate) fn partial_sum_kernel<T: Real>(base: &BaseKernel, ws: &Arc<Workspace<T>>, level: usize) -> Kernel<T> {
    let (lo, hi) = base.support();
    let s = 2f64.powi(-(level as i32));
    let lo = [lo[0] * s, lo[1] * s];
    let hi = [hi[0] * s, hi[1] * s];
    let samples = sample_level(ws.grid(), lo, hi, |x| base.eval_partial(level, x));
    Kernel::from_samples(ws.clone(), samples)
}

impl<T: Real> LpFamily<T> {
    /// Kernel `2^{Jn} phi_0(2^J .)` of a cone family.
    pub fn partial_sum_kernel(&self, level: usize) -> Result<Kernel<T>> {
        let base = self
            .base()
            .ok_or_else(|| Error::InvalidFamily("family has no base kernel".into()))?;
        Ok(partial_sum_kernel(base, self.workspace(), level))
    }
}
