use num_complex::Complex;

use super::cone::partial_sum_kernel;
use super::{FamilyKind, Kernel, LpFamily, Support};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// The dual family `psi` with `sum_j psi_j * phi_j = delta` in the limit.
///
/// With `Phi_j` the spectrum of `2^{jn} phi_0(2^j .)`:
/// `psi_0 = 2 Phi_0 - Phi_0^3` and
/// `psi_j = (Phi_j + Phi_{j-1}) (2 - Phi_j^2 - Phi_{j-1}^2)`.
pub fn dual_family<T: Real>(phi: &LpFamily<T>) -> Result<LpFamily<T>> {
    if phi.kind() != FamilyKind::Cone {
        return Err(Error::InvalidFamily("dual requires a cone family".into()));
    }
    let base = phi
        .base()
        .ok_or_else(|| Error::InvalidFamily("cone family without base kernel".into()))?
        .clone();
    let ws = phi.workspace().clone();
    let grid = *ws.grid();
    let h = grid.spacing();
    let two = T::lit(2.0);
    let partial: Vec<Kernel<T>> = (0..=phi.j_max())
        .map(|j| partial_sum_kernel(&base, &ws, j))
        .collect();
    let (blo, bhi) = base.support();
    let mut kernels = Vec::with_capacity(partial.len());
    for j in 0..partial.len() {
        let cur = partial[j].spectrum();
        let spectrum: Vec<Complex<T>> = if j == 0 {
            cur.iter().map(|&a| a * two - a * a * a).collect()
        } else {
            let prev = partial[j - 1].spectrum();
            cur.iter()
                .zip(prev.iter())
                .map(|(&a, &b)| (a + b) * (Complex::new(two, T::zero()) - a * a - b * b))
                .collect()
        };
        let scale = 2f64.powi(-(j as i32 - 1).max(0));
        let mut lo = [0i64; 2];
        let mut hi = [0i64; 2];
        for ax in 0..grid.dim() {
            let l = blo[ax].min(blo[ax] / 2.0) * scale;
            let u = bhi[ax].max(bhi[ax] / 2.0) * scale;
            let (l, u) = if j == 0 { (blo[ax], bhi[ax]) } else { (l, u) };
            lo[ax] = (3.0 * l / h).floor() as i64;
            hi[ax] = (3.0 * u / h).ceil() as i64;
        }
        kernels.push(Kernel::from_spectrum(
            ws.clone(),
            spectrum,
            Support::Compact { lo, hi },
        ));
    }
    Ok(LpFamily::assemble(
        FamilyKind::Dual,
        phi.moment_order(),
        phi.aperture(),
        kernels,
        ws,
        Some(base),
        None,
    ))
}
