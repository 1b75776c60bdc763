use num_complex::Complex;

use super::{FamilyKind, Kernel, LpFamily, Support};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Exponents of a partial derivative, one per axis.
pub type MultiIndex = Vec<usize>;

/// All multi-indices of length `dim` and order `m`, lexicographically descending.
pub fn split_multi_indices(dim: usize, m: usize) -> Vec<MultiIndex> {
    if dim == 1 {
        vec![vec![m]]
    } else {
        (0..=m).rev().map(|a| vec![a, m - a]).collect()
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `(i xi)^alpha` scaled by `(2 pi)^{|alpha|}`, with `sign` applied to `xi`.
pub(crate) fn monomial(xi: [f64; 2], alpha: &[usize], sign: f64) -> Complex<f64> {
    let mut z = Complex::new(1.0, 0.0);
    for (ax, &a) in alpha.iter().enumerate() {
        let w = Complex::new(0.0, sign * 2.0 * std::f64::consts::PI * xi[ax]);
        z *= w.powu(a as u32);
    }
    z
}

/// Splits `phi_j = 2^{-jm} sum_{|alpha| = m} d^alpha phi~^alpha_j` on the Fourier grid.
///
/// Level 0 of each returned family is the zero kernel.
pub fn derivative_split<T: Real>(phi: &LpFamily<T>, m: usize) -> Result<Vec<(MultiIndex, LpFamily<T>)>> {
    if m == 0 {
        return Err(Error::InvalidParameter("split order must be at least 1".into()));
    }
    if phi.kind() != FamilyKind::Cone {
        return Err(Error::InvalidFamily("split requires a cone family".into()));
    }
    if phi.moment_order() < m {
        return Err(Error::InvalidFamily(format!(
            "moment order {} below split order {m}",
            phi.moment_order()
        )));
    }
    let ws = phi.workspace().clone();
    let dim = ws.grid().dim();
    let spectra: Vec<_> = phi.kernels().iter().map(|k| k.spectrum().into_owned()).collect();
    let freqs: Vec<[f64; 2]> = (0..ws.len()).map(|i| ws.frequency_of(i)).collect();
    let mut out = Vec::new();
    for alpha in split_multi_indices(dim, m) {
        let weight = factorial(m) / alpha.iter().map(|&a| factorial(a)).product::<f64>();
        let symbol: Vec<Complex<f64>> = freqs
            .iter()
            .map(|&xi| {
                let r2 = (2.0 * std::f64::consts::PI).powi(2) * (xi[0] * xi[0] + xi[1] * xi[1]);
                if r2 == 0.0 {
                    Complex::new(0.0, 0.0)
                } else {
                    monomial(xi, &alpha, -1.0) * (weight / r2.powi(m as i32))
                }
            })
            .collect();
        let mut kernels = Vec::with_capacity(spectra.len());
        for (j, spec) in spectra.iter().enumerate() {
            let data: Vec<Complex<T>> = if j == 0 {
                vec![Complex::new(T::zero(), T::zero()); ws.len()]
            } else {
                let scale = 2f64.powi((j * m) as i32);
                spec.iter()
                    .zip(&symbol)
                    .map(|(p, s)| {
                        let s = s * scale;
                        *p * Complex::new(T::lit(s.re), T::lit(s.im))
                    })
                    .collect()
            };
            kernels.push(Kernel::from_spectrum(ws.clone(), data, Support::Periodic));
        }
        let fam = LpFamily::assemble(
            FamilyKind::DerivativeSplit,
            phi.moment_order(),
            phi.aperture(),
            kernels,
            ws.clone(),
            phi.base().cloned(),
            Some(alpha.clone()),
        );
        out.push((alpha, fam));
    }
    Ok(out)
}
