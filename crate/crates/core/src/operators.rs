//! Operators `T f = sum_j 2^{j gamma} eta_j * (1_Ω (theta_j * f))`, the
//! extension operator and the derivative pieces `S_alpha`.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::Mask;
use crate::error::{Error, Result};
use crate::family::{derivative_split, LpFamily};
use crate::grid::SampledField;
use crate::scalar::Real;

/// The families and weight exponent of an operator `T`.
#[derive(Clone, Copy, Debug)]
pub struct OperatorSpec<'a, T: Real> {
    pub eta: &'a LpFamily<T>,
    pub theta: &'a LpFamily<T>,
    pub gamma: f64,
}

/// Spectra of the terms `2^{j gamma} eta_j * (1_Ω (theta_j * f))`, `j = 0..=J`.
fn term_spectra<T: Real>(
    f: &SampledField<T>,
    mask: &Mask,
    spec: &OperatorSpec<'_, T>,
) -> Result<Vec<Vec<Complex<T>>>> {
    let grid = *f.grid();
    if mask.grid() != &grid {
        return Err(Error::GridMismatch("mask and field grids differ".into()));
    }
    let tws = spec.theta.workspace();
    let ews = spec.eta.workspace();
    if tws.grid() != &grid || ews.grid() != &grid {
        return Err(Error::GridMismatch("families built for another grid".into()));
    }
    for k in spec.theta.kernels().iter().chain(spec.eta.kernels()) {
        if let Some(r) = k.radius() {
            k.workspace().check_radius(r)?;
        }
    }
    let input = if spec.theta.is_cone_supported() {
        mask.apply(f)?
    } else {
        f.clone()
    };
    let mut fhat = tws.embed(input.values());
    tws.forward(&mut fhat);
    let levels = spec.theta.j_max().min(spec.eta.j_max());
    (0..=levels)
        .into_par_iter()
        .map(|j| {
            let th = spec.theta.kernels()[j].spectrum();
            let mut buf: Vec<Complex<T>> = fhat.iter().zip(th.iter()).map(|(a, b)| *a * *b).collect();
            tws.inverse(&mut buf);
            let inner = mask.apply(&SampledField::from_parts(grid, tws.extract(&buf)))?;
            let mut ghat = ews.embed(inner.values());
            ews.forward(&mut ghat);
            let w = T::lit(2f64.powf(j as f64 * spec.gamma));
            let eh = spec.eta.kernels()[j].spectrum();
            for (g, e) in ghat.iter_mut().zip(eh.iter()) {
                *g = *g * *e * w;
            }
            Ok(ghat)
        })
        .collect()
}

/// Truncated sum over `j <= min(J_max(eta), J_max(theta))`.
///
/// When `theta` is cone-supported, `f` is first multiplied by the mask, so
/// the result depends only on the values of `f` in the domain.
pub fn apply_t<T: Real>(f: &SampledField<T>, mask: &Mask, spec: &OperatorSpec<'_, T>) -> Result<SampledField<T>> {
    let terms = term_spectra(f, mask, spec)?;
    let ews = spec.eta.workspace();
    let mut acc = vec![Complex::new(T::zero(), T::zero()); ews.len()];
    for t in &terms {
        for (a, b) in acc.iter_mut().zip(t) {
            *a = *a + *b;
        }
    }
    ews.inverse(&mut acc);
    Ok(SampledField::from_parts(*f.grid(), ews.extract(&acc)))
}

/// Size of the omitted terms `j > J` of an operator sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    /// Sup norm of each computed term.
    pub terms: Vec<f64>,
    /// `(t_J / t_{J-2})^{1/2}` over the last three terms.
    pub factor: f64,
    /// `t_J factor / (1 - factor)`, infinite when the terms do not decay.
    pub estimate: f64,
}

/// Geometric tail estimate from the sup norms of the computed terms.
pub fn truncation_tail<T: Real>(f: &SampledField<T>, mask: &Mask, spec: &OperatorSpec<'_, T>) -> Result<TailEstimate> {
    let ews = spec.eta.workspace();
    let terms: Vec<f64> = term_spectra(f, mask, spec)?
        .into_par_iter()
        .map(|mut t| {
            ews.inverse(&mut t);
            ews.extract(&t).iter().fold(0.0f64, |m, v| m.max(v.f64().abs()))
        })
        .collect();
    let n = terms.len();
    if n < 3 {
        return Err(Error::InvalidParameter("tail estimate needs three levels".into()));
    }
    let (last, early) = (terms[n - 1], terms[n - 3]);
    let factor = if early > 0.0 { (last / early).sqrt() } else { 0.0 };
    let estimate = if last == 0.0 {
        0.0
    } else if factor < 1.0 {
        last * factor / (1.0 - factor)
    } else {
        f64::INFINITY
    };
    Ok(TailEstimate {
        terms,
        factor,
        estimate,
    })
}

/// `E f = sum_j psi_j * (1_Ω (phi_j * f))`.
pub fn extend<T: Real>(
    f: &SampledField<T>,
    mask: &Mask,
    phi: &LpFamily<T>,
    psi: &LpFamily<T>,
) -> Result<SampledField<T>> {
    apply_t(
        f,
        mask,
        &OperatorSpec {
            eta: psi,
            theta: phi,
            gamma: 0.0,
        },
    )
}

/// `S_0 g = psi_0 * (1_Ω (phi_0 * g))` for `alpha = 0`, otherwise
/// `S_alpha g = sum_{j >= 1} 2^{-jm} psi_j * (1_Ω (phi~^alpha_j * g))`.
///
/// The split kernels are not cone-supported, so `g` is used on the whole grid.
pub fn apply_s_alpha<T: Real>(
    g: &SampledField<T>,
    mask: &Mask,
    alpha: &[usize],
    m: usize,
    phi: &LpFamily<T>,
    psi: &LpFamily<T>,
) -> Result<SampledField<T>> {
    let dim = g.grid().dim();
    if alpha.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: alpha.len(),
        });
    }
    if alpha.iter().all(|&a| a == 0) {
        return apply_s0(g, mask, phi, psi);
    }
    if alpha.iter().sum::<usize>() != m {
        return Err(Error::InvalidParameter(format!("|alpha| must equal m = {m}")));
    }
    let split = derivative_split(phi, m)?;
    let (_, theta) = split
        .iter()
        .find(|(a, _)| a.as_slice() == alpha)
        .ok_or_else(|| Error::InvalidParameter(format!("no split family for {alpha:?}")))?;
    apply_split(g, mask, theta, m, psi)
}

/// `S_alpha g` for a precomputed split family.
pub fn apply_split<T: Real>(
    g: &SampledField<T>,
    mask: &Mask,
    split: &LpFamily<T>,
    m: usize,
    psi: &LpFamily<T>,
) -> Result<SampledField<T>> {
    apply_t(
        g,
        mask,
        &OperatorSpec {
            eta: psi,
            theta: split,
            gamma: -(m as f64),
        },
    )
}

fn apply_s0<T: Real>(
    g: &SampledField<T>,
    mask: &Mask,
    phi: &LpFamily<T>,
    psi: &LpFamily<T>,
) -> Result<SampledField<T>> {
    let ws = phi.workspace();
    let input = mask.apply(g)?;
    let mut buf = ws.embed(input.values());
    ws.forward(&mut buf);
    let th = phi.kernel(0)?.spectrum();
    for (a, b) in buf.iter_mut().zip(th.iter()) {
        *a = *a * *b;
    }
    ws.inverse(&mut buf);
    let inner = mask.apply(&SampledField::from_parts(*g.grid(), ws.extract(&buf)))?;
    let ews = psi.workspace();
    let mut out = ews.embed(inner.values());
    ews.forward(&mut out);
    let eh = psi.kernel(0)?.spectrum();
    for (a, b) in out.iter_mut().zip(eh.iter()) {
        *a = *a * *b;
    }
    ews.inverse(&mut out);
    Ok(SampledField::from_parts(*g.grid(), ews.extract(&out)))
}
