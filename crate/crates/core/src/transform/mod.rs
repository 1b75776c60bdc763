//! Convolution pyramids, spectral derivatives and maximal operators.

mod derivative;
mod maximal;
mod peetre;

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::family::{FamilyKind, Kernel, LpFamily};
use crate::grid::{Grid, SampledField};
use crate::scalar::Real;

pub use derivative::{spectral_derivative, Derivative, ALIASING_LIMIT};
pub use maximal::{hl_maximal, hl_maximal_at, hl_radii, DEFAULT_RADII_PER_OCTAVE};
pub use peetre::{peetre_at, peetre_field, peetre_maximal};

/// The stack `(k_j * f)_{j=0..J_max}` on one grid.
#[derive(Clone, Debug)]
pub struct Pyramid<T> {
    levels: Vec<SampledField<T>>,
    kind: Option<FamilyKind>,
}

impl<T: Real> Pyramid<T> {
    pub fn from_levels(levels: Vec<SampledField<T>>) -> Result<Self> {
        let first = levels
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty pyramid".into()))?;
        let grid = *first.grid();
        if levels.iter().any(|l| *l.grid() != grid) {
            return Err(Error::GridMismatch("pyramid levels differ in grid".into()));
        }
        Ok(Pyramid { levels, kind: None })
    }

    pub fn levels(&self) -> &[SampledField<T>] {
        &self.levels
    }

    pub fn level(&self, j: usize) -> Option<&SampledField<T>> {
        self.levels.get(j)
    }

    pub fn grid(&self) -> &Grid {
        self.levels[0].grid()
    }

    pub fn j_max(&self) -> usize {
        self.levels.len() - 1
    }

    /// Kind of the family that produced the pyramid, if any.
    pub fn family_kind(&self) -> Option<FamilyKind> {
        self.kind
    }

    pub fn into_levels(self) -> Vec<SampledField<T>> {
        self.levels
    }
}

fn check_kernel<T: Real>(grid: &Grid, k: &Kernel<T>) -> Result<()> {
    if k.workspace().grid() != grid {
        return Err(Error::GridMismatch(
            "kernel workspace built for another grid".into(),
        ));
    }
    if let Some(r) = k.radius() {
        k.workspace().check_radius(r)?;
    }
    Ok(())
}

fn apply_spectrum<T: Real>(k: &Kernel<T>, fhat: &[Complex<T>]) -> Vec<T> {
    let ws = k.workspace();
    let spec = k.spectrum();
    let mut buf: Vec<Complex<T>> = fhat.iter().zip(spec.iter()).map(|(a, b)| *a * *b).collect();
    ws.inverse(&mut buf);
    ws.extract(&buf)
}

/// Linear convolution `h^n sum_y f(y) k(x - y)` by zero-padded FFT.
pub fn convolve<T: Real>(f: &SampledField<T>, k: &Kernel<T>) -> Result<SampledField<T>> {
    check_kernel(f.grid(), k)?;
    let ws = k.workspace();
    let mut fhat = ws.embed(f.values());
    ws.forward(&mut fhat);
    Ok(SampledField::from_parts(*f.grid(), apply_spectrum(k, &fhat)))
}

/// Convolves `f` with every kernel of the family.
pub fn convolve_pyramid<T: Real>(f: &SampledField<T>, fam: &LpFamily<T>) -> Result<Pyramid<T>> {
    for k in fam.kernels() {
        check_kernel(f.grid(), k)?;
    }
    let ws = fam.workspace();
    let mut fhat = ws.embed(f.values());
    ws.forward(&mut fhat);
    let levels = fam
        .kernels()
        .par_iter()
        .map(|k| SampledField::from_parts(*f.grid(), apply_spectrum(k, &fhat)))
        .collect();
    Ok(Pyramid {
        levels,
        kind: Some(fam.kind()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::LipschitzDomain;
    use crate::family::{make_base_kernel, scale_family};
    use crate::grid::make_grid;

    #[test]
    fn constants_and_zero() {
        let g = make_grid(1, 4.0, 8).unwrap();
        let d = LipschitzDomain::half_line(0.0).unwrap();
        let base = make_base_kernel(&d, 3, &g).unwrap();
        let fam = scale_family::<f64>(&base, &g, 3).unwrap();
        let zero = SampledField::<f64>::zeros(g);
        let p = convolve_pyramid(&zero, &fam).unwrap();
        assert!(p.levels().iter().all(|l| l.max_abs() == 0.0));
        let c = SampledField::<f64>::from_fn(g, |_| 2.5);
        let p0 = convolve(&c, &fam.kernels()[0]).unwrap();
        let p1 = convolve(&c, &fam.kernels()[1]).unwrap();
        // away from the box edge the kernel sees only the constant
        let i = g.origin_index() as usize;
        assert!((p0.values()[i] - 2.5).abs() < 1e-10);
        assert!(p1.values()[i].abs() < 1e-10);
    }

    #[test]
    fn grid_mismatch_rejected() {
        let g = make_grid(1, 4.0, 8).unwrap();
        let d = LipschitzDomain::half_line(0.0).unwrap();
        let base = make_base_kernel(&d, 1, &g).unwrap();
        let fam = scale_family::<f64>(&base, &g, 2).unwrap();
        let other = SampledField::<f64>::zeros(make_grid(1, 4.0, 9).unwrap());
        assert!(convolve(&other, &fam.kernels()[0]).is_err());
    }
}
