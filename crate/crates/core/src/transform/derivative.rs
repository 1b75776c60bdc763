use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::SampledField;
use crate::scalar::Real;

/// Spectral energy fraction above `0.8` Nyquist that raises the aliasing flag.
pub const ALIASING_LIMIT: f64 = 1e-8;

/// A spectral derivative together with its aliasing estimate.
#[derive(Clone, Debug)]
pub struct Derivative<T> {
    pub field: SampledField<T>,
    /// Fraction of spectral energy above `0.8` Nyquist.
    pub aliasing: f64,
    /// Whether `aliasing` exceeds [`ALIASING_LIMIT`].
    pub flagged: bool,
}

/// `d^alpha f` through the multiplier `(2 pi i xi)^alpha`, treating the box as
/// one period (the last sample on each axis repeats the first).
pub fn spectral_derivative<T: Real>(f: &SampledField<T>, alpha: &[usize]) -> Result<Derivative<T>> {
    let grid = *f.grid();
    let dim = grid.dim();
    if alpha.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: alpha.len(),
        });
    }
    let c = grid.count();
    let n = c - 1;
    let period = 2.0 * grid.half_extent();
    let len = n.pow(dim as u32);
    let mut buf: Vec<Complex<T>> = (0..len)
        .map(|i| {
            let src = if dim == 1 { i } else { (i / n) * c + i % n };
            Complex::new(f.values()[src], T::zero())
        })
        .collect();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    transform(&mut buf, n, dim, fwd.as_ref());
    let signed = |k: usize| if k < n / 2 { k as i64 } else { k as i64 - n as i64 };
    let cutoff = 0.8 * (n / 2) as f64;
    let (mut high, mut total) = (0.0, 0.0);
    for (i, z) in buf.iter_mut().enumerate() {
        let ks = if dim == 1 {
            [signed(i), 0]
        } else {
            [signed(i / n), signed(i % n)]
        };
        let e = z.norm_sqr().f64();
        total += e;
        if ks[..dim].iter().any(|k| k.unsigned_abs() as f64 > cutoff) {
            high += e;
        }
        let mut m = Complex::new(1.0f64, 0.0);
        for ax in 0..dim {
            if alpha[ax] == 0 {
                continue;
            }
            // the Nyquist mode has no odd derivative
            if ks[ax] == -((n / 2) as i64) && alpha[ax] % 2 == 1 {
                m = Complex::new(0.0, 0.0);
                break;
            }
            let w = Complex::new(0.0, 2.0 * std::f64::consts::PI * ks[ax] as f64 / period);
            m *= w.powu(alpha[ax] as u32);
        }
        *z = *z * Complex::new(T::lit(m.re), T::lit(m.im));
    }
    transform(&mut buf, n, dim, inv.as_ref());
    let norm = T::lit(1.0 / len as f64);
    let mut out = vec![T::zero(); grid.len()];
    for (i, v) in out.iter_mut().enumerate() {
        let [a, b] = grid.unravel(i);
        let src = if dim == 1 {
            a % n
        } else {
            (a % n) * n + b % n
        };
        *v = buf[src].re * norm;
    }
    let aliasing = if total > 0.0 { high / total } else { 0.0 };
    Ok(Derivative {
        field: SampledField::from_parts(grid, out),
        aliasing,
        flagged: aliasing > ALIASING_LIMIT,
    })
}

fn transform<T: Real>(buf: &mut [Complex<T>], n: usize, dim: usize, plan: &dyn rustfft::Fft<T>) {
    plan.process(buf);
    if dim == 2 {
        for a in 0..n {
            for b in a + 1..n {
                buf.swap(a * n + b, b * n + a);
            }
        }
        plan.process(buf);
        for a in 0..n {
            for b in a + 1..n {
                buf.swap(a * n + b, b * n + a);
            }
        }
    }
}
