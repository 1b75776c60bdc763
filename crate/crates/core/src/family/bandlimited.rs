use std::sync::{Arc, OnceLock};

use num_complex::Complex;
use rustfft::FftPlanner;

use super::{FamilyKind, Kernel, LpFamily};
use crate::error::{Error, Result};
use crate::fft::Workspace;
use crate::grid::Grid;
use crate::scalar::Real;

/// Bound on the discarded spatial mass of `lambda_0`.
pub const TAIL_TOLERANCE: f64 = 1e-10;

/// Sharpness of the transition in `lambda_0`'s symbol.
const STEP_SHARPNESS: f64 = 2.0;

/// Smooth step from 0 at `t <= 0` to 1 at `t >= 1`.
fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let c = STEP_SHARPNESS;
        1.0 / (1.0 + (c / t - c / (1.0 - t)).exp())
    }
}

/// Radial symbol of `lambda_0`: one on `|xi| <= 1`, zero on `|xi| >= 2`.
pub fn lambda_hat(xi: f64) -> f64 {
    1.0 - smooth_step(xi.abs() - 1.0)
}

fn level_symbol(level: usize, r: f64) -> f64 {
    if level == 0 {
        lambda_hat(r)
    } else {
        let s = 2f64.powi(-(level as i32));
        lambda_hat(r * s) - lambda_hat(r * 2.0 * s)
    }
}

pub(crate) fn radial_spectrum<T: Real>(ws: &Workspace<T>, level: usize) -> Vec<Complex<T>> {
    (0..ws.len())
        .map(|i| {
            let xi = ws.frequency_of(i);
            let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
            Complex::new(T::lit(level_symbol(level, r)), T::zero())
        })
        .collect()
}

/// Radius beyond which `int |lambda_0|` is below the tail tolerance, and the
/// measured tail at that radius.
pub fn lambda_tail_radius(dim: usize) -> (f64, f64) {
    static CACHE: [OnceLock<(f64, f64)>; 2] = [OnceLock::new(), OnceLock::new()];
    *CACHE[dim - 1].get_or_init(|| measure_tail(dim))
}

fn measure_tail(dim: usize) -> (f64, f64) {
    let step = 0.125;
    let n: usize = if dim == 1 { 4096 } else { 1024 };
    let period = n as f64 * step;
    let freq = |k: usize| {
        let s = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
        s / period
    };
    let len = n.pow(dim as u32);
    let mut buf: Vec<Complex<f64>> = (0..len)
        .map(|i| {
            let r = if dim == 1 {
                freq(i).abs()
            } else {
                freq(i / n).hypot(freq(i % n))
            };
            Complex::new(lambda_hat(r), 0.0)
        })
        .collect();
    let fft = FftPlanner::new().plan_fft_inverse(n);
    if dim == 1 {
        fft.process(&mut buf);
    } else {
        fft.process(&mut buf);
        for a in 0..n {
            for b in a + 1..n {
                buf.swap(a * n + b, b * n + a);
            }
        }
        fft.process(&mut buf);
    }
    let norm = period.powi(-(dim as i32));
    let cell = step.powi(dim as i32);
    let mut shells: Vec<(f64, f64)> = (0..len)
        .map(|i| {
            let off = |k: usize| if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
            let d = if dim == 1 {
                off(i).abs()
            } else {
                off(i / n).hypot(off(i % n))
            } * step;
            (d, buf[i].norm() * norm * cell)
        })
        .collect();
    shells.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut tail = 0.0;
    let mut radius = 0.0;
    for (d, m) in shells {
        if tail + m >= TAIL_TOLERANCE {
            radius = d;
            break;
        }
        tail += m;
    }
    ((radius / step).ceil() * step, tail)
}

/// Reference family with `lambda_j(xi) = lambda_0(2^-j xi) - lambda_0(2^{1-j} xi)`.
pub fn bandlimited_family<T: Real>(j_max: usize, grid: &Grid) -> Result<LpFamily<T>> {
    let nyquist = 0.5 / grid.spacing();
    let top = 2f64.powi(j_max as i32 + 1);
    if !(nyquist > top) {
        return Err(Error::Resolution(format!(
            "Nyquist frequency {nyquist} does not exceed 2^(J_max+1) = {top}"
        )));
    }
    let (radius, tail) = lambda_tail_radius(grid.dim());
    let margin = (radius / grid.spacing()).ceil() as usize + 1;
    let ws: Arc<Workspace<T>> = Workspace::with_margin(grid, margin);
    let kernels = (0..=j_max)
        .map(|j| Kernel::radial(ws.clone(), j, radius, tail))
        .collect();
    Ok(LpFamily::assemble(
        FamilyKind::Bandlimited,
        0,
        0.0,
        kernels,
        ws,
        None,
        None,
    ))
}
