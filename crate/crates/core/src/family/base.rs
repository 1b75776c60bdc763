//! The generating kernel `phi_0`: a moment-corrected combination of
//! tensor-product B-splines placed inside the cone.
//!
//! The splines have order `M + 2` and dyadic knot spacing `H0`. When `H0/h`
//! is an integer the sampled kernel inherits the exact continuous moments, so
//! every level `j` with `2^j h <= H0` has exact discrete moments too.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::spline::{affine_moments, bspline, bspline_moments};
use crate::domain::LipschitzDomain;
use crate::error::{Error, Result};
use crate::grid::{is_power_of_two, Grid};

/// Largest admissible condition number of the scaled moment system.
pub const CONDITION_LIMIT: f64 = 1e10;

/// Minimum number of cells spanned by the support along each axis.
pub const MIN_SUPPORT_CELLS: f64 = 32.0;

/// Default depth of the support below the origin.
pub const DEFAULT_DEPTH: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseKernel {
    dim: usize,
    moment_order: usize,
    aperture: f64,
    order: usize,
    knot: f64,
    centers: Vec<[f64; 2]>,
    coeffs: Vec<f64>,
    condition: f64,
    lo: [f64; 2],
    hi: [f64; 2],
}

/// Builds `phi_0` for the cone of `domain` with `M` vanishing moments.
pub fn make_base_kernel(domain: &LipschitzDomain, moment_order: usize, grid: &Grid) -> Result<BaseKernel> {
    make_base_kernel_with_depth(domain, moment_order, grid, DEFAULT_DEPTH)
}

pub fn make_base_kernel_with_depth(
    domain: &LipschitzDomain,
    moment_order: usize,
    grid: &Grid,
    depth: f64,
) -> Result<BaseKernel> {
    if domain.dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            found: domain.dim(),
        });
    }
    if !(depth.is_finite() && depth > 0.0) {
        return Err(Error::InvalidParameter(format!("depth {depth}")));
    }
    if moment_order > 14 {
        return Err(Error::InvalidParameter(format!(
            "moment order {moment_order} above 14"
        )));
    }
    let base = BaseKernel::design(grid.dim(), moment_order, domain.lip_const(), depth)?;
    let h = grid.spacing();
    for ax in 0..grid.dim() {
        let cells = (base.hi[ax] - base.lo[ax]) / h;
        if cells < MIN_SUPPORT_CELLS {
            return Err(Error::InfeasibleSupport(format!(
                "support spans {cells} cells along axis {ax}, at least {MIN_SUPPORT_CELLS} needed"
            )));
        }
    }
    Ok(base)
}

fn neumaier_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Centers of all order-`r` splines with knots on the `knot` lattice whose
/// support box lies in the closed cone `x_n <= -L |x'|` above depth `-depth`.
fn spline_centers(dim: usize, r: usize, knot: f64, lip: f64, depth: f64) -> Vec<[f64; 2]> {
    let half = r as f64 / 2.0;
    let rows = (depth / knot).floor() as i64;
    let mut out = Vec::new();
    if dim == 1 {
        for t in 0..=rows - r as i64 {
            out.push([-(half + t as f64) * knot, 0.0]);
        }
        return out;
    }
    // knots sit on integer multiples of the spacing, so odd orders use half-integer centers
    let shift = if r % 2 == 1 { 0.5 } else { 0.0 };
    for t in 0..=rows - r as i64 {
        let b = -(half + t as f64) * knot;
        let reach = (-(b + half * knot) / lip.max(f64::MIN_POSITIVE)) / knot - half;
        let w = if lip == 0.0 { rows as f64 } else { reach };
        if w < 0.0 {
            continue;
        }
        let kmax = (w - shift).floor() as i64;
        for k in -kmax - if shift > 0.0 { 1 } else { 0 }..=kmax {
            let a = (k as f64 + shift) * knot;
            if a.abs() / knot <= w + 1e-12 {
                out.push([a, b]);
            }
        }
    }
    out
}

fn largest_dyadic_at_most(x: f64) -> f64 {
    let mut p = 2f64.powi(x.log2().floor() as i32);
    while p > x {
        p /= 2.0;
    }
    while p * 2.0 <= x {
        p *= 2.0;
    }
    p
}

fn multi_indices(dim: usize, max: usize) -> Vec<[usize; 2]> {
    let mut out = Vec::new();
    for total in 0..=max {
        if dim == 1 {
            out.push([total, 0]);
        } else {
            for a in (0..=total).rev() {
                out.push([a, total - a]);
            }
        }
    }
    out
}

impl BaseKernel {
    fn design(dim: usize, m: usize, lip: f64, depth: f64) -> Result<BaseKernel> {
        let r = (m + 1).max(2);
        let half = r as f64 / 2.0;
        let constraints = if dim == 1 { m + 1 } else { (m + 1) * (m + 2) / 2 };
        let mut knot = if dim == 1 {
            largest_dyadic_at_most(depth / (2 * m + 2) as f64)
        } else {
            largest_dyadic_at_most(depth / ((2 * m + 2) as f64 * (1.0 + lip)))
        };
        let mut centers = spline_centers(dim, r, knot, lip, depth);
        while centers.len() < constraints + 1 {
            knot /= 2.0;
            centers = spline_centers(dim, r, knot, lip, depth);
        }
        let mut lo = [0.0f64; 2];
        let mut hi = [0.0f64; 2];
        for ax in 0..dim {
            lo[ax] = centers.iter().map(|c| c[ax]).fold(f64::INFINITY, f64::min) - half * knot;
            hi[ax] = centers.iter().map(|c| c[ax]).fold(f64::NEG_INFINITY, f64::max) + half * knot;
        }
        debug_assert!(is_power_of_two(knot));
        let mut kernel = BaseKernel {
            dim,
            moment_order: m,
            aperture: lip,
            order: r,
            knot,
            centers,
            coeffs: Vec::new(),
            condition: 0.0,
            lo,
            hi,
        };
        kernel.solve_moments()?;
        Ok(kernel)
    }

    fn solve_moments(&mut self) -> Result<()> {
        let m = self.moment_order;
        let idx = multi_indices(self.dim, m);
        let base = bspline_moments(self.order, m);
        let mut center = [0.0; 2];
        let mut scale = [1.0; 2];
        for ax in 0..self.dim {
            center[ax] = 0.5 * (self.lo[ax] + self.hi[ax]);
            scale[ax] = 0.5 * (self.hi[ax] - self.lo[ax]);
        }
        let k = self.centers.len();
        let mut a = DMatrix::<f64>::zeros(idx.len(), k);
        for (col, c) in self.centers.iter().enumerate() {
            let per_axis: Vec<Vec<f64>> = (0..self.dim)
                .map(|ax| {
                    affine_moments(
                        &base,
                        (c[ax] - center[ax]) / scale[ax],
                        self.knot / scale[ax],
                        m,
                    )
                })
                .collect();
            for (row, alpha) in idx.iter().enumerate() {
                let mut v = per_axis[0][alpha[0]];
                if self.dim == 2 {
                    v *= per_axis[1][alpha[1]];
                }
                a[(row, col)] = v;
            }
        }
        // moments about the origin are (1, 0, 0, ...); in u = (x - c) / s they become (-c/s)^alpha
        let mut rhs = DVector::<f64>::zeros(idx.len());
        for (row, alpha) in idx.iter().enumerate() {
            let mut v = 1.0;
            for ax in 0..self.dim {
                v *= (-center[ax] / scale[ax]).powi(alpha[ax] as i32);
            }
            rhs[row] = v;
        }
        let svd = a.svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if !(condition <= CONDITION_LIMIT) {
            return Err(Error::IllConditioned {
                condition,
                limit: CONDITION_LIMIT,
            });
        }
        let sol = svd
            .solve(&rhs, smax * 1e-14)
            .map_err(|e| Error::InvalidFamily(e.to_string()))?;
        // each spline has unit mass, so the mass is the coefficient sum
        let mut coeffs: Vec<f64> = sol.iter().copied().collect();
        let mass = neumaier_sum(&coeffs);
        for c in &mut coeffs {
            *c /= mass;
        }
        self.coeffs = coeffs;
        self.condition = condition;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn moment_order(&self) -> usize {
        self.moment_order
    }

    /// Cone aperture `L` the kernel was designed for.
    pub fn aperture(&self) -> f64 {
        self.aperture
    }

    pub fn spline_order(&self) -> usize {
        self.order
    }

    /// Knot spacing `H0`.
    pub fn knot(&self) -> f64 {
        self.knot
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn centers(&self) -> &[[f64; 2]] {
        &self.centers
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Closed bounding box of `supp phi_0`.
    pub fn support(&self) -> ([f64; 2], [f64; 2]) {
        (self.lo, self.hi)
    }

    /// Closed bounding box of `supp phi_j`.
    pub fn level_support(&self, j: usize) -> ([f64; 2], [f64; 2]) {
        if j == 0 {
            return (self.lo, self.hi);
        }
        let mut lo = [0.0; 2];
        let mut hi = [0.0; 2];
        let s = 2f64.powi(-(j as i32 - 1));
        for ax in 0..self.dim {
            lo[ax] = self.lo[ax].min(self.lo[ax] / 2.0) * s;
            hi[ax] = self.hi[ax].max(self.hi[ax] / 2.0) * s;
        }
        (lo, hi)
    }

    /// Largest level with exact discrete moments on `grid`.
    pub fn exact_level(&self, grid: &Grid) -> i64 {
        (self.knot / grid.spacing()).log2().floor() as i64
    }

    /// `phi_0(x)`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let half = self.order as f64 / 2.0;
        let inv = 1.0 / self.knot;
        let mut acc = 0.0;
        for (c, w) in self.centers.iter().zip(&self.coeffs) {
            let u = (x[0] - c[0]) * inv;
            if u.abs() >= half {
                continue;
            }
            let mut v = bspline(self.order, u) * inv;
            if self.dim == 2 {
                let t = (x[1] - c[1]) * inv;
                if t.abs() >= half {
                    continue;
                }
                v *= bspline(self.order, t) * inv;
            }
            acc += w * v;
        }
        acc
    }

    /// `2^{Jn} phi_0(2^J x)`.
    pub fn eval_partial(&self, level: usize, x: &[f64]) -> f64 {
        let s = 2f64.powi(level as i32);
        let y = [x[0] * s, if self.dim == 2 { x[1] * s } else { 0.0 }];
        s.powi(self.dim as i32) * self.eval(&y[..self.dim])
    }

    /// `phi_j(x)`, with `phi_1 = 2^n phi_0(2x) - phi_0(x)` and
    /// `phi_j = 2^{(j-1)n} phi_1(2^{j-1} x)`.
    pub fn eval_level(&self, j: usize, x: &[f64]) -> f64 {
        match j {
            0 => self.eval(x),
            1 => {
                let n = self.dim as i32;
                let y = [2.0 * x[0], if self.dim == 2 { 2.0 * x[1] } else { 0.0 }];
                2f64.powi(n) * self.eval(&y[..self.dim]) - self.eval(x)
            }
            _ => {
                let s = 2f64.powi(j as i32 - 1);
                let y = [x[0] * s, if self.dim == 2 { x[1] * s } else { 0.0 }];
                s.powi(self.dim as i32) * self.eval_level(1, &y[..self.dim])
            }
        }
    }
}
