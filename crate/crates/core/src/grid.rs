//! Uniform dyadic grids, sampled fields and dyadic cubes.
//!
//! A grid of level `R` over the box `[-A, A]^n` has spacing `h = 2^-R` and
//! `2A/h + 1` samples per axis. Sample `k` carries the quadrature cell
//! `[x_k, x_k + h)`, so the last sample on each axis (sitting on `x = A`) is
//! excluded from every integral.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default ceiling on the number of samples of a grid.
pub const DEFAULT_SAMPLE_BUDGET: usize = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    half_extent: f64,
    level: u32,
    count: usize,
}

/// Builds a grid under the default sample budget.
pub fn make_grid(dim: usize, half_extent: f64, level: u32) -> Result<Grid> {
    Grid::with_budget(dim, half_extent, level, DEFAULT_SAMPLE_BUDGET)
}

pub(crate) fn is_power_of_two(x: f64) -> bool {
    if !(x.is_finite() && x > 0.0) {
        return false;
    }
    let (m, _) = frexp(x);
    m == 0.5
}

fn frexp(x: f64) -> (f64, i32) {
    let e = x.abs().log2().floor() as i32 + 1;
    let m = x / 2f64.powi(e);
    if m.abs() >= 1.0 {
        (m / 2.0, e + 1)
    } else if m.abs() < 0.5 {
        (m * 2.0, e - 1)
    } else {
        (m, e)
    }
}

impl Grid {
    pub fn with_budget(dim: usize, half_extent: f64, level: u32, budget: usize) -> Result<Grid> {
        if dim != 1 && dim != 2 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if level < 4 || level > 40 {
            return Err(Error::InvalidGrid(format!("level {level} outside 4..=40")));
        }
        if !is_power_of_two(half_extent) {
            return Err(Error::InvalidGrid(format!(
                "half extent {half_extent} is not a power of two"
            )));
        }
        let cells = half_extent * 2f64.powi(level as i32 + 1);
        if cells > (1u64 << 40) as f64 {
            return Err(Error::GridTooLarge {
                samples: usize::MAX,
                budget,
            });
        }
        let count = cells as usize + 1;
        if count < 16 {
            return Err(Error::InvalidGrid(format!(
                "{count} points per axis, at least 16 required"
            )));
        }
        let samples = count.checked_pow(dim as u32).unwrap_or(usize::MAX);
        if samples > budget {
            return Err(Error::GridTooLarge { samples, budget });
        }
        Ok(Grid {
            dim,
            half_extent,
            level,
            count,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Samples per axis.
    pub fn count(&self) -> usize {
        self.count
    }

    /// Total number of samples.
    pub fn len(&self) -> usize {
        self.count.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2f64.powi(-(self.level as i32))
    }

    /// `h^n`, the quadrature weight of one sample.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Index of the sample at coordinate zero along an axis.
    pub fn origin_index(&self) -> i64 {
        ((self.count - 1) / 2) as i64
    }

    pub fn coord(&self, k: usize) -> f64 {
        (k as i64 - self.origin_index()) as f64 * self.spacing()
    }

    /// Grid with the same box and twice the resolution.
    pub fn refine(&self) -> Result<Grid> {
        make_grid(self.dim, self.half_extent, self.level + 1)
    }

    pub fn unravel(&self, flat: usize) -> [usize; 2] {
        if self.dim == 1 {
            [flat, 0]
        } else {
            [flat / self.count, flat % self.count]
        }
    }

    pub fn ravel(&self, idx: [usize; 2]) -> usize {
        if self.dim == 1 {
            idx[0]
        } else {
            idx[0] * self.count + idx[1]
        }
    }

    /// Integer coordinates in units of `h`, relative to the origin.
    pub fn lattice(&self, flat: usize) -> [i64; 2] {
        let [a, b] = self.unravel(flat);
        let o = self.origin_index();
        if self.dim == 1 {
            [a as i64 - o, 0]
        } else {
            [a as i64 - o, b as i64 - o]
        }
    }

    /// Coordinates of a sample; unused trailing entries are zero.
    pub fn point(&self, flat: usize) -> [f64; 2] {
        let [a, b] = self.lattice(flat);
        let h = self.spacing();
        [a as f64 * h, b as f64 * h]
    }

    /// Whether the sample's quadrature cell lies inside the box.
    pub fn is_quadrature(&self, flat: usize) -> bool {
        let [a, b] = self.unravel(flat);
        a + 1 < self.count && (self.dim == 1 || b + 1 < self.count)
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self == other
    }
}

/// Real values on every sample of a grid, row-major with `x_n` fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledField<T> {
    grid: Grid,
    values: Vec<T>,
}

impl<T: Real> SampledField<T> {
    pub fn new(grid: Grid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} samples",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite value at sample {i}"
            )));
        }
        Ok(SampledField { grid, values })
    }

    pub(crate) fn from_parts(grid: Grid, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        SampledField { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        SampledField {
            grid,
            values: vec![T::zero(); grid.len()],
        }
    }

    /// Samples `f` at every grid point; `f` receives `dim` coordinates.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|i| {
                let p = grid.point(i);
                T::lit(f(&p[..grid.dim()]))
            })
            .collect();
        SampledField { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |m, v| if v.abs() > m { v.abs() } else { m })
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        SampledField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, c: T) -> Self {
        self.map(|v| v * c)
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("fields live on different grids".into()));
        }
        Ok(SampledField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn cast<U: Real>(&self) -> SampledField<U> {
        SampledField {
            grid: self.grid,
            values: self.values.iter().map(|v| U::lit(v.f64())).collect(),
        }
    }
}

/// The cube `Q_{J,v} = 2^-J v + [0, 2^-J)^n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    pub level: i32,
    pub v: Vec<i64>,
}

impl DyadicCube {
    pub fn new(level: i32, v: Vec<i64>) -> Self {
        DyadicCube { level, v }
    }

    pub fn side(&self) -> f64 {
        2f64.powi(-self.level)
    }

    /// Half-open membership test on coordinates.
    pub fn contains(&self, x: &[f64]) -> bool {
        let s = self.side();
        self.v.iter().zip(x).all(|(&v, &xi)| {
            let lo = v as f64 * s;
            xi >= lo && xi < lo + s
        })
    }
}

/// Side of a level-`J` cube in samples, or an error below four cells.
pub(crate) fn cube_cells(grid: &Grid, level: i32) -> Result<i64> {
    let shift = grid.level() as i64 - level as i64;
    if shift < 2 {
        return Err(Error::InvalidCubeRange(format!(
            "cubes of level {level} span fewer than 4 cells at grid level {}",
            grid.level()
        )));
    }
    if shift > 62 {
        return Err(Error::InvalidCubeRange(format!("cube level {level} too coarse")));
    }
    Ok(1i64 << shift)
}

/// Coarsest cube level whose cubes have side at least the box side.
pub fn covering_level(grid: &Grid) -> i32 {
    -((2.0 * grid.half_extent()).log2().ceil() as i32)
}

/// Range of cube indices `v` along one axis meeting the box.
pub(crate) fn cube_index_span(grid: &Grid, cells: i64) -> (i64, i64) {
    let a = grid.origin_index();
    let lo = (-a).div_euclid(cells);
    let hi = (a + cells - 1).div_euclid(cells) - 1;
    (lo, hi)
}

/// Quadrature sample indices `[start, end)` along one axis inside cube index `v`.
pub(crate) fn cube_axis_range(grid: &Grid, cells: i64, v: i64) -> (usize, usize) {
    let o = grid.origin_index();
    let last = grid.count() as i64 - 1;
    let lo = (o + v * cells).clamp(0, last);
    let hi = (o + (v + 1) * cells).clamp(0, last);
    (lo as usize, hi as usize)
}

/// Lists every cube with `j_min <= J <= j_max_cube` meeting the grid box.
pub fn enumerate_cubes(grid: &Grid, j_min: i32, j_max_cube: i32) -> Result<Vec<DyadicCube>> {
    validate_cube_range(grid, j_min, j_max_cube)?;
    let mut out = Vec::new();
    for level in j_min..=j_max_cube {
        let cells = cube_cells(grid, level)?;
        let (lo, hi) = cube_index_span(grid, cells);
        if grid.dim() == 1 {
            out.extend((lo..=hi).map(|v| DyadicCube::new(level, vec![v])));
        } else {
            for a in lo..=hi {
                out.extend((lo..=hi).map(|b| DyadicCube::new(level, vec![a, b])));
            }
        }
    }
    Ok(out)
}

pub(crate) fn validate_cube_range(grid: &Grid, j_min: i32, j_max_cube: i32) -> Result<()> {
    if j_min > j_max_cube {
        return Err(Error::InvalidCubeRange(format!(
            "J_min {j_min} exceeds J_max {j_max_cube}"
        )));
    }
    cube_cells(grid, j_max_cube)?;
    Ok(())
}

/// Flat indices of quadrature samples inside `cube` where the mask holds.
pub fn restrict<T: Real>(
    field: &SampledField<T>,
    cube: &DyadicCube,
    mask: &crate::domain::Mask,
) -> Result<Vec<usize>> {
    let grid = field.grid();
    if mask.grid() != grid {
        return Err(Error::GridMismatch("mask and field grids differ".into()));
    }
    if cube.v.len() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            found: cube.v.len(),
        });
    }
    let cells = cube_cells(grid, cube.level)?;
    let (a0, a1) = cube_axis_range(grid, cells, cube.v[0]);
    let mut out = Vec::new();
    if grid.dim() == 1 {
        out.extend((a0..a1).filter(|&i| mask.contains(i)));
    } else {
        let (b0, b1) = cube_axis_range(grid, cells, cube.v[1]);
        for a in a0..a1 {
            for b in b0..b1 {
                let i = grid.ravel([a, b]);
                if mask.contains(i) {
                    out.push(i);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_counts() {
        let g = make_grid(1, 4.0, 6).unwrap();
        assert_eq!(g.count(), 513);
        assert_eq!(g.spacing(), 1.0 / 64.0);
        let g = make_grid(2, 2.0, 5).unwrap();
        assert_eq!(g.count(), 129);
        assert_eq!(g.len(), 129 * 129);
        assert!(matches!(
            make_grid(3, 2.0, 5),
            Err(Error::UnsupportedDimension(3))
        ));
    }

    #[test]
    fn grid_rejections() {
        assert!(make_grid(1, 3.0, 6).is_err());
        assert!(make_grid(1, 4.0, 3).is_err());
        assert!(make_grid(1, 0.25, 4).is_err());
        assert!(matches!(
            Grid::with_budget(2, 4.0, 10, 1 << 20),
            Err(Error::GridTooLarge { .. })
        ));
    }

    #[test]
    fn coordinates_are_exact() {
        let g = make_grid(1, 4.0, 6).unwrap();
        assert_eq!(g.coord(0), -4.0);
        assert_eq!(g.coord(g.count() - 1), 4.0);
        assert_eq!(g.coord(256), 0.0);
        assert_eq!(g.coord(257), 1.0 / 64.0);
    }

    #[test]
    fn cube_counts() {
        let g = make_grid(1, 4.0, 6).unwrap();
        let c = enumerate_cubes(&g, -3, -3).unwrap();
        let vs: Vec<_> = c.iter().map(|q| q.v[0]).collect();
        assert_eq!(vs, vec![-1, 0]);
        let c = enumerate_cubes(&g, -3, 0).unwrap();
        assert_eq!(c.iter().filter(|q| q.level == 0).count(), 8);
        assert!(enumerate_cubes(&g, -3, 5).is_err());
        assert!(enumerate_cubes(&g, -3, 4).is_ok());
        assert!(enumerate_cubes(&g, 0, -1).is_err());
        assert_eq!(covering_level(&g), -3);
    }

    #[test]
    fn cube_membership_half_open() {
        let q = DyadicCube::new(0, vec![0]);
        assert!(q.contains(&[0.0]));
        assert!(!q.contains(&[1.0]));
    }
}
