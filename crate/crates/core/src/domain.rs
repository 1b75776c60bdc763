//! Special Lipschitz domains `{x_n > rho(x')}` with piecewise-linear `rho`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledField};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
enum Profile {
    Threshold(f64),
    Linear {
        breakpoints: Vec<f64>,
        slopes: Vec<f64>,
        offset: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LipschitzDomain {
    profile: Profile,
    lip: f64,
}

/// On-disk form of a domain.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DomainFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breakpoints: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slopes: Option<Vec<f64>>,
    /// Value of `rho` at the origin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
}

impl LipschitzDomain {
    /// The half-line `(a, inf)`.
    pub fn half_line(threshold: f64) -> Result<Self> {
        if !threshold.is_finite() {
            return Err(Error::InvalidDomain("threshold must be finite".into()));
        }
        Ok(LipschitzDomain {
            profile: Profile::Threshold(threshold),
            lip: 0.0,
        })
    }

    /// The planar domain above the continuous piecewise-linear graph with
    /// slope `slopes[i]` between consecutive breakpoints and `rho(0) = offset`.
    pub fn graph(breakpoints: Vec<f64>, slopes: Vec<f64>, offset: f64) -> Result<Self> {
        if slopes.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidDomain(format!(
                "{} breakpoints need {} slopes, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                slopes.len()
            )));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidDomain("breakpoints must increase".into()));
        }
        if breakpoints
            .iter()
            .chain(&slopes)
            .chain(std::iter::once(&offset))
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidDomain("non-finite profile data".into()));
        }
        let lip = slopes.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        Ok(LipschitzDomain {
            profile: Profile::Linear {
                breakpoints,
                slopes,
                offset,
            },
            lip,
        })
    }

    pub fn from_file(file: &DomainFile) -> Result<Self> {
        let dim = file.dim.unwrap_or(if file.threshold.is_some() { 1 } else { 2 });
        match dim {
            1 => {
                let a = file
                    .threshold
                    .ok_or_else(|| Error::InvalidDomain("missing threshold".into()))?;
                Self::half_line(a)
            }
            2 => {
                let slopes = file
                    .slopes
                    .clone()
                    .ok_or_else(|| Error::InvalidDomain("missing slopes".into()))?;
                Self::graph(
                    file.breakpoints.clone().unwrap_or_default(),
                    slopes,
                    file.offset.unwrap_or(0.0),
                )
            }
            d => Err(Error::UnsupportedDimension(d)),
        }
    }

    pub fn to_file(&self) -> DomainFile {
        match &self.profile {
            Profile::Threshold(a) => DomainFile {
                dim: Some(1),
                threshold: Some(*a),
                ..Default::default()
            },
            Profile::Linear {
                breakpoints,
                slopes,
                offset,
            } => DomainFile {
                dim: Some(2),
                breakpoints: Some(breakpoints.clone()),
                slopes: Some(slopes.clone()),
                offset: Some(*offset),
                ..Default::default()
            },
        }
    }

    pub fn dim(&self) -> usize {
        match self.profile {
            Profile::Threshold(_) => 1,
            Profile::Linear { .. } => 2,
        }
    }

    /// `L_rho`, the largest absolute slope.
    pub fn lip_const(&self) -> f64 {
        self.lip
    }

    /// Lipschitz constant of the fold map, `(L + sqrt(1 + L^2))^2`.
    pub fn fold_const(&self) -> f64 {
        let l = self.lip;
        (l + (1.0 + l * l).sqrt()).powi(2)
    }

    /// The boundary profile; for the half-line this is the threshold.
    pub fn rho(&self, xp: f64) -> f64 {
        match &self.profile {
            Profile::Threshold(a) => *a,
            Profile::Linear {
                breakpoints,
                slopes,
                offset,
            } => {
                let (lo, hi) = if xp >= 0.0 { (0.0, xp) } else { (xp, 0.0) };
                let mut acc = 0.0;
                for (i, s) in slopes.iter().enumerate() {
                    let l = if i == 0 { f64::NEG_INFINITY } else { breakpoints[i - 1] };
                    let r = breakpoints.get(i).copied().unwrap_or(f64::INFINITY);
                    let len = hi.min(r) - lo.max(l);
                    if len > 0.0 {
                        acc += s * len;
                    }
                }
                if xp >= 0.0 {
                    offset + acc
                } else {
                    offset - acc
                }
            }
        }
    }

    /// Strict membership `x_n > rho(x')`.
    pub fn contains(&self, x: &[f64]) -> bool {
        match self.dim() {
            1 => x[0] > self.rho(0.0),
            _ => x[1] > self.rho(x[0]),
        }
    }

    /// Membership in the open cone `{y_n < -L |y'|}`.
    pub fn in_cone(&self, y: &[f64]) -> bool {
        match self.dim() {
            1 => y[0] < 0.0,
            _ => y[1] < -self.lip * y[0].abs(),
        }
    }

    /// Identity on the domain, reflection through the graph elsewhere.
    pub fn fold_point(&self, x: &[f64]) -> [f64; 2] {
        if self.contains(x) {
            return [x[0], x.get(1).copied().unwrap_or(0.0)];
        }
        match self.dim() {
            1 => [2.0 * self.rho(0.0) - x[0], 0.0],
            _ => [x[0], 2.0 * self.rho(x[0]) - x[1]],
        }
    }

    /// Indicator of the domain on the grid.
    pub fn mask(&self, grid: &Grid) -> Result<Mask> {
        domain_mask(self, grid)
    }
}

pub fn domain_mask(domain: &LipschitzDomain, grid: &Grid) -> Result<Mask> {
    if domain.dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            found: domain.dim(),
        });
    }
    let inside = (0..grid.len())
        .map(|i| domain.contains(&grid.point(i)[..grid.dim()]))
        .collect();
    Ok(Mask {
        grid: *grid,
        inside,
    })
}

pub fn fold_point(domain: &LipschitzDomain, x: &[f64]) -> [f64; 2] {
    domain.fold_point(x)
}

/// Boolean indicator on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Mask {
    grid: Grid,
    inside: Vec<bool>,
}

impl Mask {
    pub fn full(grid: &Grid) -> Mask {
        Mask {
            grid: *grid,
            inside: vec![true; grid.len()],
        }
    }

    pub fn from_bools(grid: &Grid, inside: Vec<bool>) -> Result<Mask> {
        if inside.len() != grid.len() {
            return Err(Error::GridMismatch("mask length differs from grid".into()));
        }
        Ok(Mask {
            grid: *grid,
            inside,
        })
    }

    /// Reads a field of zeros and ones as a mask.
    pub fn from_field<T: Real>(field: &SampledField<T>) -> Result<Mask> {
        let mut inside = Vec::with_capacity(field.values().len());
        for (i, v) in field.values().iter().enumerate() {
            if *v == T::one() {
                inside.push(true);
            } else if *v == T::zero() {
                inside.push(false);
            } else {
                return Err(Error::InvalidParameter(format!(
                    "mask sample {i} is neither 0 nor 1"
                )));
            }
        }
        Self::from_bools(field.grid(), inside)
    }

    pub fn to_field<T: Real>(&self) -> SampledField<T> {
        SampledField::from_parts(
            self.grid,
            self.inside
                .iter()
                .map(|&b| if b { T::one() } else { T::zero() })
                .collect(),
        )
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn contains(&self, i: usize) -> bool {
        self.inside[i]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.inside
    }

    pub fn count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    /// Multiplies a field by the indicator.
    pub fn apply<T: Real>(&self, field: &SampledField<T>) -> Result<SampledField<T>> {
        if field.grid() != &self.grid {
            return Err(Error::GridMismatch("mask and field grids differ".into()));
        }
        Ok(SampledField::from_parts(
            self.grid,
            field
                .values()
                .iter()
                .zip(&self.inside)
                .map(|(&v, &b)| if b { v } else { T::zero() })
                .collect(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn half_line_mask() {
        let g = make_grid(1, 4.0, 6).unwrap();
        let d = LipschitzDomain::half_line(0.0).unwrap();
        let m = d.mask(&g).unwrap();
        for i in 0..g.len() {
            assert_eq!(m.contains(i), g.coord(i) > 0.0);
        }
    }

    #[test]
    fn abs_profile() {
        let d = LipschitzDomain::graph(vec![0.0], vec![-1.0, 1.0], 0.0).unwrap();
        assert_eq!(d.lip_const(), 1.0);
        assert!(d.contains(&[0.5, 1.0]));
        assert!(!d.contains(&[1.0, 0.5]));
        assert_eq!(d.rho(-0.75), 0.75);
        assert_eq!(d.rho(2.0), 2.0);
    }

    #[test]
    fn piecewise_profile_values() {
        let d = LipschitzDomain::graph(vec![-1.0, 0.5], vec![2.0, 0.0, -0.5], 0.25).unwrap();
        assert_eq!(d.rho(0.0), 0.25);
        assert_eq!(d.rho(0.5), 0.25);
        assert_eq!(d.rho(1.5), -0.25);
        assert_eq!(d.rho(-1.0), 0.25);
        assert_eq!(d.rho(-2.0), -1.75);
    }

    #[test]
    fn fold_reflects() {
        let d = LipschitzDomain::graph(vec![], vec![0.0], 0.0).unwrap();
        assert_eq!(d.fold_point(&[1.0, -2.0]), [1.0, 2.0]);
        assert_eq!(d.fold_point(&[1.0, 2.0]), [1.0, 2.0]);
        let d1 = LipschitzDomain::half_line(0.5).unwrap();
        assert_eq!(d1.fold_point(&[-1.0]), [2.0, 0.0]);
    }

    #[test]
    fn rejects_bad_profiles() {
        assert!(LipschitzDomain::graph(vec![0.0], vec![1.0], 0.0).is_err());
        assert!(LipschitzDomain::graph(vec![1.0, 0.0], vec![1.0, 1.0, 1.0], 0.0).is_err());
        let g = make_grid(2, 2.0, 5).unwrap();
        assert!(LipschitzDomain::half_line(0.0).unwrap().mask(&g).is_err());
    }
}
