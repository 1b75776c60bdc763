//! Mixed sequence norms over dyadic cubes and the space norms built on them.
//!
//! For a stack `(g_j)` and the cube range `J_min..=J_max_cube`:
//!
//! * `B`: `sup_Q 2^{nJ tau} (sum_{j >= max(0,J)} 2^{jsq} |g_j|_{L^p(Q)}^q)^{1/q}`
//! * `F`: `sup_Q 2^{nJ tau} | (sum_{j >= max(0,J)} |2^{js} g_j|^q)^{1/q} |_{L^p(Q)}`
//! * `N`: `(sum_j sup_Q 2^{(js + nJ tau) q} |g_j|_{L^p(Q)}^q)^{1/q}`
//!
//! where `Q` stands for `Q ∩ Ω` and integrals are `h^n` times sums over the
//! quadrature samples.

mod reduce;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::domain::Mask;
use crate::error::{Error, Result};
use crate::family::{FamilyKind, LpFamily};
use crate::grid::{
    covering_level, cube_axis_range, cube_cells, cube_index_span, validate_cube_range, DyadicCube,
    Grid, SampledField,
};
use crate::scalar::Real;
use crate::transform::{convolve_pyramid, peetre_field, Pyramid};

pub use reduce::pairwise_sum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormKind {
    B,
    F,
    N,
}

impl std::fmt::Display for NormKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            NormKind::B => "B",
            NormKind::F => "F",
            NormKind::N => "N",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for NormKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "B" | "b" => Ok(NormKind::B),
            "F" | "f" => Ok(NormKind::F),
            "N" | "n" => Ok(NormKind::N),
            _ => Err(Error::InvalidSpec(format!("unknown kind {s:?}"))),
        }
    }
}

/// Serializes `inf` as the string `"inf"`, since JSON has no infinity.
mod exponent {
    use super::*;

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) if t == "inf" || t == "infinity" => Ok(f64::INFINITY),
            Repr::Text(t) => t
                .parse()
                .map_err(|_| serde::de::Error::custom(format!("bad exponent {t:?}"))),
        }
    }
}

/// Kind and indices `(p, q, s, tau)` of a space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub kind: NormKind,
    #[serde(with = "exponent")]
    pub p: f64,
    #[serde(with = "exponent")]
    pub q: f64,
    pub s: f64,
    pub tau: f64,
}

impl SpaceSpec {
    pub fn new(kind: NormKind, p: f64, q: f64, s: f64, tau: f64) -> Result<Self> {
        let spec = SpaceSpec { kind, p, q, s, tau };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0) || self.p.is_nan() {
            return Err(Error::InvalidSpec(format!("p = {} must be positive", self.p)));
        }
        if !(self.q > 0.0) || self.q.is_nan() {
            return Err(Error::InvalidSpec(format!("q = {} must be positive", self.q)));
        }
        if !self.s.is_finite() {
            return Err(Error::InvalidSpec("s must be finite".into()));
        }
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidSpec(format!("tau = {} must be nonnegative", self.tau)));
        }
        if self.kind == NormKind::F && self.p.is_infinite() {
            return Err(Error::InvalidSpec("F requires p < inf".into()));
        }
        Ok(())
    }

    /// The same spec with smoothness `s`.
    pub fn with_s(&self, s: f64) -> Self {
        SpaceSpec { s, ..*self }
    }

    /// `min(1, p, q)`, the exponent of the quasi-triangle inequality.
    pub fn r(&self) -> f64 {
        1f64.min(self.p).min(self.q)
    }

    pub fn label(&self) -> String {
        let e = |v: f64| if v.is_infinite() { "inf".to_string() } else { format!("{v}") };
        format!("{}({},{},{},{})", self.kind, e(self.p), e(self.q), self.s, self.tau)
    }
}

/// Value of a sequence norm with diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    /// Maximizing cube; for `N`, the maximizing cube of the largest level.
    pub witness: Option<DyadicCube>,
    /// Contribution of each level `j` (at the witness for `B` and `F`,
    /// the sup over cubes for `N`).
    pub per_level: Vec<f64>,
    /// Contribution of the last level, a proxy for the truncated tail.
    pub tail_estimate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// `(J_min, J_max_cube)` from the covering level down to cubes of four cells.
pub fn default_cube_range(grid: &Grid) -> (i32, i32) {
    (covering_level(grid), grid.level() as i32 - 2)
}

struct Cubes {
    level: i32,
    list: Vec<DyadicCube>,
    /// Flat quadrature sample indices per cube.
    members: Vec<Vec<usize>>,
}

fn cubes_at(grid: &Grid, mask: &Mask, level: i32) -> Result<Cubes> {
    let cells = cube_cells(grid, level)?;
    let (lo, hi) = cube_index_span(grid, cells);
    let mut list = Vec::new();
    if grid.dim() == 1 {
        list.extend((lo..=hi).map(|v| DyadicCube::new(level, vec![v])));
    } else {
        for a in lo..=hi {
            list.extend((lo..=hi).map(|b| DyadicCube::new(level, vec![a, b])));
        }
    }
    let members = list
        .iter()
        .map(|q| {
            let (a0, a1) = cube_axis_range(grid, cells, q.v[0]);
            let mut out = Vec::new();
            if grid.dim() == 1 {
                out.extend((a0..a1).filter(|&i| mask.contains(i)));
            } else {
                let (b0, b1) = cube_axis_range(grid, cells, q.v[1]);
                for a in a0..a1 {
                    for b in b0..b1 {
                        let i = grid.ravel([a, b]);
                        if mask.contains(i) {
                            out.push(i);
                        }
                    }
                }
            }
            out
        })
        .collect();
    Ok(Cubes {
        level,
        list,
        members,
    })
}

/// `|g|_{L^p}` over the listed samples; `vals` already holds `|g|`.
fn lp_norm(vals: &[f64], idx: &[usize], p: f64, vol: f64) -> f64 {
    if idx.is_empty() {
        return 0.0;
    }
    if p.is_infinite() {
        return idx.iter().fold(0.0f64, |m, &i| m.max(vals[i]));
    }
    let terms: Vec<f64> = idx.iter().map(|&i| vals[i].powf(p)).collect();
    (vol * pairwise_sum(&terms)).powf(1.0 / p)
}

fn lq_combine(terms: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        terms.iter().fold(0.0f64, |m, &t| m.max(t))
    } else {
        let pw: Vec<f64> = terms.iter().map(|t| t.powf(q)).collect();
        pairwise_sum(&pw).powf(1.0 / q)
    }
}

fn check_inputs<T: Real>(levels: &[SampledField<T>], mask: &Mask, spec: &SpaceSpec) -> Result<Grid> {
    spec.validate()?;
    let first = levels
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty level stack".into()))?;
    let grid = *first.grid();
    if levels.iter().any(|l| *l.grid() != grid) || *mask.grid() != grid {
        return Err(Error::GridMismatch("levels and mask must share one grid".into()));
    }
    Ok(grid)
}

/// Sequence norm of `(2^{js} g_j)_j` restricted to the mask.
pub fn seq_norm_levels<T: Real>(
    levels: &[SampledField<T>],
    mask: &Mask,
    spec: &SpaceSpec,
    cube_range: (i32, i32),
) -> Result<NormResult> {
    let grid = check_inputs(levels, mask, spec)?;
    let (j_min, j_max_cube) = cube_range;
    validate_cube_range(&grid, j_min, j_max_cube)?;
    let n = grid.dim() as f64;
    let vol = grid.cell_volume();
    let nlev = levels.len();
    let weighted: Vec<Vec<f64>> = levels
        .iter()
        .enumerate()
        .map(|(j, l)| {
            let w = 2f64.powf(j as f64 * spec.s);
            l.values().iter().map(|v| w * v.f64().abs()).collect()
        })
        .collect();
    let quadrature: Vec<bool> = (0..grid.len())
        .map(|i| mask.contains(i) && grid.is_quadrature(i))
        .collect();
    let qmask = Mask::from_bools(&grid, quadrature)?;
    let cube_levels: Vec<Cubes> = (j_min..=j_max_cube)
        .map(|level| cubes_at(&grid, &qmask, level))
        .collect::<Result<_>>()?;

    match spec.kind {
        NormKind::B | NormKind::F => {
            let mut best = -1.0f64;
            let mut witness = None;
            let mut witness_levels = vec![0.0; nlev];
            for cubes in &cube_levels {
                let big_j = cubes.level;
                let jstart = big_j.max(0) as usize;
                let cw = 2f64.powf(n * big_j as f64 * spec.tau);
                let integrand = if spec.kind == NormKind::F && jstart < nlev {
                    Some(f_integrand(&weighted[jstart..], &cubes.members, spec, grid.len()))
                } else {
                    None
                };
                let results: Vec<(f64, Vec<f64>)> = cubes
                    .members
                    .par_iter()
                    .map(|idx| {
                        let per: Vec<f64> = (0..nlev)
                            .map(|j| {
                                if j < jstart {
                                    0.0
                                } else {
                                    cw * lp_norm(&weighted[j], idx, spec.p, vol)
                                }
                            })
                            .collect();
                        let value = match &integrand {
                            None if spec.kind == NormKind::F => 0.0,
                            None => lq_combine(&per[jstart.min(nlev)..], spec.q),
                            Some(g) => cw * lp_norm(g, idx, spec.p, vol),
                        };
                        (value, per)
                    })
                    .collect();
                for (k, (value, per)) in results.into_iter().enumerate() {
                    if value > best {
                        best = value;
                        witness = Some(cubes.list[k].clone());
                        witness_levels = per;
                    }
                }
            }
            let tail = witness_levels.last().copied().unwrap_or(0.0);
            Ok(NormResult {
                value: best.max(0.0),
                witness,
                per_level: witness_levels,
                tail_estimate: tail,
                warning: None,
            })
        }
        NormKind::N => {
            let mut per_level = vec![0.0f64; nlev];
            let mut per_witness: Vec<Option<DyadicCube>> = vec![None; nlev];
            for cubes in &cube_levels {
                let cw = 2f64.powf(n * cubes.level as f64 * spec.tau);
                let results: Vec<Vec<f64>> = cubes
                    .members
                    .par_iter()
                    .map(|idx| {
                        (0..nlev)
                            .map(|j| cw * lp_norm(&weighted[j], idx, spec.p, vol))
                            .collect()
                    })
                    .collect();
                for (k, per) in results.into_iter().enumerate() {
                    for j in 0..nlev {
                        if per[j] > per_level[j] || per_witness[j].is_none() {
                            per_level[j] = per_level[j].max(per[j]);
                            per_witness[j] = Some(cubes.list[k].clone());
                        }
                    }
                }
            }
            let top = (0..nlev).fold(0, |b, j| if per_level[j] > per_level[b] { j } else { b });
            let value = lq_combine(&per_level, spec.q);
            Ok(NormResult {
                value,
                witness: per_witness[top].clone(),
                tail_estimate: *per_level.last().unwrap_or(&0.0),
                per_level,
                warning: None,
            })
        }
    }
}

/// `(sum_j |2^{js} g_j|^q)^{1/q}` at every sample touched by some cube.
fn f_integrand(weighted: &[Vec<f64>], members: &[Vec<usize>], spec: &SpaceSpec, len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for idx in members {
        for &i in idx {
            let terms: Vec<f64> = weighted.iter().map(|w| w[i]).collect();
            out[i] = lq_combine(&terms, spec.q);
        }
    }
    out
}

/// Sequence norm of a pyramid; see the module docs.
pub fn seq_norm<T: Real>(
    pyr: &Pyramid<T>,
    mask: &Mask,
    spec: &SpaceSpec,
    cube_range: (i32, i32),
) -> Result<NormResult> {
    seq_norm_levels(pyr.levels(), mask, spec, cube_range)
}

/// Norm on `R^n` through a band-limited family, over the default cube range.
pub fn space_norm_rn<T: Real>(f: &SampledField<T>, spec: &SpaceSpec, lam: &LpFamily<T>) -> Result<NormResult> {
    if lam.kind() != FamilyKind::Bandlimited {
        return Err(Error::InvalidFamily("space norm needs a band-limited family".into()));
    }
    let pyr = convolve_pyramid(f, lam)?;
    seq_norm(&pyr, &Mask::full(f.grid()), spec, default_cube_range(f.grid()))
}

/// The pyramid of `1_Ω f` under a cone-supported family.
pub fn intrinsic_pyramid<T: Real>(f: &SampledField<T>, mask: &Mask, phi: &LpFamily<T>) -> Result<Pyramid<T>> {
    if !phi.is_cone_supported() {
        return Err(Error::InvalidFamily("intrinsic norms need a cone-supported family".into()));
    }
    convolve_pyramid(&mask.apply(f)?, phi)
}

/// Norm of `f` on the domain through the masked cone pyramid.
pub fn intrinsic_norm<T: Real>(
    f: &SampledField<T>,
    mask: &Mask,
    spec: &SpaceSpec,
    phi: &LpFamily<T>,
) -> Result<NormResult> {
    let pyr = intrinsic_pyramid(f, mask, phi)?;
    seq_norm(&pyr, mask, spec, default_cube_range(f.grid()))
}

/// `max(2n / min(p, q), |s| + n tau)`, the lower bound on the Peetre exponent.
pub fn peetre_bound(spec: &SpaceSpec, dim: usize) -> f64 {
    let n = dim as f64;
    (2.0 * n / spec.p.min(spec.q)).max(spec.s.abs() + n * spec.tau)
}

/// The bound plus one.
pub fn default_peetre_n(spec: &SpaceSpec, dim: usize) -> f64 {
    peetre_bound(spec, dim) + 1.0
}

/// The Peetre maximal stack `(P_j)` of a pyramid.
pub fn peetre_levels<T: Real>(pyr: &Pyramid<T>, mask: &Mask, n: f64) -> Result<Vec<SampledField<T>>> {
    pyr.levels()
        .iter()
        .enumerate()
        .map(|(j, l)| peetre_field(l, mask, n, j))
        .collect()
}

/// Norm with levels replaced by Peetre maximal functions over the domain.
///
/// An exponent at or below the bound is still evaluated and flagged.
pub fn peetre_norm<T: Real>(
    f: &SampledField<T>,
    mask: &Mask,
    spec: &SpaceSpec,
    phi: &LpFamily<T>,
    n: f64,
) -> Result<NormResult> {
    let pyr = intrinsic_pyramid(f, mask, phi)?;
    let levels = peetre_levels(&pyr, mask, n)?;
    let mut res = seq_norm_levels(&levels, mask, spec, default_cube_range(f.grid()))?;
    let bound = peetre_bound(spec, f.grid().dim());
    if n <= bound {
        res.warning = Some(format!("N = {n} is not above {bound}"));
    }
    Ok(res)
}
