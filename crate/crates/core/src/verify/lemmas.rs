use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::corpus::Corpus;
use super::report::{Measure, RatioReport};
use crate::domain::Mask;
use crate::error::{Error, Result};
use crate::family::LpFamily;
use crate::grid::{DyadicCube, Grid, SampledField};
use crate::norms::{
    default_cube_range, intrinsic_pyramid, peetre_levels, seq_norm, seq_norm_levels, NormKind, SpaceSpec,
};
use crate::scalar::Real;
use crate::transform::{hl_maximal_at, DEFAULT_RADII_PER_OCTAVE};

/// Evaluation points per pointwise check, 1-D and 2-D.
pub const POINT_SAMPLES: [usize; 2] = [64, 256];

fn stride_points(points: Vec<usize>, dim: usize) -> Vec<usize> {
    let limit = POINT_SAMPLES[dim - 1];
    let step = points.len().div_ceil(limit).max(1);
    points.into_iter().step_by(step).collect()
}

fn quadrature_in(grid: &Grid, mask: &Mask) -> Vec<usize> {
    (0..grid.len())
        .filter(|&i| grid.is_quadrature(i) && mask.contains(i))
        .collect()
}

fn distance(grid: &Grid, a: usize, b: usize) -> f64 {
    let (x, y) = (grid.point(a), grid.point(b));
    (0..grid.dim())
        .map(|ax| (x[ax] - y[ax]) * (x[ax] - y[ax]))
        .sum::<f64>()
        .sqrt()
}

/// `(sum_k 2^{-delta |j-k|} |g_k|)_j`.
pub fn smooth_levels<T: Real>(levels: &[SampledField<T>], delta: f64) -> Vec<SampledField<T>> {
    (0..levels.len())
        .map(|j| {
            let grid = *levels[j].grid();
            let mut acc = vec![0.0f64; grid.len()];
            for (k, g) in levels.iter().enumerate() {
                let w = 2f64.powf(-delta * (j as f64 - k as f64).abs());
                for (a, v) in acc.iter_mut().zip(g.values()) {
                    *a += w * v.f64().abs();
                }
            }
            SampledField::new(grid, acc.into_iter().map(T::lit).collect()).expect("finite levels")
        })
        .collect()
}

/// Ratio of the sequence norm of the smoothed stack to that of `(|g_j|)`.
///
/// The stack is unweighted, so `spec.s` is ignored; the norm runs over the
/// whole grid.
pub fn check_asum<T: Real>(levels: &[SampledField<T>], delta: f64, spec: &SpaceSpec) -> Result<RatioReport> {
    Ok(RatioReport::single("asum", "input", measure_asum(levels, delta, spec)?))
}

fn measure_asum<T: Real>(levels: &[SampledField<T>], delta: f64, spec: &SpaceSpec) -> Result<Measure> {
    let first = levels
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty level stack".into()))?;
    let n = first.grid().dim() as f64;
    if !(delta > n * spec.tau) {
        return Err(Error::Hypothesis(format!("delta = {delta} must exceed n tau = {}", n * spec.tau)));
    }
    let spec0 = spec.with_s(0.0);
    let mask = Mask::full(first.grid());
    let range = default_cube_range(first.grid());
    let abs: Vec<SampledField<T>> = levels.iter().map(|l| l.map(|v| v.abs())).collect();
    let rhs = seq_norm_levels(&abs, &mask, &spec0, range)?.value;
    let lhs = seq_norm_levels(&smooth_levels(levels, delta), &mask, &spec0, range)?.value;
    Ok(Measure::new(lhs, rhs))
}

/// Weighted integral `int_mask 2^{kn} |v(y)|^gamma (1 + 2^k |x - y|)^{-N gamma} dy`.
fn weighted_integral<T: Real>(v: &SampledField<T>, ys: &[usize], x: usize, k: usize, n: f64, gamma: f64) -> f64 {
    let grid = v.grid();
    let scale = 2f64.powi(k as i32);
    let pre = scale.powi(grid.dim() as i32) * grid.cell_volume();
    let mut acc = 0.0;
    for &y in ys {
        let a = v.values()[y].f64().abs();
        if a == 0.0 {
            continue;
        }
        acc += a.powf(gamma) * (1.0 + scale * distance(grid, x, y)).powf(-n * gamma);
    }
    pre * acc
}

/// Pointwise bound of the Peetre maximal function of `theta` by the
/// `phi`-stack, maximized over levels and sampled domain points.
///
/// `gamma = None` selects the supremum form `sup_k 2^{-N|j-k|} P^{phi,N}_k f(x)`.
pub fn check_stinq<T: Real>(
    f: &SampledField<T>,
    phi: &LpFamily<T>,
    theta: &LpFamily<T>,
    n: f64,
    gamma: Option<f64>,
    mask: &Mask,
) -> Result<RatioReport> {
    Ok(RatioReport::single(
        "stinq",
        "input",
        measure_stinq(f, phi, theta, n, gamma, mask)?,
    ))
}

fn measure_stinq<T: Real>(
    f: &SampledField<T>,
    phi: &LpFamily<T>,
    theta: &LpFamily<T>,
    n: f64,
    gamma: Option<f64>,
    mask: &Mask,
) -> Result<Measure> {
    if let Some(g) = gamma {
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma = {g} outside (0, inf]")));
        }
    }
    if !(n > 0.0) {
        return Err(Error::InvalidParameter(format!("N = {n} must be positive")));
    }
    let grid = *f.grid();
    let pphi = intrinsic_pyramid(f, mask, phi)?;
    let pth = intrinsic_pyramid(f, mask, theta)?;
    let lhs = peetre_levels(&pth, mask, n)?;
    let ys = quadrature_in(&grid, mask);
    let xs = stride_points(ys.clone(), grid.dim());
    let rhs_sup = match gamma {
        None => Some(peetre_levels(&pphi, mask, n)?),
        Some(_) => None,
    };
    let per_x: Vec<Measure> = xs
        .par_iter()
        .map(|&x| {
            let ints: Vec<f64> = match gamma {
                Some(g) => (0..pphi.levels().len())
                    .map(|k| weighted_integral(&pphi.levels()[k], &ys, x, k, n, g))
                    .collect(),
                None => Vec::new(),
            };
            let mut worst = Measure::new(0.0, 0.0);
            for (j, l) in lhs.iter().enumerate() {
                let rhs = match (gamma, &rhs_sup) {
                    (None, Some(ps)) => ps
                        .iter()
                        .enumerate()
                        .map(|(k, p)| 2f64.powf(-n * (j as f64 - k as f64).abs()) * p.values()[x].f64())
                        .fold(0.0, f64::max),
                    (Some(g), _) => ints
                        .iter()
                        .enumerate()
                        .map(|(k, i)| 2f64.powf(-n * g * (j as f64 - k as f64).abs()) * i)
                        .sum::<f64>()
                        .powf(1.0 / g),
                    _ => unreachable!(),
                };
                worst = worst.worse(Measure::new(l.values()[x].f64(), rhs));
            }
            worst
        })
        .collect();
    Ok(per_x.into_iter().fold(Measure::new(0.0, 0.0), Measure::worse))
}

/// Weighted integral of `|g|` against the sum of Hardy-Littlewood maximal
/// functions of its cube pieces, over sampled `x` in `Q_{J,v}`.
pub fn check_pee_to_hl<T: Real>(g: &SampledField<T>, cube: &DyadicCube, k: i32, n: f64) -> Result<RatioReport> {
    Ok(RatioReport::single("pee_to_hl", "input", measure_pee_to_hl(g, cube, k, n)?))
}

fn measure_pee_to_hl<T: Real>(g: &SampledField<T>, cube: &DyadicCube, k: i32, n: f64) -> Result<Measure> {
    let grid = *g.grid();
    let dim = grid.dim();
    if k < cube.level {
        return Err(Error::Hypothesis(format!("k = {k} below J = {}", cube.level)));
    }
    if k < 0 {
        return Err(Error::InvalidParameter(format!("k = {k} must be non-negative")));
    }
    if !(n > dim as f64) {
        return Err(Error::Hypothesis(format!("N = {n} must exceed n = {dim}")));
    }
    let full = Mask::full(&grid);
    let xs = stride_points(crate::grid::restrict(g, cube, &full)?, dim);
    if xs.is_empty() {
        return Err(Error::InvalidParameter("cube holds no samples".into()));
    }
    let ys = quadrature_in(&grid, &full);
    let abs = g.map(|v| v.abs());
    let lhs: Vec<f64> = xs
        .par_iter()
        .map(|&x| weighted_integral(&abs, &ys, x, k as usize, n, 1.0))
        .collect();
    let cells = crate::grid::cube_cells(&grid, cube.level)?;
    let (lo, hi) = crate::grid::cube_index_span(&grid, cells);
    let mut ws: Vec<Vec<i64>> = Vec::new();
    for a in lo..=hi {
        if dim == 1 {
            ws.push(vec![a]);
        } else {
            ws.extend((lo..=hi).map(|b| vec![a, b]));
        }
    }
    let mut rhs = vec![0.0f64; xs.len()];
    for w in ws {
        let q = DyadicCube::new(cube.level, w);
        let idx = crate::grid::restrict(&abs, &q, &full)?;
        if idx.iter().all(|&i| abs.values()[i] == T::zero()) {
            continue;
        }
        let mut vals = vec![T::zero(); grid.len()];
        for &i in &idx {
            vals[i] = abs.values()[i];
        }
        let piece = SampledField::from_parts(grid, vals);
        let d: f64 = q
            .v
            .iter()
            .zip(&cube.v)
            .map(|(a, b)| ((a - b) * (a - b)) as f64)
            .sum::<f64>()
            .sqrt();
        let weight = (1.0 + d).powf(dim as f64 - n);
        let m = hl_maximal_at(&piece, &xs, DEFAULT_RADII_PER_OCTAVE);
        for (r, v) in rhs.iter_mut().zip(m) {
            *r += weight * v.f64();
        }
    }
    Ok(lhs
        .into_iter()
        .zip(rhs)
        .map(|(l, r)| Measure::new(l, r))
        .fold(Measure::new(0.0, 0.0), Measure::worse))
}

/// Ratio of the Peetre-stack norm of `theta` to the plain `phi`-stack norm.
pub fn check_peetre_bound<T: Real>(
    f: &SampledField<T>,
    mask: &Mask,
    spec: &SpaceSpec,
    phi: &LpFamily<T>,
    theta: &LpFamily<T>,
    n: f64,
) -> Result<RatioReport> {
    Ok(RatioReport::single(
        "peetre_bound",
        "input",
        measure_peetre_bound(f, mask, spec, phi, theta, n)?,
    ))
}

fn measure_peetre_bound<T: Real>(
    f: &SampledField<T>,
    mask: &Mask,
    spec: &SpaceSpec,
    phi: &LpFamily<T>,
    theta: &LpFamily<T>,
    n: f64,
) -> Result<Measure> {
    let range = default_cube_range(f.grid());
    let pth = intrinsic_pyramid(f, mask, theta)?;
    let lhs = seq_norm_levels(&peetre_levels(&pth, mask, n)?, mask, spec, range)?.value;
    let rhs = seq_norm(&intrinsic_pyramid(f, mask, phi)?, mask, spec, range)?.value;
    Ok(Measure::new(lhs, rhs))
}

/// Parameters of the corpus-level lemma checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LemmaConfig {
    /// Excess of `delta` over `n tau` in the summation check.
    pub delta_margin: f64,
    /// Exponent `N` of the pointwise Peetre check.
    pub stinq_n: f64,
    /// `None` for the supremum form.
    pub stinq_gamma: Option<f64>,
    /// Cube level `J` and excess `k - J` of the maximal-function check.
    pub hl_level: i32,
    pub hl_k_offset: i32,
    /// Excess of `N` over `n` in the maximal-function check.
    pub hl_n_margin: f64,
    /// Excess of the Peetre exponent over its lower bound.
    pub peetre_margin: f64,
    /// Fixed Peetre exponent, possibly at or below the bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub peetre_n: Option<f64>,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        LemmaConfig {
            delta_margin: 1.0,
            stinq_n: 3.0,
            stinq_gamma: None,
            hl_level: 0,
            hl_k_offset: 3,
            hl_n_margin: 1.0,
            peetre_margin: 1.0,
            peetre_n: None,
        }
    }
}

fn collect<T: Real + Sync>(
    corpus: &Corpus<T>,
    check: &str,
    f: impl Fn(&SampledField<T>) -> Result<Measure> + Sync,
) -> Result<RatioReport> {
    let items = corpus
        .members
        .par_iter()
        .map(|m| Ok((m.name.clone(), f(&m.field)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(RatioReport::from_measures(check, items))
}

/// Summation and Peetre-bound checks for one space spec over a corpus.
pub fn corpus_spec_checks<T: Real>(
    corpus: &Corpus<T>,
    mask: &Mask,
    spec: &SpaceSpec,
    phi: &LpFamily<T>,
    theta: &LpFamily<T>,
    cfg: &LemmaConfig,
) -> Result<(RatioReport, RatioReport)> {
    let dim = mask.grid().dim() as f64;
    let delta = dim * spec.tau + cfg.delta_margin;
    let asum = collect(corpus, "asum", |f| {
        let levels = intrinsic_pyramid(f, mask, phi)?.into_levels();
        measure_asum(&levels, delta, spec)
    })?;
    let n = cfg
        .peetre_n
        .unwrap_or_else(|| crate::norms::peetre_bound(spec, mask.grid().dim()) + cfg.peetre_margin);
    let pb = collect(corpus, "peetre_bound", |f| {
        measure_peetre_bound(f, mask, spec, phi, theta, n)
    })?;
    Ok((asum, pb))
}

/// Pointwise Peetre and maximal-function checks over a corpus.
pub fn corpus_pointwise_checks<T: Real>(
    corpus: &Corpus<T>,
    mask: &Mask,
    phi: &LpFamily<T>,
    theta: &LpFamily<T>,
    cfg: &LemmaConfig,
) -> Result<(RatioReport, RatioReport)> {
    let stinq = collect(corpus, "stinq", |f| {
        measure_stinq(f, phi, theta, cfg.stinq_n, cfg.stinq_gamma, mask)
    })?;
    let dim = mask.grid().dim();
    let hl = collect(corpus, "pee_to_hl", |f| {
        let cube = peak_cube(f, cfg.hl_level);
        measure_pee_to_hl(f, &cube, cfg.hl_level + cfg.hl_k_offset, dim as f64 + cfg.hl_n_margin)
    })?;
    Ok((stinq, hl))
}

/// The level-`J` cube holding the largest quadrature sample of `|f|`.
pub fn peak_cube<T: Real>(f: &SampledField<T>, level: i32) -> DyadicCube {
    let grid = f.grid();
    let mut best = (0usize, -1.0f64);
    for i in 0..grid.len() {
        let a = f.values()[i].f64().abs();
        if grid.is_quadrature(i) && a > best.1 {
            best = (i, a);
        }
    }
    let p = grid.point(best.0);
    let side = 2f64.powi(-level);
    DyadicCube::new(level, (0..grid.dim()).map(|ax| (p[ax] / side).floor() as i64).collect())
}

/// The matrix of space specs exercised by the default checks.
pub fn default_spec_matrix() -> Vec<SpaceSpec> {
    let inf = f64::INFINITY;
    [
        (NormKind::B, 2.0, 2.0, 0.5, 0.0),
        (NormKind::B, 1.0, inf, 0.0, 0.25),
        (NormKind::F, 2.0, 2.0, 0.5, 0.5),
        (NormKind::N, 2.0, 1.0, 0.5, 0.25),
    ]
    .into_iter()
    .map(|(k, p, q, s, t)| SpaceSpec::new(k, p, q, s, t).expect("valid default spec"))
    .collect()
}
