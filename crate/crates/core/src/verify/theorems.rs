use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::corpus::Corpus;
use super::report::{Measure, RatioReport};
use crate::domain::Mask;
use crate::error::{Error, Result};
use crate::family::{derivative_split, split_multi_indices, LpFamily, MultiIndex};
use crate::grid::SampledField;
use crate::norms::{intrinsic_norm, space_norm_rn, SpaceSpec};
use crate::operators::{apply_s_alpha, apply_split, extend};
use crate::scalar::Real;
use crate::transform::spectral_derivative;

/// Both directions of the sandwich for one space spec.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thm1Report {
    pub spec: SpaceSpec,
    /// Intrinsic norm over the norm of the member itself on the whole grid.
    pub up: RatioReport,
    /// Norm of the extension of the restriction over the intrinsic norm.
    pub down: RatioReport,
}

impl Thm1Report {
    pub fn set_stability(&mut self, coarse: &Thm1Report) {
        self.up.set_stability(&coarse.up);
        self.down.set_stability(&coarse.down);
    }
}

pub fn report_thm1<T: Real>(
    corpus: &Corpus<T>,
    mask: &Mask,
    spec: &SpaceSpec,
    phi: &LpFamily<T>,
    psi: &LpFamily<T>,
    lam: &LpFamily<T>,
) -> Result<Thm1Report> {
    let rows = corpus
        .members
        .par_iter()
        .map(|m| {
            let intr = intrinsic_norm(&m.field, mask, spec, phi)?.value;
            let whole = space_norm_rn(&m.field, spec, lam)?.value;
            let ext = extend(&m.field, mask, phi, psi)?;
            let down = space_norm_rn(&ext, spec, lam)?.value;
            Ok((
                (m.name.clone(), Measure::new(intr, whole)),
                (m.name.clone(), Measure::new(down, intr)),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let (up, down): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    Ok(Thm1Report {
        spec: *spec,
        up: RatioReport::from_measures("thm1_up", up),
        down: RatioReport::from_measures("thm1_down", down),
    })
}

/// Ratio of intrinsic norms under two specs, member by member.
pub fn cross_spec_ratio<T: Real>(
    corpus: &Corpus<T>,
    mask: &Mask,
    a: &SpaceSpec,
    b: &SpaceSpec,
    phi: &LpFamily<T>,
) -> Result<RatioReport> {
    let items = corpus
        .members
        .par_iter()
        .map(|m| {
            let x = intrinsic_norm(&m.field, mask, a, phi)?.value;
            let y = intrinsic_norm(&m.field, mask, b, phi)?.value;
            Ok((m.name.clone(), Measure::new(x, y)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RatioReport::from_measures(format!("{} / {}", a.label(), b.label()), items))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityResidual {
    pub name: String,
    /// `max |E f - S_0 f - sum S_alpha d^alpha f|` over the grid.
    pub residual: f64,
    pub sup_f: f64,
    pub relative: f64,
    /// Some derivative carried spectral energy near Nyquist.
    pub aliasing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thm2Report {
    pub spec: SpaceSpec,
    pub m: usize,
    /// Norm at `s` over the sum of the norms of all derivatives of order at most `m` at `s - m`.
    pub ratio: RatioReport,
    pub identity: Vec<IdentityResidual>,
    pub max_identity: f64,
    /// Same ratio with only `f` and the pure derivatives `d_k^m f` on the right.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pure: Option<RatioReport>,
}

impl Thm2Report {
    pub fn set_stability(&mut self, coarse: &Thm2Report) {
        self.ratio.set_stability(&coarse.ratio);
        if let (Some(p), Some(c)) = (self.pure.as_mut(), coarse.pure.as_ref()) {
            p.set_stability(c);
        }
    }
}

fn is_pure(alpha: &[usize]) -> bool {
    alpha.iter().filter(|&&a| a > 0).count() <= 1
}

/// Derivative characterization over the band-limited members of the corpus.
pub fn report_thm2<T: Real>(
    corpus: &Corpus<T>,
    mask: &Mask,
    spec: &SpaceSpec,
    m: usize,
    phi: &LpFamily<T>,
    psi: &LpFamily<T>,
    pure_probe: bool,
) -> Result<Thm2Report> {
    if m == 0 {
        return Err(Error::InvalidParameter("derivative order must be at least 1".into()));
    }
    let dim = mask.grid().dim();
    let members = corpus.bandlimited();
    let splits: Vec<(MultiIndex, LpFamily<T>)> = derivative_split(phi, m)?;
    let low = spec.with_s(spec.s - m as f64);
    let alphas: Vec<MultiIndex> = (0..=m).flat_map(|k| split_multi_indices(dim, k)).collect();
    type Row = ((String, Measure), (String, Measure), IdentityResidual);
    let rows = members
        .members
        .par_iter()
        .map(|mem| -> Result<Row> {
            let f = &mem.field;
            let lhs = intrinsic_norm(f, mask, spec, phi)?.value;
            let mut aliasing = false;
            let (mut rhs, mut rhs_pure) = (0.0, 0.0);
            let mut top: Vec<(MultiIndex, SampledField<T>)> = Vec::new();
            for a in &alphas {
                let d = if a.iter().all(|&x| x == 0) {
                    f.clone()
                } else {
                    let d = spectral_derivative(f, a)?;
                    aliasing |= d.flagged;
                    d.field
                };
                let v = intrinsic_norm(&d, mask, &low, phi)?.value;
                rhs += v;
                let order: usize = a.iter().sum();
                if order == 0 || (order == m && is_pure(a)) {
                    rhs_pure += v;
                }
                if order == m {
                    top.push((a.clone(), d));
                }
            }
            let ext = extend(f, mask, phi, psi)?;
            let zero = vec![0; dim];
            let mut acc = apply_s_alpha(f, mask, &zero, m, phi, psi)?;
            for (a, d) in &top {
                let (_, fam) = splits
                    .iter()
                    .find(|(b, _)| b == a)
                    .ok_or_else(|| Error::InvalidParameter(format!("no split family for {a:?}")))?;
                acc = acc.add(&apply_split(d, mask, fam, m, psi)?)?;
            }
            let residual = ext.sub(&acc)?.max_abs().f64();
            let sup_f = f.max_abs().f64();
            let relative = if sup_f > 0.0 { residual / sup_f } else { 0.0 };
            Ok((
                (mem.name.clone(), Measure::new(lhs, rhs)),
                (mem.name.clone(), Measure::new(lhs, rhs_pure)),
                IdentityResidual {
                    name: mem.name.clone(),
                    residual,
                    sup_f,
                    relative,
                    aliasing,
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut ratio = Vec::new();
    let mut pure = Vec::new();
    let mut identity = Vec::new();
    for (r, p, i) in rows {
        ratio.push(r);
        pure.push(p);
        identity.push(i);
    }
    let max_identity = identity.iter().map(|i| i.relative).fold(0.0, f64::max);
    Ok(Thm2Report {
        spec: *spec,
        m,
        ratio: RatioReport::from_measures(format!("thm2_m{m}"), ratio),
        identity,
        max_identity,
        pure: pure_probe.then(|| RatioReport::from_measures(format!("thm2_pure_m{m}"), pure)),
    })
}
