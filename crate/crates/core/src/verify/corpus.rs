use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{DyadicCube, Grid, SampledField};
use crate::scalar::Real;

/// One plane wave of a band-limited member.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    /// Frequency in cycles per unit length.
    pub freq: Vec<f64>,
    pub amp: f64,
    pub phase: f64,
}

/// Closed-form description of a corpus member.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MemberKind {
    GaussianBump {
        center: Vec<f64>,
        width: f64,
    },
    /// `sum amp cos(2 pi freq.x + phase)` under a Gaussian envelope; the
    /// spectrum is negligible beyond `cutoff`.
    BandlimitedRandom {
        center: Vec<f64>,
        envelope: f64,
        cutoff: f64,
        modes: Vec<Mode>,
    },
    /// `|x - center|^beta`, equal to the pure power for `|x - center| <= plateau`
    /// and tapered smoothly to zero at `2 plateau`.
    Cusp {
        center: Vec<f64>,
        beta: f64,
        plateau: f64,
    },
    CubeIndicator {
        cube: DyadicCube,
    },
    /// Quadratic polynomial in `(x - center) / radius` times a smooth bump of
    /// that radius. Coefficients: constant, linear terms, then the quadratic
    /// monomials in lexicographic order.
    PolynomialTimesBump {
        center: Vec<f64>,
        radius: f64,
        coeffs: Vec<f64>,
    },
}

fn dist(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

fn flat_exp(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Smooth step: 1 for `t <= 0`, 0 for `t >= 1`.
fn taper(t: f64) -> f64 {
    let a = flat_exp(1.0 - t);
    let b = flat_exp(t);
    a / (a + b)
}

fn quad_terms(y: &[f64]) -> Vec<f64> {
    let mut out = vec![1.0];
    out.extend_from_slice(y);
    for i in 0..y.len() {
        for k in i..y.len() {
            out.push(y[i] * y[k]);
        }
    }
    out
}

impl MemberKind {
    pub fn label(&self) -> &'static str {
        match self {
            MemberKind::GaussianBump { .. } => "gaussian-bump",
            MemberKind::BandlimitedRandom { .. } => "bandlimited-random",
            MemberKind::Cusp { .. } => "cusp",
            MemberKind::CubeIndicator { .. } => "cube-indicator",
            MemberKind::PolynomialTimesBump { .. } => "polynomial-times-bump",
        }
    }

    pub fn is_bandlimited(&self) -> bool {
        matches!(self, MemberKind::BandlimitedRandom { .. })
    }

    fn center(&self) -> Option<&[f64]> {
        match self {
            MemberKind::GaussianBump { center, .. }
            | MemberKind::BandlimitedRandom { center, .. }
            | MemberKind::Cusp { center, .. }
            | MemberKind::PolynomialTimesBump { center, .. } => Some(center),
            MemberKind::CubeIndicator { .. } => None,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("{}: {m}", self.label())));
        if let Some(c) = self.center() {
            if c.len() != dim || c.iter().any(|v| !v.is_finite()) {
                return bad("center must have one finite coordinate per axis");
            }
        }
        match self {
            MemberKind::GaussianBump { width, .. } if !(*width > 0.0) => bad("width must be positive"),
            MemberKind::BandlimitedRandom {
                envelope, cutoff, modes, ..
            } => {
                if !(*envelope > 0.0) || !(*cutoff > 0.0) {
                    return bad("envelope and cutoff must be positive");
                }
                if modes.iter().any(|m| m.freq.len() != dim || !m.amp.is_finite()) {
                    return bad("malformed mode");
                }
                Ok(())
            }
            MemberKind::Cusp { beta, plateau, .. } => {
                if !(*beta > 0.0 && *beta < 2.0) {
                    return bad("cusp exponent must lie in (0, 2)");
                }
                if !(*plateau > 0.0) {
                    return bad("plateau must be positive");
                }
                Ok(())
            }
            MemberKind::CubeIndicator { cube } if cube.v.len() != dim => bad("cube dimension mismatch"),
            MemberKind::PolynomialTimesBump { radius, coeffs, .. } => {
                if !(*radius > 0.0) {
                    return bad("radius must be positive");
                }
                if coeffs.len() != quad_terms(&vec![0.0; dim]).len() {
                    return bad("wrong number of coefficients");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            MemberKind::GaussianBump { center, width } => {
                let r = dist(x, center);
                (-r * r / (2.0 * width * width)).exp()
            }
            MemberKind::BandlimitedRandom {
                center, envelope, modes, ..
            } => {
                let r = dist(x, center);
                let env = (-r * r / (2.0 * envelope * envelope)).exp();
                let wave: f64 = modes
                    .iter()
                    .map(|m| {
                        let arg: f64 = m.freq.iter().zip(x).map(|(k, xi)| k * xi).sum();
                        m.amp * (2.0 * std::f64::consts::PI * arg + m.phase).cos()
                    })
                    .sum();
                env * wave
            }
            MemberKind::Cusp { center, beta, plateau } => {
                let r = dist(x, center);
                r.powf(*beta) * taper(r / plateau - 1.0)
            }
            MemberKind::CubeIndicator { cube } => {
                if cube.contains(x) {
                    1.0
                } else {
                    0.0
                }
            }
            MemberKind::PolynomialTimesBump { center, radius, coeffs } => {
                let y: Vec<f64> = x.iter().zip(center).map(|(a, c)| (a - c) / radius).collect();
                let t = y.iter().map(|v| v * v).sum::<f64>();
                if t >= 1.0 {
                    return 0.0;
                }
                let bump = (1.0 - 1.0 / (1.0 - t)).exp();
                let p: f64 = quad_terms(&y).iter().zip(coeffs).map(|(a, b)| a * b).sum();
                p * bump
            }
        }
    }
}

/// A named sampled member with its description.
#[derive(Clone, Debug, PartialEq)]
pub struct Member<T> {
    pub name: String,
    pub kind: MemberKind,
    pub field: SampledField<T>,
}

impl<T: Real> Member<T> {
    pub fn build(name: impl Into<String>, kind: MemberKind, grid: &Grid) -> Result<Self> {
        kind.validate(grid.dim())?;
        let field = SampledField::<T>::from_fn(*grid, |x| kind.eval(x));
        if field.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{} produced non-finite samples", kind.label())));
        }
        Ok(Member {
            name: name.into(),
            kind,
            field,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Corpus<T> {
    pub seed: u64,
    pub members: Vec<Member<T>>,
}

impl<T: Real> Corpus<T> {
    /// Re-samples every member on another grid.
    pub fn resample(&self, grid: &Grid) -> Result<Self> {
        let members = self
            .members
            .iter()
            .map(|m| Member::build(m.name.clone(), m.kind.clone(), grid))
            .collect::<Result<_>>()?;
        Ok(Corpus {
            seed: self.seed,
            members,
        })
    }

    pub fn bandlimited(&self) -> Corpus<T> {
        Corpus {
            seed: self.seed,
            members: self.members.iter().filter(|m| m.kind.is_bandlimited()).cloned().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Member counts of a generated corpus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusSpec {
    pub gaussians: usize,
    pub bandlimited: usize,
    pub cusps: usize,
    pub indicators: usize,
    pub poly_bumps: usize,
    /// Exponents of the cusps, cycled; drawn from `(0.3, 1.7)` when empty.
    pub cusp_betas: Vec<f64>,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            gaussians: 4,
            bandlimited: 4,
            cusps: 2,
            indicators: 1,
            poly_bumps: 1,
            cusp_betas: Vec::new(),
        }
    }
}

/// A point of the placement region: upper part of the last axis, central
/// part of the others, so members sit inside domains lying above a graph
/// through the origin.
fn place(rng: &mut ChaCha8Rng, dim: usize, a: f64, top: f64) -> Vec<f64> {
    let mut c: Vec<f64> = (0..dim - 1).map(|_| rng.gen_range(-0.15 * a..0.15 * a)).collect();
    c.push(rng.gen_range(0.25 * a..top * a));
    c
}

/// Deterministic corpus from a seed; features scale with the box half-width.
pub fn corpus_generate<T: Real>(spec: &CorpusSpec, grid: &Grid, seed: u64) -> Result<Corpus<T>> {
    if let Some(b) = spec.cusp_betas.iter().find(|b| !(**b > 0.0 && **b < 2.0)) {
        return Err(Error::InvalidParameter(format!("cusp exponent {b} outside (0, 2)")));
    }
    let dim = grid.dim();
    let a = grid.half_extent();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kinds: Vec<(String, MemberKind)> = Vec::new();
    for i in 0..spec.gaussians {
        let center = place(&mut rng, dim, a, 0.6);
        let width = rng.gen_range(0.04 * a..0.08 * a);
        kinds.push((format!("gaussian-{i}"), MemberKind::GaussianBump { center, width }));
    }
    for i in 0..spec.bandlimited {
        // ten envelope widths from the box edge, so the cut is below 1e-20
        let center = place(&mut rng, dim, a, 0.375);
        let envelope = 0.0625 * a;
        let fmax = 0.5 / envelope;
        let modes = (0..3)
            .map(|_| Mode {
                freq: (0..dim).map(|_| rng.gen_range(-fmax..fmax)).collect(),
                amp: rng.gen_range(-1.0..1.0),
                phase: rng.gen_range(0.0..2.0 * std::f64::consts::PI),
            })
            .collect();
        let cutoff = fmax * (dim as f64).sqrt() + 8.0 / (2.0 * std::f64::consts::PI * envelope);
        kinds.push((
            format!("bandlimited-{i}"),
            MemberKind::BandlimitedRandom {
                center,
                envelope,
                cutoff,
                modes,
            },
        ));
    }
    for i in 0..spec.cusps {
        let center = place(&mut rng, dim, a, 0.6);
        let drawn = rng.gen_range(0.3..1.7);
        let beta = if spec.cusp_betas.is_empty() {
            drawn
        } else {
            spec.cusp_betas[i % spec.cusp_betas.len()]
        };
        kinds.push((
            format!("cusp-{i}"),
            MemberKind::Cusp {
                center,
                beta,
                plateau: 0.2 * a,
            },
        ));
    }
    for i in 0..spec.indicators {
        let level = -(0.25 * a).log2().floor() as i32;
        let side = 2f64.powi(-level);
        let mut v: Vec<i64> = vec![-(i as i64 % 2); dim - 1];
        v.push((0.25 * a / side).round() as i64 + (i / 2) as i64);
        kinds.push((
            format!("indicator-{i}"),
            MemberKind::CubeIndicator {
                cube: DyadicCube::new(level, v),
            },
        ));
    }
    for i in 0..spec.poly_bumps {
        let center = place(&mut rng, dim, a, 0.6);
        let nc = quad_terms(&vec![0.0; dim]).len();
        let coeffs = (0..nc).map(|_| rng.gen_range(-1.0..1.0)).collect();
        kinds.push((
            format!("polybump-{i}"),
            MemberKind::PolynomialTimesBump {
                center,
                radius: 0.15 * a,
                coeffs,
            },
        ));
    }
    let members = kinds
        .into_iter()
        .map(|(name, kind)| Member::build(name, kind, grid))
        .collect::<Result<_>>()?;
    Ok(Corpus { seed, members })
}
