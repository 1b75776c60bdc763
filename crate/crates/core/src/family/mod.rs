//! Kernels and Littlewood-Paley families.

mod bandlimited;
pub mod base;
mod cone;
mod decay;
mod dual;
pub mod spline;
mod split;

use std::borrow::Cow;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::Workspace;
use crate::scalar::Real;

pub use bandlimited::{bandlimited_family, lambda_hat, lambda_tail_radius, TAIL_TOLERANCE};
pub use base::{make_base_kernel, make_base_kernel_with_depth, BaseKernel};
pub use cone::{cone_workspace, scale_family};
pub use decay::{heideman_decay, DecayTable};
pub use dual::dual_family;
pub use split::{derivative_split, split_multi_indices, MultiIndex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Cone,
    Bandlimited,
    Dual,
    DerivativeSplit,
}

/// Where a kernel's samples may be nonzero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Support {
    /// Inclusive bounding box of sample offsets.
    Compact { lo: [i64; 2], hi: [i64; 2] },
    /// Samples beyond `radius` are discarded; their mass is below `tail`.
    Truncated { radius: f64, tail: f64 },
    /// Defined only as a periodic function on the workspace.
    Periodic,
}

/// Spatial samples on an offset box `origin .. origin + shape`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSamples<T> {
    pub origin: [i64; 2],
    pub shape: [usize; 2],
    pub values: Vec<T>,
}

impl<T: Real> KernelSamples<T> {
    pub fn get(&self, offset: [i64; 2]) -> T {
        let a = offset[0] - self.origin[0];
        let b = offset[1] - self.origin[1];
        if a < 0 || b < 0 || a as usize >= self.shape[0] || b as usize >= self.shape[1] {
            return T::zero();
        }
        self.values[a as usize * self.shape[1] + b as usize]
    }

    /// Iterates `(offset, value)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = ([i64; 2], T)> + '_ {
        let w = self.shape[1];
        self.values.iter().enumerate().map(move |(i, &v)| {
            (
                [
                    self.origin[0] + (i / w) as i64,
                    self.origin[1] + (i % w) as i64,
                ],
                v,
            )
        })
    }
}

enum Source<T> {
    Samples(KernelSamples<T>),
    Spectrum(Arc<Vec<Complex<T>>>),
    Radial { level: usize },
}

/// A convolution kernel tied to a workspace, with cached spectrum.
pub struct Kernel<T: Real> {
    ws: Arc<Workspace<T>>,
    support: Support,
    source: Source<T>,
    spectrum: OnceLock<Arc<Vec<Complex<T>>>>,
}

impl<T: Real> fmt::Debug for Kernel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("workspace", &self.ws)
            .field("support", &self.support)
            .finish()
    }
}

impl<T: Real> Kernel<T> {
    pub(crate) fn from_samples(ws: Arc<Workspace<T>>, samples: KernelSamples<T>) -> Self {
        let lo = samples.origin;
        let hi = [
            lo[0] + samples.shape[0] as i64 - 1,
            lo[1] + samples.shape[1] as i64 - 1,
        ];
        Kernel {
            ws,
            support: Support::Compact { lo, hi },
            source: Source::Samples(samples),
            spectrum: OnceLock::new(),
        }
    }

    pub(crate) fn from_spectrum(ws: Arc<Workspace<T>>, spectrum: Vec<Complex<T>>, support: Support) -> Self {
        Kernel {
            ws,
            support,
            source: Source::Spectrum(Arc::new(spectrum)),
            spectrum: OnceLock::new(),
        }
    }

    pub(crate) fn radial(ws: Arc<Workspace<T>>, level: usize, radius: f64, tail: f64) -> Self {
        Kernel {
            ws,
            support: Support::Truncated { radius, tail },
            source: Source::Radial { level },
            spectrum: OnceLock::new(),
        }
    }

    pub fn workspace(&self) -> &Arc<Workspace<T>> {
        &self.ws
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    /// Largest offset magnitude per axis in samples, if bounded.
    pub fn radius(&self) -> Option<usize> {
        match &self.support {
            Support::Compact { lo, hi } => Some(
                lo.iter()
                    .chain(hi.iter())
                    .map(|v| v.unsigned_abs() as usize)
                    .max()
                    .unwrap_or(0),
            ),
            Support::Truncated { radius, .. } => {
                Some((radius / self.ws.grid().spacing()).ceil() as usize)
            }
            Support::Periodic => None,
        }
    }

    /// `h^n` times the DFT of the periodized samples.
    pub fn spectrum(&self) -> Cow<'_, [Complex<T>]> {
        match &self.source {
            Source::Spectrum(s) => Cow::Borrowed(s.as_slice()),
            Source::Radial { level } => Cow::Owned(bandlimited::radial_spectrum(&self.ws, *level)),
            Source::Samples(s) => Cow::Borrowed(
                self.spectrum
                    .get_or_init(|| Arc::new(samples_spectrum(&self.ws, s)))
                    .as_slice(),
            ),
        }
    }

    /// Spatial samples; for spectral kernels, the inverse transform trimmed to the support.
    pub fn samples(&self) -> Cow<'_, KernelSamples<T>> {
        match &self.source {
            Source::Samples(s) => Cow::Borrowed(s),
            _ => Cow::Owned(self.samples_from_spectrum()),
        }
    }

    fn samples_from_spectrum(&self) -> KernelSamples<T> {
        let ws = &self.ws;
        let mut buf = self.spectrum().into_owned();
        ws.inverse(&mut buf);
        let inv_vol = T::lit(1.0 / ws.grid().cell_volume());
        let dim = ws.grid().dim();
        let p = ws.size() as i64;
        let (lo, hi) = match &self.support {
            Support::Compact { lo, hi } => (*lo, *hi),
            Support::Truncated { radius, .. } => {
                let r = ((radius / ws.grid().spacing()).ceil() as i64).min(p / 2 - 1);
                ([-r, if dim == 2 { -r } else { 0 }], [r, if dim == 2 { r } else { 0 }])
            }
            Support::Periodic => (
                [-p / 2, if dim == 2 { -p / 2 } else { 0 }],
                [p / 2 - 1, if dim == 2 { p / 2 - 1 } else { 0 }],
            ),
        };
        let shape = [(hi[0] - lo[0] + 1) as usize, (hi[1] - lo[1] + 1) as usize];
        let mut values = Vec::with_capacity(shape[0] * shape[1]);
        for a in lo[0]..=hi[0] {
            for b in lo[1]..=hi[1] {
                let idx = ws.flat(ws.wrap(a), ws.wrap(b));
                values.push(buf[idx].re * inv_vol);
            }
        }
        KernelSamples {
            origin: lo,
            shape,
            values,
        }
    }
}

fn samples_spectrum<T: Real>(ws: &Workspace<T>, s: &KernelSamples<T>) -> Vec<Complex<T>> {
    let mut buf = vec![Complex::new(T::zero(), T::zero()); ws.len()];
    let vol = T::lit(ws.grid().cell_volume());
    for (off, v) in s.iter() {
        let idx = ws.flat(ws.wrap(off[0]), ws.wrap(off[1]));
        buf[idx].re = buf[idx].re + v * vol;
    }
    ws.forward(&mut buf);
    buf
}

/// A finite family `(k_j)_{j=0..J_max}` with its construction metadata.
pub struct LpFamily<T: Real> {
    kind: FamilyKind,
    moment_order: usize,
    aperture: f64,
    kernels: Vec<Kernel<T>>,
    ws: Arc<Workspace<T>>,
    base: Option<Arc<BaseKernel>>,
    alpha: Option<MultiIndex>,
}

impl<T: Real> fmt::Debug for LpFamily<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LpFamily")
            .field("kind", &self.kind)
            .field("moment_order", &self.moment_order)
            .field("aperture", &self.aperture)
            .field("j_max", &self.j_max())
            .field("workspace", &self.ws)
            .finish()
    }
}

impl<T: Real> LpFamily<T> {
    pub(crate) fn assemble(
        kind: FamilyKind,
        moment_order: usize,
        aperture: f64,
        kernels: Vec<Kernel<T>>,
        ws: Arc<Workspace<T>>,
        base: Option<Arc<BaseKernel>>,
        alpha: Option<MultiIndex>,
    ) -> Self {
        LpFamily {
            kind,
            moment_order,
            aperture,
            kernels,
            ws,
            base,
            alpha,
        }
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn moment_order(&self) -> usize {
        self.moment_order
    }

    pub fn aperture(&self) -> f64 {
        self.aperture
    }

    pub fn j_max(&self) -> usize {
        self.kernels.len() - 1
    }

    pub fn kernels(&self) -> &[Kernel<T>] {
        &self.kernels
    }

    pub fn kernel(&self, j: usize) -> Result<&Kernel<T>> {
        self.kernels
            .get(j)
            .ok_or_else(|| Error::InvalidFamily(format!("level {j} above J_max {}", self.j_max())))
    }

    pub fn workspace(&self) -> &Arc<Workspace<T>> {
        &self.ws
    }

    pub fn base(&self) -> Option<&Arc<BaseKernel>> {
        self.base.as_ref()
    }

    /// Multi-index of a derivative-split family.
    pub fn alpha(&self) -> Option<&MultiIndex> {
        self.alpha.as_ref()
    }

    /// Whether kernels are supported in the cone, so convolution on the
    /// domain only reads values from the domain.
    pub fn is_cone_supported(&self) -> bool {
        matches!(self.kind, FamilyKind::Cone | FamilyKind::Dual)
    }
}
