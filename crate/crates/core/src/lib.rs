//! Littlewood-Paley characterizations of Besov-type, Triebel-Lizorkin-type
//! and Besov-Morrey norms on special Lipschitz domains.
//!
//! Everything is generic over the scalar type through [`Real`]; the aliases
//! below fix it to `f64` or `f32`.

pub mod domain;
pub mod error;
pub mod family;
pub mod fft;
pub mod grid;
pub mod io;
pub mod norms;
pub mod operators;
pub mod scalar;
pub mod transform;
pub mod verify;

pub use domain::{domain_mask, fold_point, DomainFile, LipschitzDomain, Mask};
pub use error::{Error, Result};
pub use family::{
    bandlimited_family, derivative_split, dual_family, heideman_decay, make_base_kernel,
    scale_family, BaseKernel, DecayTable, FamilyKind, Kernel, LpFamily, MultiIndex, Support,
};
pub use grid::{enumerate_cubes, make_grid, restrict, DyadicCube, Grid, SampledField};
pub use norms::{
    default_cube_range, default_peetre_n, intrinsic_norm, peetre_norm, seq_norm, space_norm_rn,
    NormKind, NormResult, SpaceSpec,
};
pub use operators::{apply_s_alpha, apply_t, extend, truncation_tail, OperatorSpec, TailEstimate};
pub use scalar::Real;
pub use transform::{
    convolve, convolve_pyramid, hl_maximal, peetre_maximal, spectral_derivative, Pyramid,
};
pub use verify::{corpus_generate, report_thm1, report_thm2, Corpus, CorpusSpec, RatioReport};

pub type Field = SampledField<f64>;
pub type Family = LpFamily<f64>;
pub type KernelF64 = Kernel<f64>;
pub type PyramidF64 = Pyramid<f64>;
pub type Field32 = SampledField<f32>;
pub type Family32 = LpFamily<f32>;
pub type Pyramid32 = Pyramid<f32>;
