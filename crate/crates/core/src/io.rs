//! On-disk formats: `.lpf` fields, domain JSON, `.lpfam` family directories
//! and pyramid directories.
//!
//! An `.lpf` file is a JSON header; the samples live in the sidecar
//! `<name>.lpf.bin` as little-endian binary64 in row-major order.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::domain::{DomainFile, LipschitzDomain};
use crate::error::{Error, Result};
use crate::family::{make_base_kernel, scale_family, FamilyKind, Kernel, LpFamily};
use crate::grid::{make_grid, Grid, SampledField};
use crate::scalar::Real;
use crate::transform::Pyramid;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpfHeader {
    pub dim: usize,
    pub half_extent: f64,
    pub level: u32,
    pub count: usize,
    /// Hex digest of the payload bytes.
    pub sha256: String,
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn malformed(path: &Path, offset: u64, message: impl Into<String>) -> Error {
    Error::Malformed {
        path: path.to_path_buf(),
        offset,
        message: message.into(),
    }
}

/// Byte offset of a 1-based line and column.
fn byte_offset(text: &str, line: usize, column: usize) -> u64 {
    let start: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    (start + column.saturating_sub(1)) as u64
}

pub fn read_json<D: DeserializeOwned>(path: &Path) -> Result<D> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| {
        let off = byte_offset(&text, e.line(), e.column());
        malformed(path, off, e.to_string())
    })
}

/// Pretty JSON with a trailing newline.
pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable value");
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn payload_path(header: &Path) -> PathBuf {
    let mut s = header.as_os_str().to_owned();
    s.push(".bin");
    PathBuf::from(s)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn payload_bytes<T: Real>(values: &[T]) -> Vec<u8> {
    values.iter().flat_map(|v| v.f64().to_le_bytes()).collect()
}

pub fn write_field<T: Real>(path: &Path, field: &SampledField<T>) -> Result<LpfHeader> {
    let g = field.grid();
    let bytes = payload_bytes(field.values());
    let header = LpfHeader {
        dim: g.dim(),
        half_extent: g.half_extent(),
        level: g.level(),
        count: g.count(),
        sha256: sha256_hex(&bytes),
    };
    let bin = payload_path(path);
    fs::write(&bin, &bytes).map_err(|e| io_err(&bin, e))?;
    write_json(path, &header)?;
    Ok(header)
}

pub fn read_field<T: Real>(path: &Path) -> Result<SampledField<T>> {
    let header: LpfHeader = read_json(path)?;
    let grid = make_grid(header.dim, header.half_extent, header.level).map_err(|e| malformed(path, 0, e.to_string()))?;
    if grid.count() != header.count {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let off = text.find("\"count\"").unwrap_or(0) as u64;
        return Err(malformed(
            path,
            off,
            format!("count {} does not match level {} (expected {})", header.count, header.level, grid.count()),
        ));
    }
    let bin = payload_path(path);
    let bytes = fs::read(&bin).map_err(|e| io_err(&bin, e))?;
    let want = grid.len() * 8;
    if bytes.len() != want {
        return Err(malformed(
            &bin,
            bytes.len().min(want) as u64,
            format!("payload holds {} bytes, expected {want}", bytes.len()),
        ));
    }
    if sha256_hex(&bytes) != header.sha256 {
        return Err(malformed(&bin, 0, "payload checksum mismatch"));
    }
    let mut values = Vec::with_capacity(grid.len());
    for (i, chunk) in bytes.chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
        if !v.is_finite() {
            return Err(malformed(&bin, (8 * i) as u64, "non-finite sample"));
        }
        values.push(T::lit(v));
    }
    SampledField::new(grid, values)
}

pub fn read_domain(path: &Path) -> Result<LipschitzDomain> {
    let file: DomainFile = read_json(path)?;
    LipschitzDomain::from_file(&file)
}

pub fn write_domain(path: &Path, domain: &LipschitzDomain) -> Result<()> {
    write_json(path, &domain.to_file())
}

/// Kernel samples placed on the grid with offset zero at the origin; samples
/// outside the box are dropped.
pub fn kernel_field<T: Real>(kernel: &Kernel<T>, grid: &Grid) -> SampledField<T> {
    let o = grid.origin_index();
    let c = grid.count() as i64;
    let mut values = vec![T::zero(); grid.len()];
    for (off, v) in kernel.samples().iter() {
        let a = o + off[0];
        let b = if grid.dim() == 1 { 0 } else { o + off[1] };
        if a < 0 || a >= c || b < 0 || b >= c {
            continue;
        }
        let idx = if grid.dim() == 1 {
            a as usize
        } else {
            grid.ravel([a as usize, b as usize])
        };
        values[idx] = v;
    }
    SampledField::new(*grid, values).expect("finite kernel samples")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelEntry {
    pub file: String,
    pub sha256: String,
}

/// Manifest of a `.lpfam` directory. The family is rebuilt from these
/// parameters on load and the kernel files are checked against the result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyManifest {
    pub kind: FamilyKind,
    #[serde(rename = "M")]
    pub moment_order: usize,
    #[serde(rename = "L")]
    pub lip: f64,
    #[serde(rename = "J_max")]
    pub j_max: usize,
    pub grid: GridSpec,
    pub domain: DomainFile,
    pub kernels: Vec<KernelEntry>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub half_extent: f64,
    pub level: u32,
}

impl GridSpec {
    pub fn of(grid: &Grid) -> Self {
        GridSpec {
            dim: grid.dim(),
            half_extent: grid.half_extent(),
            level: grid.level(),
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        make_grid(self.dim, self.half_extent, self.level)
    }
}

pub const MANIFEST: &str = "manifest.json";

pub fn write_family<T: Real>(dir: &Path, family: &LpFamily<T>, domain: &LipschitzDomain) -> Result<FamilyManifest> {
    if family.kind() != FamilyKind::Cone {
        return Err(Error::InvalidFamily("only cone families are stored".into()));
    }
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let grid = *family.workspace().grid();
    let mut kernels = Vec::new();
    for (j, k) in family.kernels().iter().enumerate() {
        let file = format!("kernel_{j}.lpf");
        let h = write_field(&dir.join(&file), &kernel_field(k, &grid))?;
        kernels.push(KernelEntry { file, sha256: h.sha256 });
    }
    let manifest = FamilyManifest {
        kind: family.kind(),
        moment_order: family.moment_order(),
        lip: domain.lip_const(),
        j_max: family.j_max(),
        grid: GridSpec::of(&grid),
        domain: domain.to_file(),
        kernels,
    };
    write_json(&dir.join(MANIFEST), &manifest)?;
    Ok(manifest)
}

/// Rebuilds the family of a `.lpfam` directory and checks every kernel file.
pub fn load_family<T: Real>(dir: &Path) -> Result<(LipschitzDomain, LpFamily<T>, FamilyManifest)> {
    let mpath = dir.join(MANIFEST);
    let manifest: FamilyManifest = read_json(&mpath)?;
    if manifest.kind != FamilyKind::Cone {
        return Err(malformed(&mpath, 0, "only cone families can be loaded"));
    }
    let grid = manifest.grid.grid()?;
    let domain = LipschitzDomain::from_file(&manifest.domain)?;
    let base = make_base_kernel(&domain, manifest.moment_order, &grid)?;
    let family = scale_family::<T>(&base, &grid, manifest.j_max)?;
    if manifest.kernels.len() != family.kernels().len() {
        return Err(malformed(&mpath, 0, "kernel count does not match J_max"));
    }
    for (entry, k) in manifest.kernels.iter().zip(family.kernels()) {
        let stored: SampledField<f64> = read_field(&dir.join(&entry.file))?;
        let rebuilt = payload_bytes(kernel_field(k, &grid).values());
        let digest = sha256_hex(&rebuilt);
        if digest != entry.sha256 || sha256_hex(&payload_bytes(stored.values())) != entry.sha256 {
            return Err(malformed(&dir.join(&entry.file), 0, "kernel differs from the rebuilt family"));
        }
    }
    Ok((domain, family, manifest))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PyramidManifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<FamilyKind>,
    pub levels: Vec<KernelEntry>,
}

pub const PYRAMID_MANIFEST: &str = "pyramid.json";

pub fn write_pyramid<T: Real>(dir: &Path, pyr: &Pyramid<T>) -> Result<PyramidManifest> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut levels = Vec::new();
    for (j, l) in pyr.levels().iter().enumerate() {
        let file = format!("level_{j}.lpf");
        let h = write_field(&dir.join(&file), l)?;
        levels.push(KernelEntry { file, sha256: h.sha256 });
    }
    let m = PyramidManifest {
        kind: pyr.family_kind(),
        levels,
    };
    write_json(&dir.join(PYRAMID_MANIFEST), &m)?;
    Ok(m)
}

pub fn read_pyramid<T: Real>(dir: &Path) -> Result<Pyramid<T>> {
    let m: PyramidManifest = read_json(&dir.join(PYRAMID_MANIFEST))?;
    let levels = m
        .levels
        .iter()
        .map(|e| read_field(&dir.join(&e.file)))
        .collect::<Result<Vec<_>>>()?;
    Pyramid::from_levels(levels)
}
