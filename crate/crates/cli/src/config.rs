use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lpchar::domain::DomainFile;
use lpchar::norms::{NormKind, SpaceSpec};
use lpchar::verify::{default_spec_matrix, CorpusSpec, LemmaConfig};
use lpchar::{make_grid, Grid, LipschitzDomain};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub dim: usize,
    pub half_extent: f64,
    pub level: u32,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            dim: 1,
            half_extent: 4.0,
            level: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FamilyConfig {
    #[serde(rename = "M")]
    pub moments: usize,
    #[serde(rename = "J_max")]
    pub j_max: usize,
    /// Peetre exponent; `None` uses the bound plus the lemma margin.
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<f64>,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        FamilyConfig {
            moments: 6,
            j_max: 6,
            n: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub stability_lo: f64,
    pub stability_hi: f64,
    /// Operator identity residual relative to the sup norm.
    pub identity: f64,
    /// Extension reproduction error on the domain, relative to the sup norm.
    pub reproduction: f64,
    /// Required margin of the fitted decay slope below `-min(N, M+1)`.
    pub decay_slack: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            stability_lo: 0.5,
            stability_hi: 2.0,
            identity: 1e-5,
            reproduction: 1e-5,
            decay_slack: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DerivativeConfig {
    pub orders: Vec<usize>,
    pub spec: SpaceSpec,
}

impl Default for DerivativeConfig {
    fn default() -> Self {
        DerivativeConfig {
            orders: vec![1, 2],
            spec: SpaceSpec::new(NormKind::B, 2.0, 2.0, 1.0, 0.0).expect("valid spec"),
        }
    }
}

/// Full configuration of a run; every field has a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub grid: GridConfig,
    /// Domain file, relative to the config file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain_file: Option<PathBuf>,
    /// Inline domain, used when no file is given.
    pub domain: DomainFile,
    pub family: FamilyConfig,
    pub specs: Vec<SpaceSpec>,
    /// The two specs compared by the cross-exponent check.
    pub cross: [SpaceSpec; 2],
    pub derivative: DerivativeConfig,
    pub corpus: CorpusSpec,
    pub lemmas: LemmaConfig,
    pub seed: u64,
    pub thresholds: Thresholds,
    /// Heideman exponent.
    pub decay_n: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid: GridConfig::default(),
            domain_file: None,
            domain: DomainFile {
                dim: Some(1),
                threshold: Some(0.0),
                ..Default::default()
            },
            family: FamilyConfig::default(),
            specs: default_spec_matrix(),
            cross: [
                SpaceSpec::new(NormKind::F, 2.0, 2.0, 0.5, 0.5).expect("valid spec"),
                SpaceSpec::new(NormKind::F, 4.0, 2.0, 0.5, 0.25).expect("valid spec"),
            ],
            derivative: DerivativeConfig::default(),
            corpus: CorpusSpec::default(),
            lemmas: LemmaConfig::default(),
            seed: 42,
            thresholds: Thresholds::default(),
            decay_n: 3.0,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: RunConfig = lpchar::io::read_json(path)?;
        if let Some(d) = &cfg.domain_file {
            if d.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                cfg.domain_file = Some(base.join(d));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for s in self.specs.iter().chain(&self.cross).chain([&self.derivative.spec]) {
            s.validate().with_context(|| format!("space spec {}", s.label()))?;
        }
        let t = &self.thresholds;
        for (name, v) in [
            ("stability_lo", t.stability_lo),
            ("stability_hi", t.stability_hi),
            ("identity", t.identity),
            ("reproduction", t.reproduction),
            ("decay_slack", t.decay_slack),
        ] {
            if !(v > 0.0) {
                bail!("threshold {name} must be positive");
            }
        }
        if t.stability_lo > t.stability_hi {
            bail!("stability_lo exceeds stability_hi");
        }
        if self.derivative.orders.contains(&0) {
            bail!("derivative orders must be at least 1");
        }
        if let Some(n) = self.family.n {
            if !(n > 0.0) {
                bail!("Peetre exponent must be positive");
            }
        }
        self.make_grid()?;
        self.load_domain()?;
        Ok(())
    }

    pub fn make_grid(&self) -> Result<Grid> {
        Ok(make_grid(self.grid.dim, self.grid.half_extent, self.grid.level)?)
    }

    pub fn load_domain(&self) -> Result<LipschitzDomain> {
        let d = match &self.domain_file {
            Some(p) => lpchar::io::read_domain(p)?,
            None => LipschitzDomain::from_file(&self.domain)?,
        };
        if d.dim() != self.grid.dim {
            bail!("domain dimension {} differs from grid dimension {}", d.dim(), self.grid.dim);
        }
        Ok(d)
    }
}
