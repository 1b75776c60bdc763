//! Resolution-paired checks behind `verify` and `report`.

use anyhow::Result;
use lpchar::domain::Mask;
use lpchar::norms::peetre_bound;
use lpchar::verify::{
    corpus_pointwise_checks, corpus_spec_checks, cross_spec_ratio, report_thm1, report_thm2, Corpus, RatioReport,
};
use lpchar::{
    bandlimited_family, corpus_generate, dual_family, extend, heideman_decay, make_base_kernel, make_grid,
    scale_family, truncation_tail, Family, Field, Grid, LipschitzDomain, OperatorSpec,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Pass,
    Fail,
    /// Reported without a threshold.
    Info,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    pub criterion: String,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, value: Option<f64>, criterion: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            outcome: if pass { Outcome::Pass } else { Outcome::Fail },
            value,
            criterion: criterion.into(),
        }
    }

    fn info(name: impl Into<String>, value: Option<f64>, criterion: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            outcome: Outcome::Info,
            value,
            criterion: criterion.into(),
        }
    }
}

pub struct Section {
    pub name: &'static str,
    pub checks: Vec<Check>,
    pub data: Value,
    pub reports: Vec<RatioReport>,
}

/// Grid, mask, families and corpus at one resolution.
pub struct Level {
    pub grid: Grid,
    pub mask: Mask,
    pub phi: Family,
    pub psi: Family,
    pub corpus: Corpus<f64>,
}

impl Level {
    pub fn new(cfg: &RunConfig, domain: &LipschitzDomain, level: u32, j_max: usize) -> Result<Self> {
        let grid = make_grid(cfg.grid.dim, cfg.grid.half_extent, level)?;
        let mask = domain.mask(&grid)?;
        let base = make_base_kernel(domain, cfg.family.moments, &grid)?;
        let phi = scale_family::<f64>(&base, &grid, j_max)?;
        let psi = dual_family(&phi)?;
        let corpus = corpus_generate(&cfg.corpus, &grid, cfg.seed)?;
        Ok(Level {
            grid,
            mask,
            phi,
            psi,
            corpus,
        })
    }
}

/// The configured resolution and its refinement.
pub fn level_pair(cfg: &RunConfig, domain: &LipschitzDomain) -> Result<[Level; 2]> {
    let r = cfg.grid.level;
    let j = cfg.family.j_max;
    Ok([Level::new(cfg, domain, r, j)?, Level::new(cfg, domain, r + 1, j)?])
}

fn stable_check(name: String, coarse: &RatioReport, fine: &RatioReport, cfg: &RunConfig, criterion: &str) -> Check {
    let t = &cfg.thresholds;
    let pass = coarse.is_finite() && fine.passes(t.stability_lo, t.stability_hi) && fine.stability.is_some();
    Check::new(name, pass, fine.stability, criterion)
}

pub fn thm1(cfg: &RunConfig, levels: &[Level; 2]) -> Result<Section> {
    let mut checks = Vec::new();
    let mut data = Vec::new();
    let mut reports = Vec::new();
    for spec in &cfg.specs {
        let mut out = Vec::new();
        for l in levels {
            let lam = bandlimited_family::<f64>(cfg.family.j_max, &l.grid)?;
            out.push(report_thm1(&l.corpus, &l.mask, spec, &l.phi, &l.psi, &lam)?);
        }
        let coarse = out.remove(0);
        let mut fine = out.remove(0);
        fine.set_stability(&coarse);
        let label = spec.label();
        checks.push(stable_check(format!("thm1 up {label}"), &coarse.up, &fine.up, cfg, "finite, stable"));
        checks.push(stable_check(
            format!("thm1 down {label}"),
            &coarse.down,
            &fine.down,
            cfg,
            "finite, stable",
        ));
        reports.push(fine.up.clone());
        reports.push(fine.down.clone());
        data.push(fine);
    }
    let [a, b] = &cfg.cross;
    let c0 = cross_spec_ratio(&levels[0].corpus, &levels[0].mask, a, b, &levels[0].phi)?;
    let mut c1 = cross_spec_ratio(&levels[1].corpus, &levels[1].mask, a, b, &levels[1].phi)?;
    c1.set_stability(&c0);
    checks.push(stable_check(
        format!("cross {} / {}", a.label(), b.label()),
        &c0,
        &c1,
        cfg,
        "finite, stable",
    ));
    reports.push(c1.clone());
    Ok(Section {
        name: "thm1",
        checks,
        data: json!({ "sandwich": data, "cross": c1 }),
        reports,
    })
}

/// Reproduction on the domain and independence from exterior values, at the
/// refined grid with `extension_j_max` levels.
pub fn extension(cfg: &RunConfig, domain: &LipschitzDomain, j_max: usize) -> Result<Section> {
    let l = Level::new(cfg, domain, cfg.grid.level + 1, j_max)?;
    let h = l.grid.spacing();
    let mut worst = 0.0f64;
    let mut exact = true;
    let mut tail_worst = 0.0f64;
    let mut rows = Vec::new();
    let op = OperatorSpec {
        eta: &l.psi,
        theta: &l.phi,
        gamma: 0.0,
    };
    for m in l.corpus.bandlimited().members {
        let e = extend(&m.field, &l.mask, &l.phi, &l.psi)?;
        let sup = m.field.max_abs();
        let mut err = 0.0f64;
        for i in 0..l.grid.len() {
            if l.mask.contains(i) && interior(&l.grid, domain, i, 4.0 * h) {
                err = err.max((e.values()[i] - m.field.values()[i]).abs());
            }
        }
        let rel = err / sup;
        worst = worst.max(rel);
        let tail = truncation_tail(&m.field, &l.mask, &op)?;
        tail_worst = tail_worst.max(tail.estimate / sup);
        let junk = Field::from_fn(l.grid, |x| (7.0 * x.iter().sum::<f64>()).sin());
        let g = Field::new(
            l.grid,
            (0..l.grid.len())
                .map(|i| {
                    if l.mask.contains(i) {
                        m.field.values()[i]
                    } else {
                        junk.values()[i]
                    }
                })
                .collect(),
        )?;
        let same = extend(&g, &l.mask, &l.phi, &l.psi)?.values() == e.values();
        exact &= same;
        rows.push(json!({
            "member": m.name,
            "relative_error": rel,
            "exterior_independent": same,
            "tail": tail,
        }));
    }
    let checks = vec![
        Check::new(
            format!("extension reproduction J_max={j_max}"),
            worst <= cfg.thresholds.reproduction,
            Some(worst),
            format!("<= {:e}", cfg.thresholds.reproduction),
        ),
        Check::new("extension exterior independence", exact, None, "bit-identical"),
        Check::info("extension truncation tail", Some(tail_worst), "relative to the sup norm"),
    ];
    Ok(Section {
        name: "extension",
        checks,
        data: json!({ "level": l.grid.level(), "J_max": j_max, "members": rows }),
        reports: Vec::new(),
    })
}

/// Samples at distance more than `margin` inside the domain.
fn interior(grid: &Grid, domain: &LipschitzDomain, i: usize, margin: f64) -> bool {
    let p = grid.point(i);
    let n = grid.dim();
    let mut q = p;
    q[n - 1] -= margin * (1.0 + domain.lip_const());
    domain.contains(&q[..n])
}

pub fn thm2(cfg: &RunConfig, levels: &[Level; 2], pure_probe: bool) -> Result<Section> {
    let mut checks = Vec::new();
    let mut data = Vec::new();
    let mut reports = Vec::new();
    let spec = &cfg.derivative.spec;
    for &m in &cfg.derivative.orders {
        let mut out = Vec::new();
        for l in levels {
            out.push(report_thm2(&l.corpus, &l.mask, spec, m, &l.phi, &l.psi, pure_probe)?);
        }
        let coarse = out.remove(0);
        let mut fine = out.remove(0);
        fine.set_stability(&coarse);
        let t = &cfg.thresholds;
        let lower = fine.ratio.min_ratio.unwrap_or(0.0).min(coarse.ratio.min_ratio.unwrap_or(0.0));
        let mut c = stable_check(format!("thm2 m={m} ratio"), &coarse.ratio, &fine.ratio, cfg, "finite, stable, min > 0");
        if !(lower > 0.0) {
            c.outcome = Outcome::Fail;
        }
        checks.push(c);
        let id = fine.max_identity.max(coarse.max_identity);
        checks.push(Check::new(
            format!("thm2 m={m} identity"),
            id <= t.identity,
            Some(id),
            format!("<= {:e}", t.identity),
        ));
        if let Some(p) = &fine.pure {
            checks.push(Check::info(format!("thm2 m={m} pure-derivative probe"), p.max_ratio, "no threshold"));
            reports.push(p.clone());
        }
        reports.push(fine.ratio.clone());
        data.push(fine);
    }
    Ok(Section {
        name: "thm2",
        checks,
        data: json!(data),
        reports,
    })
}

pub fn lemmas(cfg: &RunConfig, levels: &[Level; 2]) -> Result<Section> {
    let mut checks = Vec::new();
    let mut data = Vec::new();
    let mut reports = Vec::new();
    let dim = levels[0].grid.dim();
    for spec in &cfg.specs {
        let mut out = Vec::new();
        for l in levels {
            out.push(corpus_spec_checks(&l.corpus, &l.mask, spec, &l.phi, &l.psi, &cfg.lemmas)?);
        }
        let (a0, p0) = out.remove(0);
        let (mut a1, mut p1) = out.remove(0);
        a1.set_stability(&a0);
        p1.set_stability(&p0);
        let label = spec.label();
        checks.push(stable_check(format!("asum {label}"), &a0, &a1, cfg, "finite, stable"));
        let bound = peetre_bound(spec, dim);
        let n = cfg.lemmas.peetre_n.unwrap_or(bound + cfg.lemmas.peetre_margin);
        let mut c = stable_check(format!("peetre_bound {label} N={n}"), &p0, &p1, cfg, "finite, stable");
        if n <= bound {
            c.outcome = Outcome::Info;
            c.criterion = format!("probe below bound {bound}");
        }
        checks.push(c);
        reports.push(a1.clone());
        reports.push(p1.clone());
        data.push(json!({ "spec": spec, "asum": a1, "peetre_bound": p1, "N": n }));
    }
    let mut out = Vec::new();
    for l in levels {
        out.push(corpus_pointwise_checks(&l.corpus, &l.mask, &l.phi, &l.psi, &cfg.lemmas)?);
    }
    let (s0, h0) = out.remove(0);
    let (mut s1, mut h1) = out.remove(0);
    s1.set_stability(&s0);
    h1.set_stability(&h0);
    checks.push(stable_check("stinq".into(), &s0, &s1, cfg, "finite, stable"));
    checks.push(stable_check("pee_to_hl".into(), &h0, &h1, cfg, "finite, stable"));
    reports.push(s1.clone());
    reports.push(h1.clone());
    let l = &levels[0];
    let table = heideman_decay(&l.phi, &l.phi, cfg.decay_n)?;
    let need = -((cfg.decay_n.min(cfg.family.moments as f64 + 1.0)) - cfg.thresholds.decay_slack);
    checks.push(Check::new(
        format!("heideman slope N={}", cfg.decay_n),
        table.slope <= need,
        Some(table.slope),
        format!("<= {need}"),
    ));
    Ok(Section {
        name: "lemmas",
        checks,
        data: json!({ "specs": data, "stinq": s1, "pee_to_hl": h1, "decay": table }),
        reports,
    })
}
