//! Command-line front end: family construction, corpus generation, analysis,
//! extension and the verification reports.

pub mod config;
pub mod suite;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lpchar::domain::Mask;
use lpchar::io::{self, read_field, read_pyramid, write_field, write_json, write_pyramid};
use lpchar::norms::{default_cube_range, intrinsic_pyramid, seq_norm, NormKind, SpaceSpec};
use lpchar::verify::{corpus_generate, RatioReport};
use lpchar::{apply_t, dual_family, extend, make_base_kernel, make_grid, scale_family, Field, OperatorSpec};
use serde_json::json;

use crate::config::RunConfig;
use crate::suite::{Check, Outcome, Section};

#[derive(Debug, Parser)]
#[command(name = "lpchar", version, about = "Littlewood-Paley norms on special Lipschitz domains")]
struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file or directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Corpus seed, overriding the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Grid level, overriding the configuration.
    #[arg(long, global = true)]
    grid_level: Option<u32>,
    /// Peetre exponent for the Peetre-bound check; values at or below the
    /// bound are reported without a threshold.
    #[arg(long = "probe-N", global = true)]
    probe_n: Option<f64>,
    /// Also report the ratio with pure derivatives only.
    #[arg(long, global = true)]
    pure_derivative_probe: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    #[command(subcommand)]
    Family(FamilyCmd),
    #[command(subcommand)]
    Corpus(CorpusCmd),
    #[command(subcommand)]
    Analyze(AnalyzeCmd),
    /// Extension of a field from the domain.
    Extend(ExtendArgs),
    /// `sum_j 2^{j gamma} eta_j * (1_Ω (theta_j * f))`.
    ApplyT(ApplyTArgs),
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Every verification section in one report.
    Report(DomainArg),
}

#[derive(Debug, Subcommand)]
enum FamilyCmd {
    /// Builds a cone family and writes a `.lpfam` directory.
    Build(FamilyBuild),
}

#[derive(Debug, Args)]
struct FamilyBuild {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    moments: usize,
    #[arg(long)]
    levels: usize,
    #[arg(long, default_value_t = 4.0)]
    half_extent: f64,
}

#[derive(Debug, Subcommand)]
enum CorpusCmd {
    /// Writes the corpus members as `.lpf` files.
    Generate(DomainArg),
}

#[derive(Debug, Args)]
struct DomainArg {
    #[arg(long)]
    domain: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum AnalyzeCmd {
    /// Intrinsic pyramid of a field under a stored family.
    Pyramid {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        family: PathBuf,
    },
    /// Sequence norm of a stored pyramid.
    Norm(NormArgs),
}

#[derive(Debug, Args)]
struct NormArgs {
    #[arg(long)]
    pyramid: PathBuf,
    #[arg(long)]
    mask: PathBuf,
    #[arg(long)]
    kind: NormKind,
    #[arg(long, value_parser = parse_exponent)]
    p: f64,
    #[arg(long, value_parser = parse_exponent)]
    q: f64,
    #[arg(long, allow_hyphen_values = true)]
    s: f64,
    #[arg(long, default_value_t = 0.0)]
    tau: f64,
    #[arg(long, allow_hyphen_values = true)]
    jmin: Option<i32>,
    #[arg(long, allow_hyphen_values = true)]
    jmaxcube: Option<i32>,
}

#[derive(Debug, Args)]
struct ExtendArgs {
    #[arg(long)]
    field: PathBuf,
    #[arg(long)]
    mask: PathBuf,
    #[arg(long)]
    family: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Which {
    Phi,
    Psi,
}

#[derive(Debug, Args)]
struct ApplyTArgs {
    #[arg(long)]
    field: PathBuf,
    #[arg(long)]
    mask: PathBuf,
    #[arg(long)]
    family: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    gamma: f64,
    #[arg(long, value_enum, default_value_t = Which::Psi)]
    eta: Which,
    #[arg(long, value_enum, default_value_t = Which::Phi)]
    theta: Which,
}

#[derive(Debug, Subcommand)]
enum VerifyCmd {
    Thm1(DomainArg),
    Thm2(DomainArg),
    Lemmas(DomainArg),
}

fn parse_exponent(s: &str) -> std::result::Result<f64, String> {
    match s {
        "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        _ => s.parse::<f64>().map_err(|e| e.to_string()),
    }
}

/// Usage or input errors map to exit code 2, failed thresholds to 1.
enum Exit {
    Ok,
    Failed,
}

/// Runs the command line `argv` (without the program name) and returns the exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = std::iter::once("lpchar".to_string())
        .chain(argv.into_iter().map(Into::into))
        .collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(Exit::Ok) => 0,
        Ok(Exit::Failed) => 1,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

fn load_config(cli: &Cli, domain: Option<&PathBuf>) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p).with_context(|| format!("reading config {}", p.display()))?,
        None => RunConfig::default(),
    };
    if let Some(d) = domain {
        cfg.domain_file = Some(d.clone());
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(r) = cli.grid_level {
        cfg.grid.level = r;
    }
    if let Some(n) = cli.probe_n {
        cfg.lemmas.peetre_n = Some(n);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_path(cli: &Cli, default: &str) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn dispatch(cli: &Cli) -> Result<Exit> {
    match &cli.command {
        Command::Family(FamilyCmd::Build(a)) => family_build(cli, a),
        Command::Corpus(CorpusCmd::Generate(d)) => corpus_gen(cli, d),
        Command::Analyze(AnalyzeCmd::Pyramid { field, family }) => analyze_pyramid(cli, field, family),
        Command::Analyze(AnalyzeCmd::Norm(a)) => analyze_norm(cli, a),
        Command::Extend(a) => extend_cmd(cli, a),
        Command::ApplyT(a) => apply_t_cmd(cli, a),
        Command::Verify(v) => {
            let (sections, d): (&[&str], &DomainArg) = match v {
                VerifyCmd::Thm1(d) => (&["thm1"], d),
                VerifyCmd::Thm2(d) => (&["thm2"], d),
                VerifyCmd::Lemmas(d) => (&["lemmas"], d),
            };
            verify(cli, d, sections)
        }
        Command::Report(d) => verify(cli, d, &["lemmas", "thm1", "extension", "thm2"]),
    }
}

fn family_build(cli: &Cli, a: &FamilyBuild) -> Result<Exit> {
    let domain = io::read_domain(&a.domain)?;
    let level = cli.grid_level.unwrap_or(10);
    let grid = make_grid(domain.dim(), a.half_extent, level)?;
    let base = make_base_kernel(&domain, a.moments, &grid)?;
    let fam = scale_family::<f64>(&base, &grid, a.levels)?;
    let dir = out_path(cli, "family.lpfam");
    let m = io::write_family(&dir, &fam, &domain)?;
    write_field(&dir.join("mask.lpf"), &domain.mask(&grid)?.to_field::<f64>())?;
    println!(
        "family: {} kernels, M={}, knot {}, condition {:.3e} -> {}",
        m.kernels.len(),
        m.moment_order,
        base.knot(),
        base.condition(),
        dir.display()
    );
    Ok(Exit::Ok)
}

fn corpus_gen(cli: &Cli, d: &DomainArg) -> Result<Exit> {
    let cfg = load_config(cli, d.domain.as_ref())?;
    let grid = cfg.make_grid()?;
    let corpus = corpus_generate::<f64>(&cfg.corpus, &grid, cfg.seed)?;
    let dir = out_path(cli, "corpus");
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut list = Vec::new();
    for m in &corpus.members {
        let file = format!("{}.lpf", m.name);
        write_field(&dir.join(&file), &m.field)?;
        list.push(json!({ "name": m.name, "file": file, "member": m.kind }));
    }
    let domain = cfg.load_domain()?;
    write_field(&dir.join("mask.lpf"), &domain.mask(&grid)?.to_field::<f64>())?;
    write_json(
        &dir.join("corpus.json"),
        &json!({ "seed": cfg.seed, "grid": io::GridSpec::of(&grid), "members": list }),
    )?;
    println!("corpus: {} members -> {}", corpus.len(), dir.display());
    Ok(Exit::Ok)
}

fn analyze_pyramid(cli: &Cli, field: &Path, family: &Path) -> Result<Exit> {
    let f: Field = read_field(field)?;
    let (domain, phi, _) = io::load_family::<f64>(family)?;
    let mask = domain.mask(f.grid())?;
    let pyr = intrinsic_pyramid(&f, &mask, &phi)?;
    let dir = out_path(cli, "pyramid");
    write_pyramid(&dir, &pyr)?;
    println!("pyramid: {} levels -> {}", pyr.levels().len(), dir.display());
    Ok(Exit::Ok)
}

fn analyze_norm(cli: &Cli, a: &NormArgs) -> Result<Exit> {
    let pyr = read_pyramid::<f64>(&a.pyramid)?;
    let mask = Mask::from_field(&read_field::<f64>(&a.mask)?)?;
    let spec = SpaceSpec::new(a.kind, a.p, a.q, a.s, a.tau)?;
    let (j0, j1) = default_cube_range(pyr.grid());
    let res = seq_norm(&pyr, &mask, &spec, (a.jmin.unwrap_or(j0), a.jmaxcube.unwrap_or(j1)))?;
    let out = out_path(cli, "result.json");
    write_json(&out, &json!({ "spec": spec, "result": res }))?;
    println!("{} = {:.12e}", spec.label(), res.value);
    if let Some(w) = &res.warning {
        println!("warning: {w}");
    }
    Ok(Exit::Ok)
}

fn load_masked(field: &Path, mask: &Path, family: &Path) -> Result<(Field, Mask, lpchar::Family)> {
    let f: Field = read_field(field)?;
    let mask = Mask::from_field(&read_field::<f64>(mask)?)?;
    let (_, phi, _) = io::load_family::<f64>(family)?;
    if phi.workspace().grid() != f.grid() {
        bail!("family grid differs from the field grid");
    }
    Ok((f, mask, phi))
}

fn extend_cmd(cli: &Cli, a: &ExtendArgs) -> Result<Exit> {
    let (f, mask, phi) = load_masked(&a.field, &a.mask, &a.family)?;
    let psi = dual_family(&phi)?;
    let e = extend(&f, &mask, &phi, &psi)?;
    let out = out_path(cli, "extended.lpf");
    write_field(&out, &e)?;
    println!("extension -> {}", out.display());
    Ok(Exit::Ok)
}

fn apply_t_cmd(cli: &Cli, a: &ApplyTArgs) -> Result<Exit> {
    let (f, mask, phi) = load_masked(&a.field, &a.mask, &a.family)?;
    let psi = dual_family(&phi)?;
    let pick = |w: Which| match w {
        Which::Phi => &phi,
        Which::Psi => &psi,
    };
    let spec = OperatorSpec {
        eta: pick(a.eta),
        theta: pick(a.theta),
        gamma: a.gamma,
    };
    let t = apply_t(&f, &mask, &spec)?;
    let out = out_path(cli, "applied.lpf");
    write_field(&out, &t)?;
    println!("T f -> {}", out.display());
    Ok(Exit::Ok)
}

/// `report.json`, `report.csv` and `report.meta.json` for a file target;
/// the same names inside a directory target.
fn report_paths(out: &Path) -> (PathBuf, PathBuf, PathBuf) {
    if out.extension().is_some_and(|e| e == "json") {
        (
            out.to_path_buf(),
            out.with_extension("csv"),
            out.with_extension("meta.json"),
        )
    } else {
        (
            out.join("report.json"),
            out.join("report.csv"),
            out.join("report.meta.json"),
        )
    }
}

fn csv_of(reports: &[RatioReport]) -> String {
    let mut out = String::from("check,member,lhs,rhs,ratio,status\n");
    for r in reports {
        out.extend(r.to_csv().lines().skip(1).map(|l| format!("{l}\n")));
    }
    out
}

fn verify(cli: &Cli, d: &DomainArg, which: &[&str]) -> Result<Exit> {
    let start = Instant::now();
    let cfg = load_config(cli, d.domain.as_ref())?;
    let domain = cfg.load_domain()?;
    let levels = suite::level_pair(&cfg, &domain)?;
    let mut sections: Vec<Section> = Vec::new();
    for w in which {
        sections.push(match *w {
            "thm1" => suite::thm1(&cfg, &levels)?,
            "thm2" => suite::thm2(&cfg, &levels, cli.pure_derivative_probe)?,
            "lemmas" => suite::lemmas(&cfg, &levels)?,
            "extension" => suite::extension(&cfg, &domain, cfg.family.j_max + 1)?,
            other => return Err(anyhow!("unknown section {other}")),
        });
    }
    let checks: Vec<&Check> = sections.iter().flat_map(|s| &s.checks).collect();
    let passed = checks.iter().all(|c| c.outcome != Outcome::Fail);
    let mut body = serde_json::Map::new();
    for s in &sections {
        body.insert(s.name.to_string(), s.data.clone());
    }
    let report = json!({
        "command": which.join("+"),
        "config": cfg,
        "grid_levels": [cfg.grid.level, cfg.grid.level + 1],
        "passed": passed,
        "checks": checks,
        "sections": body,
    });
    let out = out_path(cli, "report");
    if out.extension().is_none() {
        fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    }
    let (rpath, cpath, mpath) = report_paths(&out);
    write_json(&rpath, &report)?;
    let reports: Vec<RatioReport> = sections.iter().flat_map(|s| s.reports.clone()).collect();
    fs::write(&cpath, csv_of(&reports)).with_context(|| format!("writing {}", cpath.display()))?;
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    write_json(
        &mpath,
        &json!({
            "timestamp_unix": stamp,
            "elapsed_seconds": start.elapsed().as_secs_f64(),
            "workers": rayon::current_num_threads(),
            "version": env!("CARGO_PKG_VERSION"),
        }),
    )?;
    for c in &checks {
        let tag = match c.outcome {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Info => "INFO",
        };
        let v = c.value.map(|v| format!("{v:.6e}")).unwrap_or_else(|| "-".into());
        println!("{tag} {:<48} {v:>14}  {}", c.name, c.criterion);
    }
    println!("report -> {}", rpath.display());
    Ok(if passed { Exit::Ok } else { Exit::Failed })
}
