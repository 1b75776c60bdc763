//! One line per acceptance criterion. Run with `cargo test --test acceptance`.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::fs;
use std::time::Instant;

use common::{direct_convolve_at, half_space_family, oracle_seq_norm};
use lpchar::domain::Mask;
use lpchar::norms::{seq_norm_levels, NormKind, SpaceSpec};
use lpchar::transform::{peetre_at, peetre_field};
use lpchar::{
    convolve, convolve_pyramid, corpus_generate, default_cube_range, dual_family, make_grid, CorpusSpec, Field,
};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const MOMENT_TOL: f64 = 1e-10;
const TELESCOPE_TOL: f64 = 1e-12;
const FOURIER_TOL: f64 = 1e-12;
const IDENTITY_TOL: f64 = 1e-6;
const CONV_TOL: f64 = 1e-9;
const NORM_TOL: f64 = 1e-12;
const MORREY_TOL: f64 = 1e-12;
const INSTANCES: usize = 200;

/// Criteria left red with the reason recorded alongside the design notes.
/// Criterion 2 asks for an absolute per-frequency error of 1e-12, but the
/// summands reach |Phi^|^4 ~ 1e9 so double rounding alone is ~1e-7.
const KNOWN_RED: &[usize] = &[2];

struct Line {
    id: usize,
    pass: bool,
    text: String,
}

fn line(id: usize, pass: bool, text: String) -> Line {
    println!("criterion {id:>2} {} {text}", if pass { "PASS" } else { "FAIL" });
    Line { id, pass, text }
}

fn family_construction() -> Line {
    let (_, domain, phi) = half_space_family(1, 4.0, 10, 6, 6);
    let h = phi.workspace().grid().spacing();
    let mut moment = 0.0f64;
    for j in 1..=6 {
        let s = phi.kernel(j).unwrap().samples();
        for a in 0..=6 {
            let (mut sum, mut abs) = (0.0, 0.0);
            for (o, v) in s.iter() {
                let t = (o[0] as f64 * h).powi(a) * v * h;
                sum += t;
                abs += t.abs();
            }
            moment = moment.max(sum.abs() / abs);
        }
    }
    let mut outside = 0;
    let mut scaling = true;
    let one = phi.kernel(1).unwrap().samples();
    for (j, k) in phi.kernels().iter().enumerate() {
        for (o, v) in k.samples().iter() {
            if v != 0.0 && !domain.in_cone(&[o[0] as f64 * h]) {
                outside += 1;
            }
            if j >= 2 {
                let s = 1i64 << (j - 1);
                scaling &= v == s as f64 * one.get([o[0] * s, 0]);
            }
        }
    }
    let mut tele = 0.0f64;
    for big_j in 0..=6 {
        let part = phi.partial_sum_kernel(big_j).unwrap();
        let ps = part.samples();
        let sup = ps.iter().fold(0.0f64, |m, (_, v)| m.max(v.abs()));
        for (o, v) in ps.iter() {
            let s: f64 = (0..=big_j).map(|j| phi.kernel(j).unwrap().samples().get(o)).sum();
            tele = tele.max((s - v).abs() / sup);
        }
    }
    let pass = moment <= MOMENT_TOL && outside == 0 && scaling && tele <= TELESCOPE_TOL;
    line(
        1,
        pass,
        format!(
            "moments {moment:.2e} <= {MOMENT_TOL:e}; samples outside cone {outside}; scaling exact {scaling}; telescoping {tele:.2e} <= {TELESCOPE_TOL:e} (relative to sup)"
        ),
    )
}

fn dual_family_check() -> Line {
    let (grid, _, phi) = half_space_family(1, 4.0, 10, 6, 6);
    let psi = dual_family(&phi).unwrap();
    let one = Complex::new(1.0, 0.0);
    let (mut abs, mut rel) = (0.0f64, 0.0f64);
    for big_j in 0..=6 {
        let part = phi.partial_sum_kernel(big_j).unwrap();
        let ph = part.spectrum();
        let terms: Vec<_> = (0..=big_j)
            .map(|j| (psi.kernel(j).unwrap().spectrum(), phi.kernel(j).unwrap().spectrum()))
            .collect();
        for k in 0..ph.len() {
            let mut sum = Complex::new(0.0, 0.0);
            let mut mag = 0.0f64;
            for (a, b) in &terms {
                sum += a[k] * b[k];
                mag += (a[k] * b[k]).norm();
            }
            let w = one - (one - ph[k] * ph[k]) * (one - ph[k] * ph[k]);
            let e = (sum - w).norm();
            abs = abs.max(e);
            rel = rel.max(e / mag.max(1.0));
        }
    }
    let corpus = corpus_generate::<f64>(&CorpusSpec::default(), &grid, 42).unwrap();
    let mut ident = 0.0f64;
    for m in corpus.bandlimited().members {
        let pyr = convolve_pyramid(&m.field, &phi).unwrap();
        let mut acc = Field::zeros(grid);
        for j in 0..phi.j_max() {
            acc = acc.add(&convolve(&pyr.levels()[j], psi.kernel(j).unwrap()).unwrap()).unwrap();
        }
        ident = ident.max(acc.sub(&m.field).unwrap().max_abs() / m.field.max_abs());
    }
    line(
        2,
        abs <= FOURIER_TOL && ident <= IDENTITY_TOL,
        format!(
            "Fourier telescoping abs {abs:.2e} <= {FOURIER_TOL:e} (relative to summands {rel:.2e}); identity at J_max-1 {ident:.2e} <= {IDENTITY_TOL:e}"
        ),
    )
}

fn convolution() -> Line {
    let (grid, _, phi) = half_space_family(1, 2.0, 6, 4, 3);
    let psi = dual_family(&phi).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = Field::new(grid, (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    let mut conv = 0.0f64;
    for k in phi.kernels().iter().chain(psi.kernels()) {
        let fast = convolve(&f, k).unwrap();
        for i in 0..grid.len() {
            conv = conv.max((fast.values()[i] - direct_convolve_at(&f, k, i)).abs());
        }
    }
    let mut mismatches = 0;
    for dim in [1, 2] {
        let g = make_grid(dim, 1.0, 5).unwrap();
        let f = Field::new(g, (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let mask = Mask::from_bools(&g, (0..g.len()).map(|i| g.point(i)[dim - 1] > 0.1).collect()).unwrap();
        for (n, j) in [(1.5, 0), (3.0, 2), (7.25, 4)] {
            let fast = peetre_field(&f, &mask, n, j).unwrap();
            for i in 0..g.len() {
                let x = g.point(i);
                if fast.values()[i] != peetre_at(&f, &mask, n, j, &x[..dim]).unwrap() {
                    mismatches += 1;
                }
            }
        }
    }
    line(
        3,
        conv <= CONV_TOL && mismatches == 0,
        format!("FFT vs direct {conv:.2e} <= {CONV_TOL:e} on 257 points; Peetre mismatches {mismatches} on 65-point grids"),
    )
}

fn norm_oracle() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let exps = [0.5, 1.0, 2.0, f64::INFINITY];
    let mut combos = Vec::new();
    for kind in [NormKind::B, NormKind::F, NormKind::N] {
        for &p in &exps {
            if kind == NormKind::F && p.is_infinite() {
                continue;
            }
            for &q in &exps {
                for tau in [0.0, 0.25, 1.0 / p] {
                    combos.push((kind, p, q, tau));
                }
            }
        }
    }
    let mut worst = 0.0f64;
    for n in 0..INSTANCES {
        let (kind, p, q, tau) = combos[n % combos.len()];
        let dim = if n % 5 == 4 { 2 } else { 1 };
        let g = if dim == 1 { make_grid(1, 1.0, rng.gen_range(4..=6)).unwrap() } else { make_grid(2, 1.0, 4).unwrap() };
        let levels: Vec<Field> = (0..rng.gen_range(1..=4))
            .map(|_| Field::new(g, (0..g.len()).map(|_| rng.gen_range(-3.0..3.0)).collect()).unwrap())
            .collect();
        let t: f64 = rng.gen_range(-0.5..0.5);
        let mask = Mask::from_bools(&g, (0..g.len()).map(|i| g.point(i)[dim - 1] > t).collect()).unwrap();
        let spec = SpaceSpec::new(kind, p, q, rng.gen_range(-1.0..1.0), tau).unwrap();
        let range = default_cube_range(&g);
        let got = seq_norm_levels(&levels, &mask, &spec, range).unwrap().value;
        let want = oracle_seq_norm(&levels, &mask, &spec, range);
        worst = worst.max((got - want).abs() / want.max(f64::MIN_POSITIVE));
    }
    line(4, worst <= NORM_TOL, format!("{INSTANCES} instances, worst relative {worst:.2e} <= {NORM_TOL:e}"))
}

fn morrey_endpoint() -> Line {
    let mut worst = 0.0f64;
    for dim in [1, 2] {
        let g = make_grid(dim, 2.0, if dim == 1 { 8 } else { 5 }).unwrap();
        for (p, c) in [(1.0, 0.3), (2.0, 1.75), (4.0, 12.5)] {
            let spec = SpaceSpec::new(NormKind::N, p, 2.0, 0.0, 1.0 / p).unwrap();
            let f = Field::from_fn(g, |_| c);
            let v = seq_norm_levels(&[f], &Mask::full(&g), &spec, default_cube_range(&g)).unwrap().value;
            worst = worst.max((v - c).abs() / c);
        }
    }
    line(5, worst <= MORREY_TOL, format!("constant fields, worst relative {worst:.2e} <= {MORREY_TOL:e}"))
}

fn report_checks(report: &Value) -> Vec<(String, String, Option<f64>)> {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| {
            (
                c["name"].as_str().unwrap().to_string(),
                c["outcome"].as_str().unwrap().to_string(),
                c["value"].as_f64(),
            )
        })
        .collect()
}

fn from_report(id: usize, checks: &[(String, String, Option<f64>)], prefixes: &[&str], what: &str) -> Line {
    let picked: Vec<_> = checks
        .iter()
        .filter(|c| prefixes.iter().any(|p| c.0.starts_with(p)))
        .collect();
    let pass = !picked.is_empty() && picked.iter().all(|c| c.1 == "pass");
    let detail: Vec<String> = picked
        .iter()
        .map(|c| match c.2 {
            Some(v) => format!("{}={v:.4}", c.0),
            None => format!("{}={}", c.0, c.1),
        })
        .collect();
    line(id, pass, format!("{what}: {} checks; {}", picked.len(), detail.join(", ")))
}

fn main() {
    let start = Instant::now();
    let mut lines = vec![family_construction(), dual_family_check(), convolution(), norm_oracle(), morrey_endpoint()];

    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<(i32, Value, Vec<u8>)> = ["1", "4"]
        .iter()
        .map(|w| {
            let out = dir.path().join(format!("w{w}"));
            let args = ["report", "--workers", w, "--out", out.to_str().unwrap()];
            let code = lpchar_cli::run(args.iter().map(|s| s.to_string()));
            let json = fs::read(out.join("report.json")).unwrap();
            let csv = fs::read(out.join("report.csv")).unwrap();
            let v: Value = serde_json::from_slice(&json).unwrap();
            (code, v, [json, csv].concat())
        })
        .collect();
    let checks = report_checks(&runs[0].1);
    lines.push(from_report(6, &checks, &["asum", "peetre_bound", "stinq", "pee_to_hl"], "stability factors in [0.5, 2]"));
    lines.push(from_report(7, &checks, &["heideman"], "fitted slope <= -2.5"));
    lines.push(from_report(8, &checks, &["extension reproduction", "extension exterior", "thm1 down"], "reproduction <= 1e-5, exterior, boundedness stability"));
    lines.push(from_report(9, &checks, &["thm1", "cross"], "sandwich and cross-exponent stability"));
    lines.push(from_report(10, &checks, &["thm2"], "ratio stability, identity <= 1e-5"));
    let same = runs[0].2 == runs[1].2;
    lines.push(line(
        11,
        same && runs[0].0 == runs[1].0,
        format!("report.json and report.csv byte-identical for 1 and 4 workers: {same}; exit codes {} {}", runs[0].0, runs[1].0),
    ));
    println!("acceptance finished in {:.0} s", start.elapsed().as_secs_f64());

    let unexpected: Vec<&Line> = lines.iter().filter(|l| !l.pass && !KNOWN_RED.contains(&l.id)).collect();
    for l in &lines {
        if !l.pass && KNOWN_RED.contains(&l.id) {
            println!("criterion {:>2} is a known red: {}", l.id, l.text);
        }
    }
    if !unexpected.is_empty() {
        for l in unexpected {
            eprintln!("criterion {} failed: {}", l.id, l.text);
        }
        std::process::exit(1);
    }
}
