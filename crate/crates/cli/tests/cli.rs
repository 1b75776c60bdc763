use std::fs;
use std::path::Path;

use lpchar_cli::run;
use serde_json::Value;

fn run_in(args: &[&str]) -> i32 {
    run(args.iter().map(|s| s.to_string()))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn half_line(dir: &Path) -> std::path::PathBuf {
    let d = dir.join("domain.json");
    fs::write(&d, "{ \"dim\": 1, \"threshold\": 0.0 }\n").unwrap();
    d
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run_in(&["verify", "thm1", "--config", "missing.json"]), 2);
    assert_eq!(run_in(&["verify", "thm1", "--no-such-flag"]), 2);
    assert_eq!(run_in(&["frobnicate"]), 2);
    assert_eq!(run_in(&["--help"]), 0);
}

#[test]
fn malformed_config_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("cfg.json");
    fs::write(&c, "{ \"grid\": { \"level\": \"ten\" } }").unwrap();
    assert_eq!(run_in(&["verify", "lemmas", "--config", p(&c)]), 2);
    fs::write(&c, "{ \"specs\": [{ \"kind\": \"F\", \"p\": \"inf\", \"q\": 2, \"s\": 0, \"tau\": 0 }] }").unwrap();
    assert_eq!(run_in(&["verify", "lemmas", "--config", p(&c)]), 2);
}

#[test]
fn family_build_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = half_line(dir.path());
    let out = dir.path().join("phi.lpfam");
    let code = run_in(&["family", "build", "--domain", p(&d), "--moments", "4", "--levels", "6", "--out", p(&out)]);
    assert_eq!(code, 0);
    let m: Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["M"], 4);
    assert_eq!(m["J_max"], 6);
    assert_eq!(m["kernels"].as_array().unwrap().len(), 7);
    assert!(out.join("kernel_6.lpf.bin").exists());
    assert!(out.join("mask.lpf").exists());
}

#[test]
fn field_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = half_line(dir.path());
    let fam = dir.path().join("phi.lpfam");
    let lvl = ["--grid-level", "8"];
    let mut a = vec!["family", "build", "--domain", p(&d), "--moments", "4", "--levels", "4", "--out", p(&fam)];
    a.extend(lvl);
    assert_eq!(run_in(&a), 0);
    let corpus = dir.path().join("corpus");
    let mut a = vec!["corpus", "generate", "--domain", p(&d), "--out", p(&corpus)];
    a.extend(lvl);
    assert_eq!(run_in(&a), 0);
    let listing: Value = serde_json::from_str(&fs::read_to_string(corpus.join("corpus.json")).unwrap()).unwrap();
    assert_eq!(listing["members"].as_array().unwrap().len(), 12);

    let field = corpus.join("gaussian-0.lpf");
    let mask = corpus.join("mask.lpf");
    let pyr = dir.path().join("pyr");
    assert_eq!(
        run_in(&["analyze", "pyramid", "--field", p(&field), "--family", p(&fam), "--out", p(&pyr)]),
        0
    );
    let res = dir.path().join("norm.json");
    let code = run_in(&[
        "analyze", "norm", "--pyramid", p(&pyr), "--mask", p(&mask), "--kind", "b", "--p", "2", "--q", "inf", "--s",
        "-0.5", "--tau", "0.25", "--out", p(&res),
    ]);
    assert_eq!(code, 0);
    let r: Value = serde_json::from_str(&fs::read_to_string(&res).unwrap()).unwrap();
    assert_eq!(r["spec"]["q"], "inf");
    assert!(r["result"]["value"].as_f64().unwrap() > 0.0);

    let ext = dir.path().join("ext.lpf");
    assert_eq!(
        run_in(&["extend", "--field", p(&field), "--mask", p(&mask), "--family", p(&fam), "--out", p(&ext)]),
        0
    );
    let t = dir.path().join("t.lpf");
    let code = run_in(&[
        "apply-t", "--field", p(&field), "--mask", p(&mask), "--family", p(&fam), "--gamma", "-1", "--out", p(&t),
    ]);
    assert_eq!(code, 0);
    assert!(ext.exists() && t.exists());

    let wrong = dir.path().join("wrong.lpfam");
    let mut a = vec!["family", "build", "--domain", p(&d), "--moments", "4", "--levels", "4", "--out", p(&wrong)];
    a.extend(["--grid-level", "9"]);
    assert_eq!(run_in(&a), 0);
    assert_eq!(
        run_in(&["extend", "--field", p(&field), "--mask", p(&mask), "--family", p(&wrong), "--out", p(&ext)]),
        2
    );
}

#[test]
fn failed_threshold_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("cfg.json");
    fs::write(&c, "{ \"thresholds\": { \"identity\": 1e-300 }, \"derivative\": { \"orders\": [1] } }").unwrap();
    let out = dir.path().join("r.json");
    let code = run_in(&["verify", "thm2", "--config", p(&c), "--grid-level", "8", "--out", p(&out)]);
    assert_eq!(code, 1);
    let r: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["passed"], false);
    assert!(dir.path().join("r.csv").exists());
    assert!(dir.path().join("r.meta.json").exists());
}

#[test]
fn lemmas_at_reduced_level() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rep");
    let c = dir.path().join("cfg.json");
    fs::write(&c, "{ \"family\": { \"J_max\": 4 } }").unwrap();
    let code = run_in(&["verify", "lemmas", "--config", p(&c), "--grid-level", "8", "--probe-N", "1", "--out", p(&out)]);
    assert_eq!(code, 0);
    let r: Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let checks = r["checks"].as_array().unwrap();
    let probes: Vec<_> = checks
        .iter()
        .filter(|c| c["name"].as_str().unwrap().starts_with("peetre_bound"))
        .collect();
    assert_eq!(probes.len(), 4);
    assert!(probes.iter().all(|c| c["outcome"] == "info"));
    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(csv.starts_with("check,member,lhs,rhs,ratio,status\n"));
}
