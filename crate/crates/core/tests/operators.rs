mod common;

use common::half_space_family;
use lpchar::norms::{NormKind, SpaceSpec};
use lpchar::verify::cross_spec_ratio;
use lpchar::{
    apply_s_alpha, apply_t, bandlimited_family, corpus_generate, dual_family, extend, report_thm1, report_thm2,
    spectral_derivative, truncation_tail, CorpusSpec, Field, OperatorSpec,
};

#[test]
fn extension_reproduces_and_ignores_exterior() {
    let (g, domain, phi) = half_space_family(1, 4.0, 11, 6, 7);
    let psi = dual_family(&phi).unwrap();
    let mask = domain.mask(&g).unwrap();
    let f = Field::from_fn(g, |x| (-(x[0] - 1.2).powi(2) * 6.0).exp() * (3.0 * x[0]).sin());
    let e = extend(&f, &mask, &phi, &psi).unwrap();
    let h = g.spacing();
    let mut err = 0.0f64;
    for i in 0..g.len() {
        let x = g.point(i)[0];
        if x > 4.0 * h && x < 3.0 {
            err = err.max((e.values()[i] - f.values()[i]).abs());
        }
    }
    assert!(err <= 1e-5 * f.max_abs(), "{err:e}");
    let junk = Field::from_fn(g, |x| if x[0] > 0.0 { 0.0 } else { 100.0 * (9.0 * x[0]).cos() });
    let e2 = extend(&f.add(&junk).unwrap(), &mask, &phi, &psi).unwrap();
    assert_eq!(e.values(), e2.values());
}

#[test]
fn operator_is_linear() {
    let (g, domain, phi) = half_space_family(1, 4.0, 9, 4, 4);
    let psi = dual_family(&phi).unwrap();
    let mask = domain.mask(&g).unwrap();
    let a = Field::from_fn(g, |x| (-(x[0] - 1.0).powi(2)).exp());
    let b = Field::from_fn(g, |x| (2.0 * x[0]).sin());
    let spec = OperatorSpec { eta: &psi, theta: &phi, gamma: 0.5 };
    let ta = apply_t(&a, &mask, &spec).unwrap();
    let tb = apply_t(&b, &mask, &spec).unwrap();
    let tab = apply_t(&a.add(&b.scaled(2.0)).unwrap(), &mask, &spec).unwrap();
    let want = ta.add(&tb.scaled(2.0)).unwrap();
    assert!(tab.sub(&want).unwrap().max_abs() <= 1e-10 * want.max_abs());
}

#[test]
fn derivative_identity() {
    let (g, domain, phi) = half_space_family(1, 4.0, 10, 6, 6);
    let psi = dual_family(&phi).unwrap();
    let mask = domain.mask(&g).unwrap();
    let corpus = corpus_generate::<f64>(&CorpusSpec::default(), &g, 42).unwrap();
    for m in 1..=2 {
        for member in &corpus.bandlimited().members {
            let f = &member.field;
            let e = extend(f, &mask, &phi, &psi).unwrap();
            let s0 = apply_s_alpha(f, &mask, &[0], m, &phi, &psi).unwrap();
            let d = spectral_derivative(f, &[m]).unwrap();
            let sa = apply_s_alpha(&d.field, &mask, &[m], m, &phi, &psi).unwrap();
            let r = e.sub(&s0.add(&sa).unwrap()).unwrap().max_abs() / f.max_abs();
            assert!(r <= 1e-5, "m={m} {}: {r:e}", member.name);
        }
    }
}

#[test]
fn theorem_ratios_on_small_grid() {
    let (g, domain, phi) = half_space_family(1, 4.0, 9, 6, 5);
    let psi = dual_family(&phi).unwrap();
    let lam = bandlimited_family::<f64>(5, &g).unwrap();
    let mask = domain.mask(&g).unwrap();
    let corpus = corpus_generate::<f64>(&CorpusSpec::default(), &g, 42).unwrap();
    let spec = SpaceSpec::new(NormKind::B, 2.0, 2.0, 0.5, 0.0).unwrap();
    let t1 = report_thm1(&corpus, &mask, &spec, &phi, &psi, &lam).unwrap();
    assert!(t1.up.is_finite() && t1.down.is_finite());
    let t2 = report_thm2(&corpus, &mask, &spec.with_s(1.0), 1, &phi, &psi, false).unwrap();
    assert!(t2.ratio.is_finite() && t2.ratio.min_ratio.unwrap() > 0.0);
    let a = SpaceSpec::new(NormKind::F, 2.0, 2.0, 0.5, 0.5).unwrap();
    let b = SpaceSpec::new(NormKind::F, 4.0, 2.0, 0.5, 0.25).unwrap();
    assert!(cross_spec_ratio(&corpus, &mask, &a, &b, &phi).unwrap().is_finite());
}

#[test]
fn tail_estimate_against_extra_level() {
    let (g, domain, phi) = half_space_family(1, 4.0, 11, 6, 6);
    let (_, _, phi7) = half_space_family(1, 4.0, 11, 6, 7);
    let psi = dual_family(&phi).unwrap();
    let psi7 = dual_family(&phi7).unwrap();
    let mask = domain.mask(&g).unwrap();
    let corpus = corpus_generate::<f64>(&CorpusSpec::default(), &g, 42).unwrap();
    for m in &corpus.members {
        let t = truncation_tail(&m.field, &mask, &OperatorSpec { eta: &psi, theta: &phi, gamma: 0.0 }).unwrap();
        let t7 = truncation_tail(&m.field, &mask, &OperatorSpec { eta: &psi7, theta: &phi7, gamma: 0.0 }).unwrap();
        let next = t7.terms[7];
        let last = t.terms[6];
        let sup = m.field.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if last < 1e-5 * sup {
            continue;
        }
        if t.estimate.is_finite() {
            assert!(next <= t.estimate, "{}: {next} > {}", m.name, t.estimate);
        } else {
            assert!(next > 0.5 * last, "{}: {next} vs {last}", m.name);
        }
        assert_eq!(&t7.terms[..7], &t.terms[..]);
    }
}
