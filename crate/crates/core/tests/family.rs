mod common;

use common::half_space_family;
use lpchar::{heideman_decay, make_base_kernel, make_grid, scale_family, Family, LipschitzDomain};

fn monomial(x: [f64; 2], a: [i32; 2], dim: usize) -> f64 {
    let mut v = x[0].powi(a[0]);
    if dim == 2 {
        v *= x[1].powi(a[1]);
    }
    v
}

/// Largest `|sum x^a phi_j h^n| / sum |x^a phi_j h^n|` over `|a| <= m`.
fn moment_residual(phi: &Family, j: usize, m: usize) -> f64 {
    let dim = phi.workspace().grid().dim();
    let h = phi.workspace().grid().spacing();
    let vol = phi.workspace().grid().cell_volume();
    let s = phi.kernel(j).unwrap().samples();
    let mut worst = 0.0f64;
    for total in 0..=m as i32 {
        let parts: Vec<[i32; 2]> = if dim == 1 { vec![[total, 0]] } else { (0..=total).map(|a| [a, total - a]).collect() };
        for a in parts {
            let (mut sum, mut abs) = (0.0, 0.0);
            for (o, v) in s.iter() {
                let t = monomial([o[0] as f64 * h, o[1] as f64 * h], a, dim) * v * vol;
                sum += t;
                abs += t.abs();
            }
            worst = worst.max(sum.abs() / abs);
        }
    }
    worst
}

#[test]
fn vanishing_moments_1d() {
    let (_, _, phi) = half_space_family(1, 4.0, 10, 6, 6);
    for j in 1..=6 {
        let r = moment_residual(&phi, j, 6);
        assert!(r <= 1e-10, "level {j}: {r:e}");
    }
    // phi_0 has unit mass
    let h = phi.workspace().grid().spacing();
    let mass: f64 = phi.kernel(0).unwrap().samples().iter().map(|(_, v)| v * h).sum();
    assert!((mass - 1.0).abs() < 1e-12);
}

#[test]
fn vanishing_moments_2d() {
    let grid = make_grid(2, 2.0, 6).unwrap();
    let domain = LipschitzDomain::graph(vec![0.0], vec![-1.0, 1.0], 0.0).unwrap();
    for m in 1..=3 {
        let base = make_base_kernel(&domain, m, &grid).unwrap();
        let phi = scale_family::<f64>(&base, &grid, 2).unwrap();
        for j in 1..=2 {
            let r = moment_residual(&phi, j, m);
            assert!(r <= 1e-10, "M={m} level {j}: {r:e}");
        }
    }
}

#[test]
fn supports_inside_cone() {
    let (grid, domain, phi) = half_space_family(1, 4.0, 10, 6, 6);
    let grid2 = make_grid(2, 2.0, 6).unwrap();
    let domain2 = LipschitzDomain::graph(vec![0.0], vec![-1.0, 1.0], 0.0).unwrap();
    let phi2 = scale_family::<f64>(&make_base_kernel(&domain2, 2, &grid2).unwrap(), &grid2, 2).unwrap();
    for (g, d, fam) in [(grid, domain, phi), (grid2, domain2, phi2)] {
        let h = g.spacing();
        for (j, k) in fam.kernels().iter().enumerate() {
            let mut nonzero = 0;
            for (o, v) in k.samples().iter() {
                if v != 0.0 {
                    nonzero += 1;
                    let y = [o[0] as f64 * h, o[1] as f64 * h];
                    assert!(d.in_cone(&y[..g.dim()]), "level {j} offset {o:?} value {v:e}");
                }
            }
            assert!(nonzero > 0);
        }
    }
}

#[test]
fn scaling_identity_exact() {
    let (_, _, phi) = half_space_family(1, 4.0, 10, 6, 6);
    let one = phi.kernel(1).unwrap().samples();
    for j in 2..=6 {
        let k = phi.kernel(j).unwrap().samples();
        let s = 1i64 << (j - 1);
        let w = s as f64;
        for (o, v) in k.iter() {
            assert_eq!(v, w * one.get([o[0] * s, 0]), "level {j} offset {o:?}");
        }
    }
    let grid2 = make_grid(2, 2.0, 6).unwrap();
    let d2 = LipschitzDomain::graph(vec![0.0], vec![-1.0, 1.0], 0.0).unwrap();
    let phi2 = scale_family::<f64>(&make_base_kernel(&d2, 2, &grid2).unwrap(), &grid2, 3).unwrap();
    let one = phi2.kernel(1).unwrap().samples();
    for j in 2..=3 {
        let s = 1i64 << (j - 1);
        let w = (s * s) as f64;
        for (o, v) in phi2.kernel(j).unwrap().samples().iter() {
            assert_eq!(v, w * one.get([o[0] * s, o[1] * s]));
        }
    }
}

#[test]
fn telescoping_partial_sums() {
    let (_, _, phi) = half_space_family(1, 4.0, 10, 6, 6);
    for big_j in 0..=6 {
        let part = phi.partial_sum_kernel(big_j).unwrap();
        let ps = part.samples();
        let sup = ps.iter().fold(0.0f64, |m, (_, v)| m.max(v.abs()));
        for (o, v) in ps.iter() {
            let s: f64 = (0..=big_j).map(|j| phi.kernel(j).unwrap().samples().get(o)).sum();
            assert!((s - v).abs() <= 1e-12 * sup, "J={big_j} offset {o:?}");
        }
    }
}

#[test]
fn f32_family_tracks_f64() {
    let grid = make_grid(1, 4.0, 10).unwrap();
    let base = make_base_kernel(&LipschitzDomain::half_line(0.0).unwrap(), 6, &grid).unwrap();
    let a = scale_family::<f64>(&base, &grid, 3).unwrap();
    let b = scale_family::<f32>(&base, &grid, 3).unwrap();
    for j in 0..=3 {
        let (x, y) = (a.kernel(j).unwrap().samples(), b.kernel(j).unwrap().samples());
        for (o, v) in x.iter() {
            assert!((v - y.get(o) as f64).abs() <= 1e-6 * v.abs().max(1.0));
        }
    }
}

/// `int |eta_j * theta_k| (1 + 2^k |x|)^N` by direct summation of sample products.
fn direct_decay_entry(eta: &Family, theta: &Family, j: usize, k: usize, n: f64) -> f64 {
    let h = eta.workspace().grid().spacing();
    let a = eta.kernel(j).unwrap().samples();
    let b = theta.kernel(k).unwrap().samples();
    let av: Vec<_> = a.iter().filter(|p| p.1 != 0.0).collect();
    let bv: Vec<_> = b.iter().filter(|p| p.1 != 0.0).collect();
    let mut conv = std::collections::BTreeMap::new();
    for (oa, va) in &av {
        for (ob, vb) in &bv {
            *conv.entry(oa[0] + ob[0]).or_insert(0.0) += va * vb * h;
        }
    }
    let s = 2f64.powi(k as i32);
    conv.iter().map(|(&o, &v)| v.abs() * (1.0 + s * (o as f64 * h).abs()).powf(n) * h).sum()
}

#[test]
fn heideman_decay_rate() {
    let (_, _, phi) = half_space_family(1, 4.0, 10, 6, 6);
    let t = heideman_decay(&phi, &phi, 3.0).unwrap();
    for (j, k) in [(1, 1), (4, 1), (1, 5), (6, 2)] {
        let want = direct_decay_entry(&phi, &phi, j, k, 3.0);
        let got = t.entries[j][k];
        assert!((got - want).abs() <= 1e-6 * want, "I({j},{k}) = {got:e}, direct {want:e}");
    }
    let need = -(3f64.min(6.0 + 1.0) - 0.5);
    assert!(t.slope <= need, "slope {}", t.slope);
}
