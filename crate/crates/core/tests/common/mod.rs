//! Brute-force references shared by the integration tests.
#![allow(dead_code)]

use lpchar::domain::Mask;
use lpchar::norms::{NormKind, SpaceSpec};
use lpchar::{make_base_kernel, make_grid, scale_family, Field, Family, Grid, Kernel, LipschitzDomain};

/// Cone family over the half-line domain `x > 0` (or the half-plane in 2-D).
pub fn half_space_family(dim: usize, half_extent: f64, level: u32, m: usize, j_max: usize) -> (Grid, LipschitzDomain, Family) {
    let grid = make_grid(dim, half_extent, level).unwrap();
    let domain = if dim == 1 {
        LipschitzDomain::half_line(0.0).unwrap()
    } else {
        LipschitzDomain::graph(vec![], vec![0.0], 0.0).unwrap()
    };
    let base = make_base_kernel(&domain, m, &grid).unwrap();
    let phi = scale_family(&base, &grid, j_max).unwrap();
    (grid, domain, phi)
}

/// `h^n sum_y f(y) k(x - y)` at one sample.
pub fn direct_convolve_at(f: &Field, k: &Kernel<f64>, i: usize) -> f64 {
    let g = f.grid();
    let s = k.samples();
    let x = g.lattice(i);
    let mut acc = 0.0;
    for (off, v) in s.iter() {
        let y0 = x[0] - off[0];
        let y1 = x[1] - off[1];
        if let Some(j) = index_of(g, [y0, y1]) {
            acc += f.values()[j] * v;
        }
    }
    acc * g.cell_volume()
}

/// Flat index of a lattice point, if it lies in the box.
pub fn index_of(g: &Grid, lat: [i64; 2]) -> Option<usize> {
    let o = g.origin_index();
    let c = g.count() as i64;
    let a = lat[0] + o;
    if a < 0 || a >= c {
        return None;
    }
    if g.dim() == 1 {
        return (lat[1] == 0).then_some(a as usize);
    }
    let b = lat[1] + o;
    if b < 0 || b >= c {
        return None;
    }
    Some(g.ravel([a as usize, b as usize]))
}

/// Samples whose quadrature cell lies in `2^-J v + [0, 2^-J)^n` and in the mask.
fn cube_samples(g: &Grid, mask: &Mask, level: i32, v: &[i64]) -> Vec<usize> {
    let side = 2f64.powi(-level);
    (0..g.len())
        .filter(|&i| {
            let last = g.count() - 1;
            let u = g.unravel(i);
            if u[0] == last || (g.dim() == 2 && u[1] == last) || !mask.contains(i) {
                return false;
            }
            let x = g.point(i);
            (0..g.dim()).all(|ax| {
                let lo = v[ax] as f64 * side;
                x[ax] >= lo && x[ax] < lo + side
            })
        })
        .collect()
}

fn all_cubes(g: &Grid, level: i32) -> Vec<Vec<i64>> {
    let side = 2f64.powi(-level);
    let a = g.half_extent();
    let lo = (-a / side).floor() as i64;
    let hi = (a / side).ceil() as i64;
    let mut out = Vec::new();
    for v0 in lo..hi {
        if g.dim() == 1 {
            out.push(vec![v0]);
        } else {
            for v1 in lo..hi {
                out.push(vec![v0, v1]);
            }
        }
    }
    out
}

fn lp(vals: &[f64], p: f64, vol: f64) -> f64 {
    if vals.is_empty() {
        return 0.0;
    }
    if p.is_infinite() {
        vals.iter().cloned().fold(0.0, f64::max)
    } else {
        (vol * vals.iter().map(|v| v.powf(p)).sum::<f64>()).powf(1.0 / p)
    }
}

fn lq(vals: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        vals.iter().cloned().fold(0.0, f64::max)
    } else {
        vals.iter().map(|v| v.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// Mixed sequence norm of `(2^{js} g_j)` by direct enumeration.
pub fn oracle_seq_norm(levels: &[Field], mask: &Mask, spec: &SpaceSpec, range: (i32, i32)) -> f64 {
    let g = *levels[0].grid();
    let n = g.dim() as f64;
    let vol = g.cell_volume();
    let w = |j: usize, i: usize| 2f64.powf(j as f64 * spec.s) * levels[j].values()[i].abs();
    match spec.kind {
        NormKind::B | NormKind::F => {
            let mut best = 0.0f64;
            for level in range.0..=range.1 {
                let cw = 2f64.powf(n * level as f64 * spec.tau);
                let js: Vec<usize> = (level.max(0) as usize..levels.len()).collect();
                for v in all_cubes(&g, level) {
                    let idx = cube_samples(&g, mask, level, &v);
                    let val = if spec.kind == NormKind::B {
                        let per: Vec<f64> = js
                            .iter()
                            .map(|&j| lp(&idx.iter().map(|&i| w(j, i)).collect::<Vec<_>>(), spec.p, vol))
                            .collect();
                        lq(&per, spec.q)
                    } else if js.is_empty() {
                        0.0
                    } else {
                        let pts: Vec<f64> = idx
                            .iter()
                            .map(|&i| lq(&js.iter().map(|&j| w(j, i)).collect::<Vec<_>>(), spec.q))
                            .collect();
                        lp(&pts, spec.p, vol)
                    };
                    best = best.max(cw * val);
                }
            }
            best
        }
        NormKind::N => {
            let per: Vec<f64> = (0..levels.len())
                .map(|j| {
                    let mut m = 0.0f64;
                    for level in range.0..=range.1 {
                        let cw = 2f64.powf(n * level as f64 * spec.tau);
                        for v in all_cubes(&g, level) {
                            let idx = cube_samples(&g, mask, level, &v);
                            m = m.max(cw * lp(&idx.iter().map(|&i| w(j, i)).collect::<Vec<_>>(), spec.p, vol));
                        }
                    }
                    m
                })
                .collect();
            lq(&per, spec.q)
        }
    }
}
