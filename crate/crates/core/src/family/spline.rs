//! Centered cardinal B-splines.

/// Order-`r` B-spline with unit knot spacing, supported on `[-r/2, r/2]`.
///
/// Evaluated by the de Boor triangle, whose terms are all nonnegative.
pub fn bspline(r: usize, x: f64) -> f64 {
    let t = x + r as f64 / 2.0;
    if !(t > 0.0 && t < r as f64) {
        return 0.0;
    }
    let m = t.floor();
    let f = t - m;
    let m = m as usize;
    let mut v = [0.0f64; 32];
    assert!(r <= v.len(), "spline order {r} too large");
    v[0] = 1.0;
    for k in 2..=r {
        let inv = 1.0 / (k - 1) as f64;
        let mut prev = 0.0;
        for i in 0..k {
            let cur = if i < k - 1 { v[i] } else { 0.0 };
            let a = f + i as f64;
            v[i] = (a * cur + (k as f64 - a) * prev) * inv;
            prev = cur;
        }
    }
    v[m]
}

/// Raw moments `E[U^k]`, `k = 0..=kmax`, of the order-`r` spline density.
pub fn bspline_moments(r: usize, kmax: usize) -> Vec<f64> {
    let uniform: Vec<f64> = (0..=kmax)
        .map(|k| {
            if k % 2 == 1 {
                0.0
            } else {
                1.0 / ((k + 1) as f64 * 2f64.powi(k as i32))
            }
        })
        .collect();
    let mut acc = vec![0.0; kmax + 1];
    acc[0] = 1.0;
    for _ in 0..r {
        acc = (0..=kmax)
            .map(|k| {
                (0..=k)
                    .map(|l| binomial(k, l) * acc[l] * uniform[k - l])
                    .sum()
            })
            .collect();
    }
    acc
}

/// Moments `E[(shift + scale U)^k]`, `k = 0..=kmax`, from the moments of `U`.
pub fn affine_moments(base: &[f64], shift: f64, scale: f64, kmax: usize) -> Vec<f64> {
    (0..=kmax)
        .map(|k| {
            (0..=k)
                .map(|l| binomial(k, l) * shift.powi((k - l) as i32) * scale.powi(l as i32) * base[l])
                .sum()
        })
        .collect()
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut c = 1.0;
    for i in 0..k.min(n - k) {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c.round()
}
