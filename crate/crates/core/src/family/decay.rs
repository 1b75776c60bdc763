use serde::{Deserialize, Serialize};

use super::LpFamily;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// `I(j,k) = int |eta_j * theta_k| (1 + 2^k |x|)^N dx` with fitted decay rates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayTable {
    pub n: f64,
    /// `entries[j][k]`.
    pub entries: Vec<Vec<f64>>,
    /// Least-squares slope of `log2 I(j,k)` against `|j - k|` over all pairs.
    pub slope: f64,
    /// Slope restricted to `j > k`.
    pub slope_below: f64,
    /// Slope restricted to `j < k`.
    pub slope_above: f64,
}

fn fit(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    if points.len() < 2 {
        return f64::NAN;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

pub fn heideman_decay<T: Real>(eta: &LpFamily<T>, theta: &LpFamily<T>, n: f64) -> Result<DecayTable> {
    let ws = eta.workspace();
    if ws.grid() != theta.workspace().grid() || ws.size() != theta.workspace().size() {
        return Err(Error::GridMismatch("families use different workspaces".into()));
    }
    let half = ws.size() / 2;
    for (name, fam) in [("eta", eta), ("theta", theta)] {
        for k in fam.kernels() {
            match k.radius() {
                Some(r) if r < half / 2 => {}
                _ => {
                    return Err(Error::InvalidFamily(format!(
                        "{name}: kernel radius exceeds a quarter of the workspace"
                    )))
                }
            }
        }
    }
    let h = ws.grid().spacing();
    let vol = ws.grid().cell_volume();
    let offsets: Vec<f64> = (0..ws.len())
        .map(|i| {
            let o = ws.offsets_of(i);
            ((o[0] * o[0] + o[1] * o[1]) as f64).sqrt() * h
        })
        .collect();
    let je = eta.j_max();
    let jt = theta.j_max();
    let theta_spec: Vec<_> = theta.kernels().iter().map(|k| k.spectrum().into_owned()).collect();
    let mut entries = vec![vec![0.0; jt + 1]; je + 1];
    for (j, ek) in eta.kernels().iter().enumerate() {
        let es = ek.spectrum();
        for (k, ts) in theta_spec.iter().enumerate() {
            let mut buf: Vec<_> = es.iter().zip(ts).map(|(a, b)| *a * *b).collect();
            ws.inverse(&mut buf);
            let scale = 2f64.powi(k as i32);
            let total: f64 = buf
                .iter()
                .zip(&offsets)
                .map(|(z, &d)| z.re.f64().abs() / vol * (1.0 + scale * d).powf(n))
                .sum();
            entries[j][k] = total * vol;
        }
    }
    let mut all = Vec::new();
    let mut below = Vec::new();
    let mut above = Vec::new();
    for (j, row) in entries.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            if v > 0.0 {
                let p = ((j as f64 - k as f64).abs(), v.log2());
                all.push(p);
                if j >= k {
                    below.push(p);
                }
                if j <= k {
                    above.push(p);
                }
            }
        }
    }
    Ok(DecayTable {
        n,
        slope: fit(&all),
        slope_below: fit(&below),
        slope_above: fit(&above),
        entries,
    })
}
