use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::parent::{DickeState, GaussianProfile};

pub const SIGMA_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub profile: GaussianProfile,
    /// Peak height of the fitted `φ_k²` profile.
    pub amplitude: f64,
    /// RMS residual of `φ_k²` over `k = 0 … n`.
    pub rms: f64,
    pub sigma_floored: bool,
}

fn residuals(p: &[f64], x: [f64; 3]) -> Vec<f64> {
    let [a, mu, s] = x;
    p.iter()
        .enumerate()
        .map(|(k, pk)| a * (-(k as f64 - mu).powi(2) / (2.0 * s)).exp() - pk)
        .collect()
}

fn cost(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Least-squares fit of `φ_k²` to `A exp(−(k−μ)²/2σ)` (damped Gauss–Newton from
/// the moments). `σ` is the variance parameter of [`GaussianProfile`].
pub fn gaussian_fit(state: &DickeState) -> GaussianFit {
    let p: Vec<f64> = state.amplitudes().iter().map(|v| v * v).collect();
    let n = state.n();
    let mu0: f64 = p.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
    let var0: f64 = p.iter().enumerate().map(|(k, v)| (k as f64 - mu0).powi(2) * v).sum();
    let peak = p.iter().copied().fold(0.0, f64::max);
    let mut x = [peak, mu0, var0.max(SIGMA_FLOOR)];
    let mut r = residuals(&p, x);
    let mut c = cost(&r);
    let mut lambda = 1e-3;
    for _ in 0..200 {
        let [a, mu, s] = x;
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for (k, rk) in r.iter().enumerate() {
            let dk = k as f64 - mu;
            let e = (-dk * dk / (2.0 * s)).exp();
            let j = Vector3::new(e, a * e * dk / s, a * e * dk * dk / (2.0 * s * s));
            jtj += j * j.transpose();
            jtr += j * *rk;
        }
        let mut improved = false;
        while lambda < 1e12 {
            let mut m = jtj;
            for i in 0..3 {
                m[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
            }
            let Some(step) = m.lu().solve(&(-jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let y = [x[0] + step[0], x[1] + step[1], (x[2] + step[2]).max(SIGMA_FLOOR)];
            let ry = residuals(&p, y);
            let cy = cost(&ry);
            if cy < c {
                let done = (c - cy) <= 1e-15 * c.max(1e-300) || step.norm() < 1e-12;
                x = y;
                r = ry;
                c = cy;
                lambda = (lambda / 10.0).max(1e-12);
                improved = !done;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    GaussianFit {
        profile: GaussianProfile { n, mu: x[1], sigma: x[2] },
        amplitude: x[0],
        rms: (c / p.len() as f64).sqrt(),
        sigma_floored: x[2] <= SIGMA_FLOOR,
    }
}
