//! Closed-form cone generators.

use super::{canonical_line_sign, hyperplane_matrix, sort_vectors, ConeDescription, HyperplaneSet};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, normalized};
use crate::types::{BellCoefficients, MeasurementParams};

const EPS: f64 = 1e-12;

fn csc_checked(x: f64, name: &str) -> Result<f64> {
    let s = x.sin();
    if s.abs() < EPS {
        return Err(Error::AnalyticDegenerate(format!("sin {name} = 0")));
    }
    Ok(1.0 / s)
}

/// The three two-body rays with unit free parameter, before orientation.
pub fn two_body_ray_formulas(n: usize, params: &MeasurementParams) -> Result<[Vec<f64>; 3]> {
    let (p, t) = (params.phi(), params.theta());
    let cp = csc_checked(p, "φ")?;
    let ct = csc_checked(t, "θ")?;
    let (s, c) = (f64::sin, f64::cos);
    let nm1 = n as f64 - 1.0;
    let num = 24.0 * s(t - p) + 4.0 * s(3.0 * (t - p)) - 12.0 * s(3.0 * t - p)
        + s(5.0 * t - p)
        + 3.0 * s(3.0 * t + p)
        - 3.0 * s(t + 3.0 * p)
        - 12.0 * s(t - 3.0 * p)
        + s(t - 5.0 * p);
    let den0 = 4.0 * (c(2.0 * t) + c(2.0 * p) - 2.0) * (2.0 * c(2.0 * t) + c(2.0 * p) - 3.0);
    let den1 = 16.0 * (2.0 * s(t).powi(4) * cp.powi(4) + 3.0 * s(t).powi(2) * cp.powi(2) + 1.0);
    let den3 = ct.powi(2) + 2.0 * cp.powi(2);
    let den4 = 2.0 * s(t).powi(2) * cp.powi(2) + 1.0;
    let den_r3 = s(t + p) + 4.0 * s(t).powi(2) * c(t) * cp;
    for (d, what) in [(den0, "r₁ first"), (den1, "r₁ second"), (den3, "r₁ fourth"), (den4, "r₁ fifth")] {
        if d.abs() < EPS {
            return Err(Error::AnalyticDegenerate(format!("{what} component denominator vanishes")));
        }
    }
    if den_r3.abs() < EPS {
        return Err(Error::AnalyticDegenerate(
            "sin(θ+φ) + 4 sin²θ cos θ csc φ = 0 in r₃".into(),
        ));
    }
    let a0 = -nm1 * ct * num / den0;
    let a1 = -nm1 * cp.powi(5) * num / den1;
    let a3 = -s(t) * s(p) * (ct.powi(4) - cp.powi(4)) / den3;
    let a4 = -(s(t).powi(2) * cp.powi(2) + 2.0) / den4;
    let r1 = vec![a0, a1, 1.0, a3, a4];
    let r2 = vec![-a0, -a1, 1.0, a3, a4];
    let r3 = vec![
        0.0,
        0.0,
        1.0,
        (2.0 * s(t).powi(3) * c(t) * cp.powi(2) - s(2.0 * p)) / den_r3,
        -s(t) * cp * (s(t) * cp * s(t + p) + 2.0 * s(2.0 * p)) / den_r3,
    ];
    Ok([r1, r2, r3])
}

/// The two-body cone from closed forms: the three irredundant hyperplanes, three
/// oriented rays and two lines, canonicalized like the numeric pipeline.
pub fn analytic_two_body(n: usize, params: &MeasurementParams) -> Result<ConeDescription> {
    if n < 2 {
        return Err(Error::InvalidInput("the two-body cone needs n ≥ 2".into()));
    }
    let raw = two_body_ray_formulas(n, params)?;
    let (p, t) = (params.phi(), params.theta());
    let (sp, st) = (p.sin(), t.sin());
    let nm1 = n as f64 - 1.0;
    let h1 = vec![
        sp,
        st,
        nm1 * (2.0 * p).sin(),
        nm1 * (p + t).sin(),
        nm1 * (2.0 * t).sin(),
    ];
    let h2 = vec![
        sp,
        st,
        -nm1 * (2.0 * p).sin(),
        -nm1 * (p + t).sin(),
        -nm1 * (2.0 * t).sin(),
    ];
    let h3 = vec![0.0, 0.0, sp * sp, sp * st, st * st];
    let hs = [h1, h2, h3];
    let cp = 1.0 / sp;
    let l1 = vec![-cp * st, 1.0, 0.0, 0.0, 0.0];
    let l2 = vec![0.0, 0.0, st * st * cp * cp, -2.0 * st * cp, 1.0];
    let lines: Vec<Vec<f64>> = [l1, l2]
        .iter()
        .map(|l| {
            let mut v = normalized(l);
            canonical_line_sign(&mut v);
            v
        })
        .collect();
    let mut rays = Vec::with_capacity(3);
    for r in raw {
        // the hyperplane this ray is not tight on fixes its orientation
        let prods: Vec<f64> = hs.iter().map(|h| dot(h, &r) / (norm(h) * norm(&r))).collect();
        let (imax, pmax) = prods
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, v)| (i, *v))
            .unwrap();
        if pmax.abs() < 1e-10 {
            return Err(Error::AnalyticDegenerate(format!(
                "ray is tight on every hyperplane (including H{})",
                imax + 1
            )));
        }
        let sign = if pmax > 0.0 { -1.0 } else { 1.0 };
        let mut v: Vec<f64> = r.iter().map(|x| sign * x).collect();
        for l in &lines {
            let c = dot(&v, l);
            v.iter_mut().zip(l).for_each(|(a, b)| *a -= c * b);
        }
        rays.push(normalized(&v));
    }
    sort_vectors(&mut rays);
    let full = hyperplane_matrix(n, 2, params)?;
    let labels_for = |row: &[f64]| -> Vec<(usize, usize)> {
        full.rows()
            .iter()
            .zip(full.labels())
            .filter(|(r, _)| {
                let s = norm(r).max(norm(row));
                r.iter().zip(row).all(|(a, b)| (a - b).abs() <= 1e-9 * s)
            })
            .flat_map(|(_, l)| l.clone())
            .collect()
    };
    let labels: Vec<Vec<(usize, usize)>> = hs.iter().map(|h| labels_for(h)).collect();
    let hyperplanes = HyperplaneSet::with_labels(n, 2, hs.to_vec(), labels, true)?;
    Ok(ConeDescription {
        n,
        order: 2,
        params: *params,
        hyperplanes,
        rays,
        lines,
        tolerance: super::DEFAULT_TOL,
        degenerate: false,
    })
}

/// The three lineality vectors of the three-body cone, unnormalized.
pub fn analytic_three_body_lines(params: &MeasurementParams) -> Result<[Vec<f64>; 3]> {
    let cp = csc_checked(params.phi(), "φ")?;
    let st = params.theta().sin();
    let q = st * cp;
    Ok([
        vec![-q, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        vec![0.0, 0.0, q * q, -2.0 * q, 1.0, 0.0, 0.0, 0.0, 0.0],
        vec![0.0, 0.0, 0.0, 0.0, 0.0, -q.powi(3), 3.0 * q * q, -3.0 * q, 1.0],
    ])
}

/// A three-body member of the cone using only `S₀`, `S₀₀`, `S₀₀₀`.
///
/// `α₅ = −sgn(sin³φ)`, then `α₂` negative enough for every second off-diagonal,
/// then `α₀` with sign opposite to `sin φ` and large enough for every first
/// off-diagonal. The bounds are computed from the actual rows.
pub fn three_body_witness(n: usize, params: &MeasurementParams) -> Result<BellCoefficients> {
    let sp = params.phi().sin();
    let sgn = if sp < 0.0 { -1.0 } else { 1.0 };
    let h = hyperplane_matrix(n, 3, params)?;
    let mut alpha = vec![0.0; 9];
    alpha[5] = -sgn;
    let rows_at = |d: usize| -> Vec<&Vec<f64>> {
        h.rows()
            .iter()
            .zip(h.labels())
            .filter(|(_, l)| l.iter().any(|(dd, _)| *dd == d))
            .map(|(r, _)| r)
            .collect()
    };
    // second off-diagonal: r[2] α₂ + r[5] α₅ ≤ 0 with r[2] = sin²φ ≥ 0
    let need2 = rows_at(2)
        .iter()
        .filter(|r| r[2] > 0.0)
        .map(|r| -r[5] * alpha[5] / r[2])
        .fold(0.0f64, f64::min);
    alpha[2] = need2.min(0.0) - 1.0;
    // first off-diagonal: r[0] α₀ + r[2] α₂ + r[5] α₅ ≤ 0 with r[0] = sin φ
    let rest = |r: &Vec<f64>| r[2] * alpha[2] + r[5] * alpha[5];
    let worst = rows_at(1)
        .iter()
        .map(|r| rest(r).abs() / sp.abs().max(1e-300))
        .fold(0.0f64, f64::max);
    alpha[0] = -sgn * (worst + 1.0);
    BellCoefficients::new(alpha)
}
