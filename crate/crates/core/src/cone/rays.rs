use bitvec::prelude::*;
use nalgebra::{DMatrix, SVD};
use serde::{Deserialize, Serialize};

use super::{generic_lineality, sort_vectors, ConeOptions, HyperplaneSet};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, normalized, rank_split};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RayMethod {
    /// Incremental double description.
    DoubleDescription,
    /// Every `(r−1)`-subset of rows, `r` the rank; small instances only.
    Combinatorial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RaySet {
    pub rays: Vec<Vec<f64>>,
    pub degenerate: bool,
}

const COMBINATORIAL_LIMIT: u128 = 2_000_000;

/// Extremal rays of `{α : rows · α ≤ 0}` modulo its lineality space.
///
/// Rays are unit vectors orthogonal to the lines, sorted lexicographically.
pub fn rays(h: &HyperplaneSet, opts: &ConeOptions) -> Result<RaySet> {
    let split = rank_split(&h.matrix(), opts.rank_tol);
    let lineality = h.dim() - split.rank;
    let expected = generic_lineality(h.n(), h.order())?;
    let degenerate = lineality > expected;
    if degenerate && !opts.allow_degenerate {
        return Err(Error::DegenerateGeometry(format!(
            "lineality {lineality} exceeds the generic value {expected} for n={}, K={}",
            h.n(),
            h.order()
        )));
    }
    let rk = split.rank;
    if rk == 0 {
        return Ok(RaySet {
            rays: Vec::new(),
            degenerate,
        });
    }
    // coordinates in the orthonormal row-space basis
    let q = &split.row_basis;
    let reduced: Vec<Vec<f64>> = h
        .normalized_rows()
        .iter()
        .map(|r| {
            let y: Vec<f64> = (0..rk).map(|i| dot(q.row(i).clone_owned().as_slice(), r)).collect();
            normalized(&y)
        })
        .collect();
    let tol = opts.tolerance;
    let quotient_rays = match opts.method {
        RayMethod::DoubleDescription => double_description(&reduced, rk, tol)?,
        RayMethod::Combinatorial => combinatorial(&reduced, rk, tol)?,
    };
    let mut out: Vec<Vec<f64>> = Vec::new();
    for y in quotient_rays {
        let mut r = vec![0.0; h.dim()];
        for (i, yi) in y.iter().enumerate() {
            for (j, rj) in r.iter_mut().enumerate() {
                *rj += yi * q[(i, j)];
            }
        }
        let mut r = normalized(&r);
        r.iter_mut().for_each(|x| {
            if x.abs() < 1e-15 {
                *x = 0.0
            }
        });
        let worst = h.max_normalized_product(&r);
        if worst > tol {
            return Err(Error::ContractViolation(format!(
                "computed ray violates a hyperplane by {worst:e}"
            )));
        }
        if !out.iter().any(|u| parallel(u, &r)) {
            out.push(r);
        }
    }
    sort_vectors(&mut out);
    Ok(RaySet {
        rays: out,
        degenerate,
    })
}

fn parallel(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt() < 1e-7
}

struct Ray {
    y: Vec<f64>,
    zeros: BitVec,
}

/// Null vector of the rows in `zeros` if they have rank `rk − 1`.
fn refine(rows: &[Vec<f64>], zeros: &BitSlice, rk: usize, guess: &[f64]) -> Option<Vec<f64>> {
    let idx: Vec<usize> = zeros.iter_ones().collect();
    if idx.len() + 1 < rk {
        return None;
    }
    let m = idx.len().max(rk);
    let mut a = DMatrix::zeros(m, rk);
    for (t, &i) in idx.iter().enumerate() {
        for j in 0..rk {
            a[(t, j)] = rows[i][j];
        }
    }
    let svd = SVD::new(a, false, true);
    let vt = svd.v_t?;
    let mut order: Vec<usize> = (0..rk).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let smax = svd.singular_values[order[0]];
    let s_last = svd.singular_values[order[rk - 1]];
    let s_prev = if rk >= 2 {
        svd.singular_values[order[rk - 2]]
    } else {
        smax
    };
    if s_last > 1e-7 * smax.max(1.0) || s_prev < 1e-6 * smax.max(1e-300) {
        return None;
    }
    let mut v: Vec<f64> = vt.row(order[rk - 1]).iter().copied().collect();
    if dot(&v, guess) < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    Some(v)
}

pub(crate) fn double_description(rows: &[Vec<f64>], rk: usize, tol: f64) -> Result<Vec<Vec<f64>>> {
    let m = rows.len();
    // greedy independent starting rows
    let mut basis: Vec<usize> = Vec::new();
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let mut v = r.clone();
        for u in &ortho {
            let p = dot(&v, u);
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= p * b);
        }
        let nv = norm(&v);
        if nv > 1e-8 {
            ortho.push(v.iter().map(|x| x / nv).collect());
            basis.push(i);
            if basis.len() == rk {
                break;
            }
        }
    }
    if basis.len() < rk {
        return Err(Error::DegenerateGeometry(
            "row space rank could not be reproduced from the rows".into(),
        ));
    }
    let b = DMatrix::from_fn(rk, rk, |i, j| rows[basis[i]][j]);
    let binv = b.try_inverse().ok_or_else(|| {
        Error::DegenerateGeometry("starting rows are numerically singular".into())
    })?;
    let mut rays: Vec<Ray> = (0..rk)
        .map(|i| {
            let y: Vec<f64> = normalized(&(0..rk).map(|r| -binv[(r, i)]).collect::<Vec<_>>());
            let mut zeros = bitvec![0; m];
            for (t, &bi) in basis.iter().enumerate() {
                if t != i {
                    zeros.set(bi, true);
                }
            }
            Ray { y, zeros }
        })
        .collect();
    let mut done = bitvec![0; m];
    for &bi in &basis {
        done.set(bi, true);
    }
    for (j, a) in rows.iter().enumerate() {
        if done[j] {
            continue;
        }
        done.set(j, true);
        let vals: Vec<f64> = rays.iter().map(|r| dot(a, &r.y)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] > tol).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] < -tol).collect();
        if pos.is_empty() {
            for (i, r) in rays.iter_mut().enumerate() {
                if vals[i].abs() <= tol {
                    r.zeros.set(j, true);
                }
            }
            continue;
        }
        let mut fresh: Vec<Ray> = Vec::new();
        for &p in &pos {
            for &q in &neg {
                let mut common = rays[p].zeros.clone();
                common &= rays[q].zeros.as_bitslice();
                if common.count_ones() + 2 < rk {
                    continue;
                }
                let adjacent = (0..rays.len()).all(|r| {
                    r == p || r == q || common.iter_ones().any(|i| !rays[r].zeros[i])
                });
                if !adjacent {
                    continue;
                }
                let (sp, sq) = (vals[p], vals[q]);
                let y: Vec<f64> = rays[q]
                    .y
                    .iter()
                    .zip(&rays[p].y)
                    .map(|(yq, yp)| sp * yq - sq * yp)
                    .collect();
                let mut zeros = common;
                zeros.set(j, true);
                let y = normalized(&y);
                let y = refine(rows, &zeros, rk, &y).unwrap_or(y);
                fresh.push(Ray { y, zeros });
            }
        }
        let mut next: Vec<Ray> = Vec::with_capacity(rays.len() + fresh.len());
        for (i, mut r) in rays.into_iter().enumerate() {
            if vals[i] < -tol {
                next.push(r);
            } else if vals[i].abs() <= tol {
                r.zeros.set(j, true);
                next.push(r);
            }
        }
        next.extend(fresh);
        rays = next;
    }
    Ok(rays.into_iter().map(|r| r.y).collect())
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

pub(crate) fn combinatorial(rows: &[Vec<f64>], rk: usize, tol: f64) -> Result<Vec<Vec<f64>>> {
    let m = rows.len();
    let choose = rk - 1;
    if choose > m {
        return Ok(Vec::new());
    }
    if binomial(m, choose) > COMBINATORIAL_LIMIT {
        return Err(Error::Resource(format!(
            "combinatorial enumeration of C({m}, {choose}) subsets exceeds the limit"
        )));
    }
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut idx: Vec<usize> = (0..choose).collect();
    loop {
        let mut zeros = bitvec![0; m];
        for &i in &idx {
            zeros.set(i, true);
        }
        if let Some(v) = null_vector(rows, &idx, rk) {
            for sign in [1.0, -1.0] {
                let v: Vec<f64> = v.iter().map(|x| sign * x).collect();
                if rows.iter().all(|r| dot(r, &v) <= tol) && !out.iter().any(|u| parallel(u, &v)) {
                    out.push(v);
                }
            }
        }
        // next combination
        let mut i = choose;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if idx[i] < m - choose + i {
                idx[i] += 1;
                for t in i + 1..choose {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
        }
        if choose == 0 {
            return Ok(out);
        }
    }
}

fn null_vector(rows: &[Vec<f64>], idx: &[usize], rk: usize) -> Option<Vec<f64>> {
    if rk == 1 {
        return Some(vec![1.0]);
    }
    let a = DMatrix::from_fn(idx.len().max(rk), rk, |i, j| {
        if i < idx.len() {
            rows[idx[i]][j]
        } else {
            0.0
        }
    });
    let svd = SVD::new(a, false, true);
    let vt = svd.v_t?;
    let mut order: Vec<usize> = (0..rk).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let smax = svd.singular_values[order[0]];
    if svd.singular_values[order[rk - 2]] <= 1e-9 * smax.max(1e-300) {
        return None;
    }
    Some(vt.row(order[rk - 1]).iter().copied().collect())
}
