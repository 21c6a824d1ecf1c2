//! Lowest eigenpair of a banded symmetric matrix.

use nalgebra::SymmetricEigen;

use crate::dicke::SymmetricBlockMatrix;

/// Dense solves are used up to this dimension.
pub const DENSE_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenMethod {
    Auto,
    Dense,
    /// Sturm-count bisection on the band, then inverse iteration.
    Bisection,
}

/// Smallest eigenvalue and a unit eigenvector whose largest-magnitude component is
/// positive. In a degenerate ground space the vector is the projection of the
/// all-ones vector (nonnegative for stoquastic input).
pub fn lowest_eigenpair(m: &SymmetricBlockMatrix, method: EigenMethod) -> (f64, Vec<f64>) {
    let dense = match method {
        EigenMethod::Auto => m.dim() <= DENSE_LIMIT,
        EigenMethod::Dense => true,
        EigenMethod::Bisection => false,
    };
    let (e, mut v) = if dense { dense_pair(m) } else { banded_pair(m) };
    canonical_sign(&mut v);
    (e, v)
}

fn canonical_sign(v: &mut [f64]) {
    let (mut best, mut val) = (0.0f64, 0.0f64);
    for &x in v.iter() {
        if x.abs() > best + 1e-12 {
            best = x.abs();
            val = x;
        }
    }
    if val < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn dense_pair(m: &SymmetricBlockMatrix) -> (f64, Vec<f64>) {
    let dim = m.dim();
    let eig = SymmetricEigen::new(m.to_dense());
    let (imin, emin) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, e)| (i, *e))
        .unwrap();
    let scale = m.max_abs().max(1.0);
    let ground: Vec<usize> = (0..dim)
        .filter(|&i| eig.eigenvalues[i] - emin <= 1e-9 * scale)
        .collect();
    let v = if ground.len() == 1 {
        eig.eigenvectors.column(imin).iter().copied().collect()
    } else {
        let mut p = vec![0.0; dim];
        for &i in &ground {
            let col = eig.eigenvectors.column(i);
            let w: f64 = col.iter().sum();
            p.iter_mut().zip(col.iter()).for_each(|(a, b)| *a += w * b);
        }
        let np = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        if np < 1e-8 {
            eig.eigenvectors.column(imin).iter().copied().collect()
        } else {
            p.iter().map(|x| x / np).collect()
        }
    };
    (emin, v)
}

/// Number of eigenvalues below `sigma` from the inertia of `A − σI = L D Lᵀ`.
fn count_below(m: &SymmetricBlockMatrix, sigma: f64) -> usize {
    let dim = m.dim();
    let bw = m.bandwidth();
    // lower band: l[i][j] stores L(i, i−1−j) for j < bw
    let mut l = vec![vec![0.0; bw]; dim];
    let mut d = vec![0.0; dim];
    let tiny = 1e-300_f64.max(f64::EPSILON * m.max_abs().max(1.0) * 1e-6);
    let mut neg = 0;
    for i in 0..dim {
        let lo = i.saturating_sub(bw);
        for j in lo..i {
            // L(i,j) D(j) = A(i,j) − Σ_{k<j} L(i,k) D(k) L(j,k)
            let mut s = m.get(i, j);
            let klo = lo.max(j.saturating_sub(bw));
            for k in klo..j {
                s -= l[i][i - 1 - k] * d[k] * l[j][j - 1 - k];
            }
            l[i][i - 1 - j] = s / d[j];
        }
        let mut s = m.get(i, i) - sigma;
        for k in lo..i {
            let lik = l[i][i - 1 - k];
            s -= lik * lik * d[k];
        }
        if s.abs() < tiny {
            s = -tiny;
        }
        if s < 0.0 {
            neg += 1;
        }
        d[i] = s;
    }
    neg
}

/// Banded Cholesky of `A − σI` (must be positive definite), lower band storage.
fn band_cholesky(m: &SymmetricBlockMatrix, sigma: f64) -> Option<Vec<Vec<f64>>> {
    let dim = m.dim();
    let bw = m.bandwidth();
    // c[i][j] = L(i, i−j), j = 0..=bw
    let mut c = vec![vec![0.0; bw + 1]; dim];
    for i in 0..dim {
        let lo = i.saturating_sub(bw);
        for j in lo..=i {
            let mut s = m.get(i, j) - if i == j { sigma } else { 0.0 };
            let klo = lo.max(j.saturating_sub(bw));
            for k in klo..j {
                s -= c[i][i - k] * c[j][j - k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                c[i][0] = s.sqrt();
            } else {
                c[i][i - j] = s / c[j][0];
            }
        }
    }
    Some(c)
}

fn cholesky_solve(c: &[Vec<f64>], b: &mut [f64]) {
    let dim = b.len();
    let bw = c[0].len() - 1;
    for i in 0..dim {
        let lo = i.saturating_sub(bw);
        let mut s = b[i];
        for k in lo..i {
            s -= c[i][i - k] * b[k];
        }
        b[i] = s / c[i][0];
    }
    for i in (0..dim).rev() {
        let hi = (i + bw).min(dim - 1);
        let mut s = b[i];
        for k in i + 1..=hi {
            s -= c[k][k - i] * b[k];
        }
        b[i] = s / c[i][0];
    }
}

fn banded_pair(m: &SymmetricBlockMatrix) -> (f64, Vec<f64>) {
    let dim = m.dim();
    // Gershgorin interval
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..dim {
        let r: f64 = (i.saturating_sub(m.bandwidth())..=(i + m.bandwidth()).min(dim - 1))
            .filter(|&j| j != i)
            .map(|j| m.get(i, j).abs())
            .sum();
        lo = lo.min(m.get(i, i) - r);
        hi = hi.max(m.get(i, i) + r);
    }
    let scale = m.max_abs().max(1.0);
    while hi - lo > 1e-14 * scale {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(m, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    // inverse iteration with a shift just below the spectrum
    let mut delta = 1e-10 * scale;
    let chol = loop {
        if let Some(c) = band_cholesky(m, lo - delta) {
            break c;
        }
        delta *= 10.0;
    };
    let mut v = vec![1.0 / (dim as f64).sqrt(); dim];
    for _ in 0..50 {
        let mut w = v.clone();
        cholesky_solve(&chol, &mut w);
        let nw = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        w.iter_mut().for_each(|x| *x /= nw);
        let diff = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = w;
        if diff < 1e-14 {
            break;
        }
    }
    let av = m.mul_vec(&v);
    let rq: f64 = av.iter().zip(&v).map(|(a, b)| a * b).sum();
    // the Rayleigh quotient is the more accurate eigenvalue when converged
    let e = if (rq - lambda).abs() <= 1e-8 * scale { rq } else { lambda };
    (e, v)
}
