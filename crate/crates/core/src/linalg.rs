//! Small dense helpers: nonnegative least squares and rank-revealing splits.

use nalgebra::{DMatrix, DVector, SVD};

/// Lawson–Hanson NNLS: `min ‖A x − b‖` subject to `x ≥ 0`. Returns `(x, b − A x)`.
pub(crate) fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let p = a.ncols();
    let mut x = DVector::zeros(p);
    if p == 0 {
        return (x, b.clone());
    }
    let scale = a.amax().max(b.amax()).max(1e-300);
    let tol = 1e-13 * scale * scale * (a.nrows().max(p) as f64);
    let mut passive = vec![false; p];
    let max_outer = 3 * p + 10;
    for _ in 0..max_outer {
        let r = b - a * &x;
        let w = a.transpose() * &r;
        let cand = (0..p)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = cand else { break };
        passive[j] = true;
        let mut inner = 0;
        loop {
            inner += 1;
            let idx: Vec<usize> = (0..p).filter(|&i| passive[i]).collect();
            let s_p = least_squares(&a.select_columns(idx.iter()), b);
            let mut s = DVector::zeros(p);
            for (t, &i) in idx.iter().enumerate() {
                s[i] = s_p[t];
            }
            if idx.iter().all(|&i| s[i] > 0.0) || inner > 3 * p {
                x = s;
                for (i, flag) in passive.iter_mut().enumerate() {
                    if !*flag {
                        x[i] = 0.0;
                    }
                }
                x.iter_mut().for_each(|v| *v = v.max(0.0));
                break;
            }
            let mut alpha = 1.0f64;
            for &i in &idx {
                if s[i] <= 0.0 {
                    let den = x[i] - s[i];
                    if den > 0.0 {
                        alpha = alpha.min(x[i] / den);
                    }
                }
            }
            x += (s - &x) * alpha;
            for &i in &idx {
                if x[i] <= 1e-15 * scale {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
        }
    }
    let r = b - a * &x;
    (x, r)
}

fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let svd = SVD::new(a.clone(), true, true);
    let smax = svd.singular_values.max();
    svd.solve(b, 1e-13 * smax.max(1e-300))
        .unwrap_or_else(|_| DVector::zeros(a.ncols()))
}

/// Orthonormal bases of the row space and the null space of `rows`.
pub(crate) struct RankSplit {
    pub rank: usize,
    /// `rank × dim`, orthonormal rows.
    pub row_basis: DMatrix<f64>,
    /// `(dim − rank) × dim`, orthonormal rows.
    pub null_basis: DMatrix<f64>,
}

/// Singular values below `rel_tol · σ_max` count as zero.
pub(crate) fn rank_split(rows: &DMatrix<f64>, rel_tol: f64) -> RankSplit {
    let dim = rows.ncols();
    let m = rows.nrows().max(dim);
    // pad with zero rows so the SVD yields a full right basis
    let mut padded = DMatrix::zeros(m, dim);
    padded.view_mut((0, 0), (rows.nrows(), dim)).copy_from(rows);
    let svd = SVD::new(padded, false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let smax = sv.first().copied().unwrap_or(0.0);
    let rank = if smax == 0.0 {
        0
    } else {
        sv.iter().filter(|&&s| s > rel_tol * smax).count()
    };
    let row_basis = DMatrix::from_fn(rank, dim, |i, j| vt[(order[i], j)]);
    let null_basis = DMatrix::from_fn(dim - rank, dim, |i, j| vt[(order[rank + i], j)]);
    RankSplit {
        rank,
        row_basis,
        null_basis,
    }
}

/// Reduced row echelon form of a basis (rows), pivoting from the last column
/// backwards. Each output row has a 1 at its pivot and 0 at the other pivots.
pub(crate) fn rref_from_back(basis: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let mut m = basis.clone();
    let (r, c) = m.shape();
    let mut row = 0;
    for col in (0..c).rev() {
        if row == r {
            break;
        }
        let piv = (row..r).max_by(|&i, &j| m[(i, col)].abs().total_cmp(&m[(j, col)].abs()));
        let Some(piv) = piv else { break };
        if m[(piv, col)].abs() <= tol {
            continue;
        }
        m.swap_rows(row, piv);
        let p = m[(row, col)];
        for j in 0..c {
            m[(row, j)] /= p;
        }
        for i in 0..r {
            if i != row {
                let f = m[(i, col)];
                if f != 0.0 {
                    for j in 0..c {
                        let v = m[(row, j)];
                        m[(i, j)] -= f * v;
                    }
                }
            }
        }
        row += 1;
    }
    m
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn normalized(a: &[f64]) -> Vec<f64> {
    let n = norm(a);
    if n == 0.0 {
        a.to_vec()
    } else {
        a.iter().map(|x| x / n).collect()
    }
}

/// Largest principal angle (radians) between the spans of two sets of vectors.
#[cfg(test)]
pub(crate) fn max_principal_angle(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    if a.len() != b.len() {
        return std::f64::consts::FRAC_PI_2;
    }
    if a.is_empty() {
        return 0.0;
    }
    let dim = a[0].len();
    let orth = |v: &[Vec<f64>]| {
        let m = DMatrix::from_fn(v.len(), dim, |i, j| v[i][j]);
        rank_split(&m, 1e-12).row_basis
    };
    let qa = orth(a);
    let qb = orth(b);
    if qa.nrows() != qb.nrows() {
        return std::f64::consts::FRAC_PI_2;
    }
    // sine of the largest angle: part of span(b) outside span(a)
    let resid = qb.transpose() - qa.transpose() * (&qa * qb.transpose());
    let s = SVD::new(resid, false, false).singular_values;
    s.max().clamp(0.0, 1.0).asin()
}
