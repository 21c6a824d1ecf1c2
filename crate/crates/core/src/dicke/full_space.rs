//! Reference implementation on the full `2ⁿ`-dimensional space.
//!
//! Computational basis states are bit strings; bit `i` of the index is the state of
//! site `i`, and `|0⟩` is the `+1` eigenvector of `Z`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::block::{check_stoquastic, StoqReport, SymmetricBlockMatrix};
use crate::error::{Error, Result};
use crate::types::{BellCoefficients, MeasurementParams, Setting};

/// Largest party count for dense full-space construction.
pub const MAX_FULL_SPACE_N: usize = 8;

fn check_n(n: usize, cap: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput("party count must be positive".into()));
    }
    if n > cap {
        return Err(Error::Resource(format!(
            "full-space construction is limited to n ≤ {cap}, got n = {n}"
        )));
    }
    Ok(())
}

/// `|D_n^k⟩` as a `2ⁿ` vector.
pub fn dicke_vector(n: usize, k: usize) -> DVector<f64> {
    let dim = 1usize << n;
    let mut v = DVector::zeros(dim);
    let idx: Vec<usize> = (0..dim).filter(|x| x.count_ones() as usize == k).collect();
    let amp = 1.0 / (idx.len() as f64).sqrt();
    for i in idx {
        v[i] = amp;
    }
    v
}

/// Columns are `|D^0⟩ … |D^n⟩`.
pub fn dicke_isometry(n: usize) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(1 << n, n + 1);
    for k in 0..=n {
        d.set_column(k, &dicke_vector(n, k));
    }
    d
}

/// Single-site matrix `cos a Z + sin a X` as `[[m00, m01], [m10, m11]]`.
fn site_matrix(params: &MeasurementParams, x: u8) -> [[f64; 2]; 2] {
    let (c, s) = params.cs(x);
    [[c, s], [s, -c]]
}

/// Ordered tuples of distinct sites.
fn distinct_tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    fn rec(n: usize, len: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for i in 0..n {
            if !cur.contains(&i) {
                cur.push(i);
                rec(n, len, cur, out);
                cur.pop();
            }
        }
    }
    rec(n, len, &mut cur, &mut out);
    out
}

/// Full-space PI measurement operator: sum over ordered tuples of distinct sites of
/// the tensor product of local measurements.
pub fn measurement_operator_full(
    setting: Setting,
    params: &MeasurementParams,
    n: usize,
) -> Result<DMatrix<f64>> {
    check_n(n, MAX_FULL_SPACE_N)?;
    let inputs = setting.inputs();
    let mats: Vec<[[f64; 2]; 2]> = inputs.iter().map(|&x| site_matrix(params, x)).collect();
    let dim = 1usize << n;
    let mut out = DMatrix::zeros(dim, dim);
    let tuples = distinct_tuples(n, inputs.len());
    let kk = inputs.len();
    for col in 0..dim {
        for t in &tuples {
            // expand the product on |col⟩ over the 2^K choices of output bits
            for choice in 0..(1usize << kk) {
                let mut row = col;
                let mut amp = 1.0;
                for (j, &site) in t.iter().enumerate() {
                    let b_in = (col >> site) & 1;
                    let b_out = (choice >> j) & 1;
                    amp *= mats[j][b_out][b_in];
                    if b_out != b_in {
                        row ^= 1 << site;
                    }
                }
                if amp != 0.0 {
                    out[(row, col)] += amp;
                }
            }
        }
    }
    Ok(out)
}

/// Full-space Bell operator `Σᵢ αᵢ Sᵢ`.
pub fn bell_operator_full(
    coeffs: &BellCoefficients,
    params: &MeasurementParams,
    n: usize,
) -> Result<DMatrix<f64>> {
    check_n(n, MAX_FULL_SPACE_N)?;
    let dim = 1usize << n;
    let mut out = DMatrix::zeros(dim, dim);
    for (s, a) in coeffs.iter() {
        if a != 0.0 && (s.size() as usize) <= n {
            out += measurement_operator_full(s, params, n)? * a;
        }
    }
    Ok(out)
}

/// `⟨D^k|B|D^l⟩` computed on the full space.
pub fn brute_force_block(
    coeffs: &BellCoefficients,
    params: &MeasurementParams,
    n: usize,
) -> Result<DMatrix<f64>> {
    let b = bell_operator_full(coeffs, params, n)?;
    let d = dicke_isometry(n);
    Ok(d.transpose() * b * d)
}

/// Computational-basis operator as sorted `(row, col, value)` triplets.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    pub dim: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseOperator {
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
        }
        m
    }

    /// Largest off-diagonal entry, if any is stored.
    pub fn max_off_diagonal(&self) -> Option<f64> {
        self.entries
            .iter()
            .filter(|(i, j, _)| i != j)
            .map(|e| e.2)
            .reduce(f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shift {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub struct Embedding {
    pub operator: SparseOperator,
    pub shift: f64,
    pub report: StoqReport,
}

/// Embeds a symmetric block into the computational basis as
/// `Σ_{kl} m_{kl} |D^k⟩⟨D^l| + c Π_sym`, where `Π_sym` projects onto the symmetric
/// subspace.
///
/// The auto shift is `c = −max(max diagonal, 0) − 1`.
pub fn embed_computational(
    m: &SymmetricBlockMatrix,
    n: usize,
    shift: Shift,
    tol: f64,
) -> Result<Embedding> {
    check_n(n, MAX_FULL_SPACE_N)?;
    if m.dim() != n + 1 {
        return Err(Error::Unsupported(format!(
            "embedding needs the symmetric block (dimension {}), got dimension {}",
            n + 1,
            m.dim()
        )));
    }
    let c = match shift {
        Shift::Auto => {
            let maxdiag = m.band(0).iter().copied().fold(f64::NEG_INFINITY, f64::max);
            -maxdiag.max(0.0) - 1.0
        }
        Shift::Fixed(c) => {
            if c > 0.0 {
                return Err(Error::InvalidInput(format!("shift must be ≤ 0, got {c}")));
            }
            c
        }
    };
    let dim = 1usize << n;
    // group computational states by excitation number
    let mut by_weight: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for x in 0..dim {
        by_weight[x.count_ones() as usize].push(x);
    }
    let norm = |k: usize| 1.0 / (by_weight[k].len() as f64).sqrt();
    let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for k in 0..=n {
        for l in 0..=n {
            let mut v = m.get(k, l);
            if k == l {
                v += c;
            }
            if v == 0.0 {
                continue;
            }
            let w = v * norm(k) * norm(l);
            for &i in &by_weight[k] {
                for &j in &by_weight[l] {
                    *acc.entry((i, j)).or_insert(0.0) += w;
                }
            }
        }
    }
    let entries: Vec<(usize, usize, f64)> = acc.into_iter().map(|((i, j), v)| (i, j, v)).collect();
    let op = SparseOperator { dim, entries };
    let worst = op
        .entries
        .iter()
        .filter(|(i, j, _)| i != j)
        .max_by(|a, b| a.2.total_cmp(&b.2));
    let report = StoqReport {
        stoquastic: worst.is_none_or(|w| w.2 <= tol),
        worst_offender: worst.map(|&(i, j, value)| super::block::Offender {
            d: i.abs_diff(j),
            k: i.min(j),
            value,
        }),
        tolerance: tol,
    };
    Ok(Embedding {
        operator: op,
        shift: c,
        report,
    })
}

/// Whether the Dicke-basis block is stoquastic at the default tolerance.
pub fn is_block_stoquastic(m: &SymmetricBlockMatrix) -> bool {
    check_stoquastic(m, super::block::DEFAULT_STOQ_TOL).stoquastic
}

/// Largest deviation between the sorted full-space spectra at `(φ, θ)` and at
/// `(φ+Δ, θ+Δ)`.
pub fn spectrum_shift_check(
    coeffs: &BellCoefficients,
    params: &MeasurementParams,
    delta: f64,
    n: usize,
) -> Result<f64> {
    check_n(n, 7)?;
    let a = bell_operator_full(coeffs, params, n)?;
    let b = bell_operator_full(coeffs, &params.rotated(delta)?, n)?;
    let mut ea: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    let mut eb: Vec<f64> = SymmetricEigen::new(b).eigenvalues.iter().copied().collect();
    ea.sort_by(f64::total_cmp);
    eb.sort_by(f64::total_cmp);
    Ok(ea
        .iter()
        .zip(&eb)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}
