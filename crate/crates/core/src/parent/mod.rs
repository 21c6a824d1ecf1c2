//! Parent Hamiltonians `𝟙 − |φ⟩⟨φ|` of nonnegative symmetric states, and
//! decomposition of PI operators into weight-class Pauli sums `T_w`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dicke::full_space::{dicke_isometry, MAX_FULL_SPACE_N};
use crate::dicke::{Pauli, SymmetricBlockMatrix};
use crate::error::{Error, Result};

pub const NORM_TOL: f64 = 1e-12;
pub const DEFAULT_CLASS_TOL: f64 = 1e-10;

/// Real nonnegative amplitudes on `|D^0⟩ … |D^n⟩`, unit norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DickeState {
    amplitudes: Vec<f64>,
}

impl DickeState {
    pub fn new(amplitudes: Vec<f64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidInput("state needs at least one amplitude".into()));
        }
        if let Some((k, v)) = amplitudes.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
            return Err(Error::ContractViolation(format!("amplitude {k} is {v}, expected ≥ 0")));
        }
        let norm: f64 = amplitudes.iter().map(|v| v * v).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidInput(format!("squared norm is {norm}, expected 1")));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales to unit norm first.
    pub fn normalized(amplitudes: Vec<f64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidInput("amplitudes have zero or non-finite norm".into()));
        }
        Self::new(amplitudes.into_iter().map(|v| v / norm).collect())
    }

    pub fn ghz(n: usize) -> Self {
        let mut a = vec![0.0; n + 1];
        a[0] = std::f64::consts::FRAC_1_SQRT_2;
        a[n] = std::f64::consts::FRAC_1_SQRT_2;
        Self { amplitudes: a }
    }

    pub fn n(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }
}

impl TryFrom<Vec<f64>> for DickeState {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<DickeState> for Vec<f64> {
    fn from(s: DickeState) -> Self {
        s.amplitudes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianProfile {
    pub n: usize,
    pub mu: f64,
    /// Variance parameter: amplitudes go as `exp(−(k−μ)²/4σ)`.
    pub sigma: f64,
}

/// Discretely normalised Gaussian amplitudes.
pub fn gaussian_state(p: &GaussianProfile) -> Result<DickeState> {
    if !(p.sigma > 0.0 && p.sigma.is_finite()) {
        return Err(Error::Domain(format!("sigma must be positive, got {}", p.sigma)));
    }
    if !p.mu.is_finite() {
        return Err(Error::Domain("mu must be finite".into()));
    }
    let expo: Vec<f64> = (0..=p.n)
        .map(|k| -(k as f64 - p.mu).powi(2) / (4.0 * p.sigma))
        .collect();
    let top = expo.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    DickeState::normalized(expo.into_iter().map(|e| (e - top).exp()).collect())
}

/// `𝟙 − φφᵀ` on the symmetric block, full bandwidth.
pub fn parent_hamiltonian(state: &DickeState) -> SymmetricBlockMatrix {
    let a = state.amplitudes();
    let dim = a.len();
    let bands = (0..dim)
        .map(|d| {
            (0..dim - d)
                .map(|k| if d == 0 { 1.0 - a[k] * a[k] } else { -a[k] * a[k + d] })
                .collect()
        })
        .collect();
    SymmetricBlockMatrix::from_bands(bands).expect("consistent band lengths")
}

fn check_full_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput("party count must be positive".into()));
    }
    if n > MAX_FULL_SPACE_N {
        return Err(Error::Resource(format!(
            "full-space decomposition is limited to n ≤ {MAX_FULL_SPACE_N}, got n = {n}"
        )));
    }
    Ok(())
}

/// `Σ m_kl |D^k⟩⟨D^l|` on the full space (zero off the symmetric subspace).
pub fn embed_block(m: &SymmetricBlockMatrix, n: usize) -> Result<DMatrix<Complex64>> {
    check_full_n(n)?;
    if m.dim() != n + 1 {
        return Err(Error::InvalidInput(format!(
            "block of dimension {} is not the symmetric block for n = {n}",
            m.dim()
        )));
    }
    let d = dicke_isometry(n);
    Ok((&d * m.to_dense() * d.transpose()).map(|x| Complex64::new(x, 0.0)))
}

/// `𝟙 − |φ⟩⟨φ|` on the full `2ⁿ` space.
pub fn parent_hamiltonian_full(state: &DickeState) -> Result<DMatrix<Complex64>> {
    let n = state.n();
    check_full_n(n)?;
    let d = dicke_isometry(n);
    let phi = &d * nalgebra::DVector::from_column_slice(state.amplitudes());
    let h = DMatrix::identity(1 << n, 1 << n) - &phi * phi.transpose();
    Ok(h.map(|x| Complex64::new(x, 0.0)))
}

/// One weight class: `w = (#X, #Y, #Z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliWeightTerm {
    pub w: [usize; 3],
    #[serde(rename = "K")]
    pub k: usize,
    pub coeff: f64,
}

/// Per-site letters of Pauli string `idx` (base 4; 0 = I, 1 = X, 2 = Y, 3 = Z).
fn string_masks(idx: usize, n: usize) -> (usize, usize, [usize; 3]) {
    let (mut x, mut z, mut w) = (0usize, 0usize, [0usize; 3]);
    for site in 0..n {
        match (idx >> (2 * site)) & 3 {
            1 => {
                x |= 1 << site;
                w[0] += 1;
            }
            2 => {
                x |= 1 << site;
                z |= 1 << site;
                w[1] += 1;
            }
            3 => {
                z |= 1 << site;
                w[2] += 1;
            }
            _ => {}
        }
    }
    (x, z, w)
}

/// Phase of `P|b⟩ = phase · |b ⊕ x⟩`.
fn string_phase(b: usize, z: usize, ny: usize) -> Complex64 {
    let sign = if (b & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
    Complex64::i().powu(ny as u32) * sign
}

/// Coefficients `Tr(A P)/2ⁿ` aggregated per weight class. Fails if a class is
/// not constant within `tol` (relative to the largest coefficient).
pub fn decompose_full(a: &DMatrix<Complex64>, n: usize, tol: f64) -> Result<Vec<PauliWeightTerm>> {
    check_full_n(n)?;
    let dim = 1usize << n;
    if a.nrows() != dim || a.ncols() != dim {
        return Err(Error::InvalidInput(format!("operator must be {dim}×{dim}")));
    }
    let coeffs: Vec<([usize; 3], Complex64)> = (0..1usize << (2 * n))
        .into_par_iter()
        .map(|idx| {
            let (x, z, w) = string_masks(idx, n);
            let tr: Complex64 = (0..dim).map(|b| a[(b, b ^ x)] * string_phase(b, z, w[1])).sum();
            (w, tr / dim as f64)
        })
        .collect();
    let scale = coeffs.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max).max(1.0);
    let mut classes: BTreeMap<[usize; 3], (f64, f64, f64)> = BTreeMap::new();
    for (w, c) in &coeffs {
        if c.im.abs() > tol * scale {
            return Err(Error::InvalidInput(format!(
                "operator is not Hermitian: class {w:?} has imaginary coefficient {}",
                c.im
            )));
        }
        let e = classes.entry(*w).or_insert((c.re, c.re, c.re));
        e.1 = e.1.min(c.re);
        e.2 = e.2.max(c.re);
    }
    let mut out = Vec::new();
    for (w, (first, lo, hi)) in classes {
        if hi - lo > tol * scale {
            return Err(Error::NotPermutationInvariant { w, spread: hi - lo });
        }
        if first.abs() > tol * scale {
            out.push(PauliWeightTerm { w, k: w.iter().sum(), coeff: first });
        }
    }
    out.sort_by_key(|t| (t.k, t.w[0], t.w[1]));
    Ok(out)
}

/// Decomposition of a symmetric block after embedding via Dicke outer products.
pub fn decompose_block(m: &SymmetricBlockMatrix, n: usize, tol: f64) -> Result<Vec<PauliWeightTerm>> {
    decompose_full(&embed_block(m, n)?, n, tol)
}

/// `T_w`: sum of all Pauli strings with the given letter counts.
pub fn t_operator(w: [usize; 3], n: usize) -> Result<DMatrix<Complex64>> {
    check_full_n(n)?;
    if w.iter().sum::<usize>() > n {
        return Err(Error::InvalidInput(format!("weight {w:?} exceeds n = {n}")));
    }
    let dim = 1usize << n;
    let mut out = DMatrix::zeros(dim, dim);
    for idx in 0..1usize << (2 * n) {
        let (x, z, ww) = string_masks(idx, n);
        if ww != w {
            continue;
        }
        for b in 0..dim {
            out[(b ^ x, b)] += string_phase(b, z, w[1]);
        }
    }
    Ok(out)
}

/// `Σ γ_w T_w` on the full space.
pub fn reconstruct_full(terms: &[PauliWeightTerm], n: usize) -> Result<DMatrix<Complex64>> {
    check_full_n(n)?;
    let dim = 1usize << n;
    let mut out = DMatrix::zeros(dim, dim);
    for t in terms {
        out += t_operator(t.w, n)? * Complex64::new(t.coeff, 0.0);
    }
    Ok(out)
}

/// `Σ γ_w T_w` restricted to the symmetric block.
pub fn reconstruct_block(terms: &[PauliWeightTerm], n: usize) -> Result<SymmetricBlockMatrix> {
    let full = reconstruct_full(terms, n)?;
    let d = dicke_isometry(n).map(|x| Complex64::new(x, 0.0));
    let b = d.transpose() * full * d;
    SymmetricBlockMatrix::from_dense(&b.map(|x| x.re), n, 1e-9)
}

/// Largest `K` carrying a coefficient above `coeff_tol`; 0 if none.
pub fn max_order(terms: &[PauliWeightTerm], coeff_tol: f64) -> usize {
    terms
        .iter()
        .filter(|t| t.coeff.abs() > coeff_tol)
        .map(|t| t.k)
        .max()
        .unwrap_or(0)
}

/// Single-site Pauli on site `i` of `n` (identity elsewhere).
pub fn site_pauli(p: Pauli, site: usize, n: usize) -> Result<DMatrix<Complex64>> {
    check_full_n(n)?;
    if site >= n {
        return Err(Error::InvalidInput(format!("site {site} out of range for n = {n}")));
    }
    let letter = match p {
        Pauli::X => 1usize,
        Pauli::Y => 2,
        Pauli::Z => 3,
    };
    let (x, z, w) = string_masks(letter << (2 * site), n);
    let dim = 1usize << n;
    let mut out = DMatrix::zeros(dim, dim);
    for b in 0..dim {
        out[(b ^ x, b)] = string_phase(b, z, w[1]);
    }
    Ok(out)
}
