//! The cone of Bell coefficients whose symmetric block is stoquastic.
//!
//! Each off-diagonal entry `(k, k+d)` of the block is linear in `α`, so
//! stoquasticity is a homogeneous system `rows · α ≤ 0`. The cone is described
//! both by its hyperplanes and by its extremal rays plus a lineality basis.

mod analytic;
mod rays;
mod reduce;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dicke::g;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, rank_split, rref_from_back};
use crate::types::{coefficient_count, BellCoefficients, MeasurementParams, Setting};

pub use analytic::{
    analytic_three_body_lines, analytic_two_body, three_body_witness, two_body_ray_formulas,
};
pub use rays::{rays, RayMethod, RaySet};
pub use reduce::{reduce_irredundant, Reduced, RowStatus};

/// Default feasibility tolerance on normalized rows.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Singular values below this fraction of the largest count as zero.
pub const RANK_TOL: f64 = 1e-10;

/// `(d, k)`: the row comes from block entry `(k, k+d)`.
pub type RowLabel = (usize, usize);

/// Constraints `row · α ≤ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperplaneSet {
    n: usize,
    order: u8,
    rows: Vec<Vec<f64>>,
    labels: Vec<Vec<RowLabel>>,
    prefactor_stripped: bool,
}

impl HyperplaneSet {
    /// Rows without provenance labels. Zero rows are rejected.
    pub fn from_rows(n: usize, order: u8, rows: Vec<Vec<f64>>) -> Result<Self> {
        let labels = vec![Vec::new(); rows.len()];
        Self::with_labels(n, order, rows, labels, false)
    }

    fn with_labels(
        n: usize,
        order: u8,
        rows: Vec<Vec<f64>>,
        labels: Vec<Vec<RowLabel>>,
        prefactor_stripped: bool,
    ) -> Result<Self> {
        let dim = coefficient_count(order);
        if dim == 0 {
            return Err(Error::InvalidInput(format!("unsupported order {order}")));
        }
        for r in &rows {
            if r.len() != dim {
                return Err(Error::InvalidInput(format!(
                    "row of length {} for order {order} (expected {dim})",
                    r.len()
                )));
            }
            if r.iter().any(|v| !v.is_finite()) || norm(r) == 0.0 {
                return Err(Error::InvalidInput("rows must be finite and nonzero".into()));
            }
        }
        Ok(Self {
            n,
            order,
            rows,
            labels,
            prefactor_stripped,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn dim(&self) -> usize {
        coefficient_count(self.order)
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn labels(&self) -> &[Vec<RowLabel>] {
        &self.labels
    }

    pub fn prefactor_stripped(&self) -> bool {
        self.prefactor_stripped
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub(crate) fn normalized_rows(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| crate::linalg::normalized(r)).collect()
    }

    pub(crate) fn matrix(&self) -> DMatrix<f64> {
        let rows = self.normalized_rows();
        DMatrix::from_fn(rows.len(), self.dim(), |i, j| rows[i][j])
    }

    /// Largest product of a unit-normalized row with `v` (−∞ when empty).
    pub(crate) fn max_normalized_product(&self, v: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|r| dot(r, v) / norm(r))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn subset(&self, keep: &[usize]) -> Self {
        Self {
            n: self.n,
            order: self.order,
            rows: keep.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: keep.iter().map(|&i| self.labels[i].clone()).collect(),
            prefactor_stripped: self.prefactor_stripped,
        }
    }
}

fn rows_equal(a: &[f64], b: &[f64]) -> bool {
    let scale = norm(a).max(norm(b));
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12 * scale)
}

/// One row per block entry `(k, k+d)`, `1 ≤ d ≤ K`, `0 ≤ k ≤ n−d`, with the
/// positive prefactor `Γ(k)⋯Γ(k+d−1)` divided out. Vanishing rows are dropped and
/// duplicates merged (labels are kept).
pub fn hyperplane_matrix(n: usize, order: u8, params: &MeasurementParams) -> Result<HyperplaneSet> {
    if !(1..=3).contains(&order) {
        return Err(Error::InvalidInput(format!("order must be 1, 2 or 3, got {order}")));
    }
    if n == 0 {
        return Err(Error::InvalidInput("party count must be positive".into()));
    }
    let settings = Setting::all(order);
    let mut raw: Vec<(Vec<f64>, RowLabel)> = Vec::new();
    for d in 1..=(order as usize).min(n) {
        for k in 0..=n - d {
            let pref: f64 = (0..d).map(|j| g((k + j) as i64, n)).product();
            let row: Vec<f64> = settings
                .iter()
                .map(|&s| crate::dicke::band_raw(s, d, k, n, params) / pref)
                .collect();
            raw.push((row, (d, k)));
        }
    }
    let scale = raw.iter().map(|(r, _)| norm(r)).fold(0.0, f64::max);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<Vec<RowLabel>> = Vec::new();
    for (r, lab) in raw {
        if norm(&r) <= 1e-14 * scale || scale == 0.0 {
            continue;
        }
        // exact zeros from cancellation are noise at this scale
        let r: Vec<f64> = r
            .iter()
            .map(|&v| if v.abs() <= 1e-15 * scale { 0.0 } else { v })
            .collect();
        match rows.iter().position(|u| rows_equal(u, &r)) {
            Some(i) => labels[i].push(lab),
            None => {
                rows.push(r);
                labels.push(vec![lab]);
            }
        }
    }
    HyperplaneSet::with_labels(n, order, rows, labels, true)
}

/// Unit-norm basis of the null space of the rows, in reduced echelon form
/// (pivots taken from the last coordinate backwards), orthonormalized, with the
/// first nonzero component positive.
pub fn lines(h: &HyperplaneSet) -> Vec<Vec<f64>> {
    lines_with_tol(h, RANK_TOL)
}

pub(crate) fn lines_with_tol(h: &HyperplaneSet, rank_tol: f64) -> Vec<Vec<f64>> {
    let split = rank_split(&h.matrix(), rank_tol);
    if split.null_basis.nrows() == 0 {
        return Vec::new();
    }
    let echelon = rref_from_back(&split.null_basis, 1e-8);
    let mut out: Vec<Vec<f64>> = Vec::new();
    for i in 0..echelon.nrows() {
        let mut v: Vec<f64> = echelon.row(i).iter().copied().collect();
        for u in &out {
            let p = dot(&v, u);
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= p * b);
        }
        let nv = norm(&v);
        v.iter_mut().for_each(|a| {
            *a /= nv;
            if a.abs() < 1e-15 {
                *a = 0.0;
            }
        });
        out.push(v);
    }
    out.iter_mut().for_each(|v| canonical_line_sign(v));
    out
}

pub(crate) fn canonical_line_sign(v: &mut [f64]) {
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Lexicographic order on components rounded to 6 decimals.
pub(crate) fn sort_vectors(v: &mut [Vec<f64>]) {
    let key = |x: &Vec<f64>| -> Vec<i64> { x.iter().map(|c| (c * 1e6).round() as i64).collect() };
    v.sort_by_key(key);
}

/// Stoquasticity cone at fixed `(n, K, φ, θ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeDescription {
    pub n: usize,
    pub order: u8,
    pub params: MeasurementParams,
    /// Irredundant hyperplanes.
    pub hyperplanes: HyperplaneSet,
    pub rays: Vec<Vec<f64>>,
    pub lines: Vec<Vec<f64>>,
    pub tolerance: f64,
    /// Lineality exceeds the generic value for this `(n, K)`.
    pub degenerate: bool,
}

#[derive(Serialize, Deserialize)]
struct ConeFile {
    n: usize,
    #[serde(rename = "K")]
    order: u8,
    phi: f64,
    theta: f64,
    hyperplanes: Vec<Vec<f64>>,
    rays: Vec<Vec<f64>>,
    lines: Vec<Vec<f64>>,
    tolerance: f64,
}

impl Serialize for ConeDescription {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ConeFile {
            n: self.n,
            order: self.order,
            phi: self.params.phi(),
            theta: self.params.theta(),
            hyperplanes: self.hyperplanes.rows().to_vec(),
            rays: self.rays.clone(),
            lines: self.lines.clone(),
            tolerance: self.tolerance,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ConeDescription {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let f = ConeFile::deserialize(d)?;
        let params = MeasurementParams::new(f.phi, f.theta).map_err(D::Error::custom)?;
        let hyperplanes =
            HyperplaneSet::from_rows(f.n, f.order, f.hyperplanes).map_err(D::Error::custom)?;
        let dim = hyperplanes.dim();
        if f.rays.iter().chain(&f.lines).any(|v| v.len() != dim) {
            return Err(D::Error::custom(format!("generators must have length {dim}")));
        }
        Ok(ConeDescription {
            n: f.n,
            order: f.order,
            params,
            hyperplanes,
            rays: f.rays,
            lines: f.lines,
            tolerance: f.tolerance,
            degenerate: false,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeOptions {
    /// Feasibility tolerance on unit-normalized rows.
    pub tolerance: f64,
    pub rank_tol: f64,
    /// Proceed (and flag) when the lineality exceeds its generic value.
    pub allow_degenerate: bool,
    pub method: RayMethod,
}

impl Default for ConeOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOL,
            rank_tol: RANK_TOL,
            allow_degenerate: false,
            method: RayMethod::DoubleDescription,
        }
    }
}

/// Hyperplanes → irredundant subset → lines and rays, re-checked against the
/// unreduced hyperplanes.
pub fn cone_description(
    n: usize,
    order: u8,
    params: &MeasurementParams,
    opts: &ConeOptions,
) -> Result<ConeDescription> {
    let full = hyperplane_matrix(n, order, params)?;
    let reduced = reduce_irredundant(&full)?;
    let line_set = lines_with_tol(&reduced.hyperplanes, opts.rank_tol);
    let ray_set = rays(&reduced.hyperplanes, opts)?;
    for r in &ray_set.rays {
        let m = full.max_normalized_product(r);
        if m > opts.tolerance {
            return Err(Error::ContractViolation(format!(
                "ray violates an unreduced hyperplane by {m:e}"
            )));
        }
    }
    for l in &line_set {
        let m = full
            .rows()
            .iter()
            .map(|r| (dot(r, l) / norm(r)).abs())
            .fold(0.0, f64::max);
        if m > opts.tolerance {
            return Err(Error::ContractViolation(format!(
                "line leaves an unreduced hyperplane by {m:e}"
            )));
        }
    }
    Ok(ConeDescription {
        n,
        order,
        params: *params,
        hyperplanes: reduced.hyperplanes,
        rays: ray_set.rays,
        lines: line_set,
        tolerance: opts.tolerance,
        degenerate: ray_set.degenerate || angles_degenerate(params),
    })
}

/// `sin φ = 0`, `sin θ = 0` or `φ ≡ θ (mod π)`.
pub fn angles_degenerate(p: &MeasurementParams) -> bool {
    let e = 1e-9;
    p.phi().sin().abs() < e || p.theta().sin().abs() < e || (p.phi() - p.theta()).sin().abs() < e
}

/// `(member, margin)` where the margin is the largest row product.
pub fn membership(alpha: &BellCoefficients, h: &HyperplaneSet, tol: f64) -> Result<(bool, f64)> {
    let a = alpha.lift(h.order()).map_err(|_| {
        Error::InvalidInput(format!(
            "coefficients of order {} do not fit a cone of order {}",
            alpha.order(),
            h.order()
        ))
    })?;
    let margin = h
        .rows()
        .iter()
        .map(|r| dot(r, a.values()))
        .fold(f64::NEG_INFINITY, f64::max);
    let margin = if h.is_empty() { 0.0 } else { margin };
    Ok((margin <= tol, margin))
}

/// Weights on rays (nonnegative) and lines (free).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeCoordinates {
    pub ray_weights: Vec<f64>,
    pub line_weights: Vec<f64>,
}

impl ConeCoordinates {
    pub fn zeros(cone: &ConeDescription) -> Self {
        Self {
            ray_weights: vec![0.0; cone.rays.len()],
            line_weights: vec![0.0; cone.lines.len()],
        }
    }

    pub fn as_vec(&self) -> Vec<f64> {
        self.ray_weights.iter().chain(&self.line_weights).copied().collect()
    }
}

/// `α = Σ λᵢ rᵢ + Σ μⱼ lⱼ`.
pub fn coords_to_alpha(coords: &ConeCoordinates, cone: &ConeDescription) -> Result<BellCoefficients> {
    if coords.ray_weights.len() != cone.rays.len() || coords.line_weights.len() != cone.lines.len() {
        return Err(Error::InvalidInput(format!(
            "expected {} ray and {} line weights, got {} and {}",
            cone.rays.len(),
            cone.lines.len(),
            coords.ray_weights.len(),
            coords.line_weights.len()
        )));
    }
    if let Some(w) = coords.ray_weights.iter().find(|w| !(**w >= 0.0)) {
        return Err(Error::ContractViolation(format!("ray weight {w} is negative")));
    }
    let dim = coefficient_count(cone.order);
    let mut a = vec![0.0; dim];
    for (w, r) in coords
        .ray_weights
        .iter()
        .zip(&cone.rays)
        .chain(coords.line_weights.iter().zip(&cone.lines))
    {
        a.iter_mut().zip(r).for_each(|(x, y)| *x += w * y);
    }
    BellCoefficients::new(a)
}

/// Lineality dimension of `(n, K)` at a generic angle pair.
pub(crate) fn generic_lineality(n: usize, order: u8) -> Result<usize> {
    let p = MeasurementParams::new(0.618_033_988_7, 2.236_067_977_5)?;
    let h = hyperplane_matrix(n, order, &p)?;
    Ok(h.dim() - rank_split(&h.matrix(), RANK_TOL).rank)
}

#[cfg(test)]
mod tests;
