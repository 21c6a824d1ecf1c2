use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::elements::band_raw;
use crate::error::{Error, Result};
use crate::types::{BellCoefficients, BlockSpec, MeasurementParams, Setting};

/// A real symmetric banded matrix stored by diagonal offset.
///
/// `bands[d][k]` is the entry `(k, k+d)`; band `d` has length `dim − d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBlock")]
pub struct SymmetricBlockMatrix {
    dim: usize,
    bands: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawBlock {
    dim: usize,
    bands: Vec<Vec<f64>>,
}

impl TryFrom<RawBlock> for SymmetricBlockMatrix {
    type Error = Error;
    fn try_from(r: RawBlock) -> Result<Self> {
        let m = SymmetricBlockMatrix::from_bands(r.bands)?;
        if m.dim != r.dim {
            return Err(Error::InvalidInput(format!(
                "declared dim {} does not match band length {}",
                r.dim, m.dim
            )));
        }
        Ok(m)
    }
}

impl SymmetricBlockMatrix {
    pub fn zeros(dim: usize, bandwidth: usize) -> Self {
        let bw = bandwidth.min(dim.saturating_sub(1));
        Self {
            dim,
            bands: (0..=bw).map(|d| vec![0.0; dim - d]).collect(),
        }
    }

    pub fn from_bands(bands: Vec<Vec<f64>>) -> Result<Self> {
        let dim = bands
            .first()
            .map(|b| b.len())
            .ok_or_else(|| Error::InvalidInput("at least the diagonal band is required".into()))?;
        if dim == 0 {
            return Err(Error::InvalidInput("empty matrix".into()));
        }
        for (d, b) in bands.iter().enumerate() {
            if d >= dim && !b.is_empty() || d < dim && b.len() != dim - d {
                return Err(Error::InvalidInput(format!(
                    "band {d} has length {}, expected {}",
                    b.len(),
                    dim.saturating_sub(d)
                )));
            }
            if b.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("band {d} has non-finite entries")));
            }
        }
        let mut bands = bands;
        bands.truncate(dim);
        Ok(Self { dim, bands })
    }

    /// Banded copy of a dense symmetric matrix. Entries beyond `bandwidth` must
    /// vanish within `tol`.
    pub fn from_dense(m: &DMatrix<f64>, bandwidth: usize, tol: f64) -> Result<Self> {
        let dim = m.nrows();
        if m.ncols() != dim || dim == 0 {
            return Err(Error::InvalidInput("matrix must be square and nonempty".into()));
        }
        let mut out = Self::zeros(dim, bandwidth);
        for i in 0..dim {
            for j in 0..dim {
                if (m[(i, j)] - m[(j, i)]).abs() > tol {
                    return Err(Error::InvalidInput(format!("matrix not symmetric at ({i}, {j})")));
                }
                let d = i.abs_diff(j);
                if d > bandwidth {
                    if m[(i, j)].abs() > tol {
                        return Err(Error::InvalidInput(format!(
                            "entry ({i}, {j}) lies outside bandwidth {bandwidth}"
                        )));
                    }
                } else if i <= j {
                    out.bands[d][i] = m[(i, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.bands.len() - 1
    }

    pub fn bands(&self) -> &[Vec<f64>] {
        &self.bands
    }

    pub fn band(&self, d: usize) -> &[f64] {
        self.bands.get(d).map(|b| b.as_slice()).unwrap_or(&[])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, d) = (i.min(j), i.abs_diff(j));
        self.bands.get(d).and_then(|b| b.get(lo)).copied().unwrap_or(0.0)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (d, b) in self.bands.iter().enumerate() {
            for (k, &v) in b.iter().enumerate() {
                m[(k, k + d)] = v;
                m[(k + d, k)] = v;
            }
        }
        m
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.bands[0].iter().zip(x).map(|(a, b)| a * b).collect();
        for (d, b) in self.bands.iter().enumerate().skip(1) {
            for (k, &v) in b.iter().enumerate() {
                y[k] += v * x[k + d];
                y[k + d] += v * x[k];
            }
        }
        y
    }

    /// Maximum absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.bands
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.bands
            .iter()
            .enumerate()
            .map(|(d, b)| {
                let w = if d == 0 { 1.0 } else { 2.0 };
                w * b.iter().map(|v| v * v).sum::<f64>()
            })
            .sum::<f64>()
            .sqrt()
    }

    pub(crate) fn add_scaled(&mut self, other: &SymmetricBlockMatrix, t: f64) {
        for (a, b) in self.bands.iter_mut().zip(&other.bands) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += t * y;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Offender {
    pub d: usize,
    pub k: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoqReport {
    pub stoquastic: bool,
    /// Largest off-diagonal entry, if there is any off-diagonal entry at all.
    pub worst_offender: Option<Offender>,
    pub tolerance: f64,
}

pub const DEFAULT_STOQ_TOL: f64 = 1e-10;

/// Off-diagonal sign check: stoquastic iff every band entry with `d ≥ 1` is `≤ tol`.
pub fn check_stoquastic(m: &SymmetricBlockMatrix, tol: f64) -> StoqReport {
    let mut worst: Option<Offender> = None;
    for (d, b) in m.bands().iter().enumerate().skip(1) {
        for (k, &value) in b.iter().enumerate() {
            if worst.is_none_or(|w| value > w.value) {
                worst = Some(Offender { d, k, value });
            }
        }
    }
    StoqReport {
        stoquastic: worst.is_none_or(|w| w.value <= tol),
        worst_offender: worst,
        tolerance: tol,
    }
}

/// The block of one PI measurement operator.
pub fn measurement_block(
    setting: Setting,
    params: &MeasurementParams,
    block: BlockSpec,
) -> SymmetricBlockMatrix {
    let tj = block.two_j();
    let dim = tj + 1;
    let bw = setting.size() as usize;
    let mut m = SymmetricBlockMatrix::zeros(dim, bw);
    for d in 0..=bw.min(dim - 1) {
        for k in 0..dim - d {
            m.bands[d][k] = band_raw(setting, d, k, tj, params);
        }
    }
    m
}

/// `Σᵢ αᵢ Sᵢ` restricted to the block, with bandwidth equal to the order.
pub fn build_block(
    coeffs: &BellCoefficients,
    params: &MeasurementParams,
    block: BlockSpec,
) -> SymmetricBlockMatrix {
    let mut m = SymmetricBlockMatrix::zeros(block.dim(), coeffs.order() as usize);
    for (s, a) in coeffs.iter() {
        if a != 0.0 {
            m.add_scaled(&measurement_block(s, params, block), a);
        }
    }
    m
}

/// Precomputed measurement blocks for repeated assembly at fixed angles.
#[derive(Debug, Clone)]
pub struct MeasurementBasis {
    order: u8,
    dim: usize,
    blocks: Vec<SymmetricBlockMatrix>,
}

impl MeasurementBasis {
    pub fn new(order: u8, params: &MeasurementParams, block: BlockSpec) -> Self {
        Self {
            order,
            dim: block.dim(),
            blocks: Setting::all(order)
                .into_iter()
                .map(|s| measurement_block(s, params, block))
                .collect(),
        }
    }

    pub fn combine(&self, alpha: &[f64]) -> SymmetricBlockMatrix {
        let mut m = SymmetricBlockMatrix::zeros(self.dim, self.order as usize);
        for (b, &a) in self.blocks.iter().zip(alpha) {
            if a != 0.0 {
                m.add_scaled(b, a);
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dicke::elements::g;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn reference_alpha() -> BellCoefficients {
        BellCoefficients::new(vec![-2.0, 0.0, 0.5, -1.0, 0.5]).unwrap()
    }

    #[test]
    fn reference_bands_at_optimal_angles() {
        let pr = MeasurementParams::new(PI / 6.0, 5.0 * PI / 6.0).unwrap();
        let m = build_block(&reference_alpha(), &pr, BlockSpec::symmetric(10).unwrap());
        assert_eq!(m.bandwidth(), 2);
        for (k, v) in m.band(1).iter().enumerate() {
            assert_relative_eq!(*v, -g(k as i64, 10), epsilon = 1e-12);
        }
        for v in m.band(2) {
            assert!(v.abs() < 1e-12);
        }
        assert!(check_stoquastic(&m, DEFAULT_STOQ_TOL).stoquastic);
    }

    #[test]
    fn simple_blocks() {
        let pr = MeasurementParams::new(PI / 2.0, 0.0).unwrap();
        let b = BlockSpec::symmetric(6).unwrap();
        let a = BellCoefficients::new(vec![-1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let m = build_block(&a, &pr, b);
        for (k, v) in m.band(1).iter().enumerate() {
            assert_relative_eq!(*v, -g(k as i64, 6), epsilon = 1e-12);
        }
        let r = check_stoquastic(&m, DEFAULT_STOQ_TOL);
        assert!(r.stoquastic);
        let m = build_block(&a.scaled(-1.0).unwrap(), &pr, b);
        let r = check_stoquastic(&m, DEFAULT_STOQ_TOL);
        assert!(!r.stoquastic);
        let w = r.worst_offender.unwrap();
        assert_eq!(w.d, 1);
        assert_relative_eq!(w.value, g(w.k as i64, 6), epsilon = 1e-12);
        let z = build_block(&BellCoefficients::zeros(3).unwrap(), &pr, b);
        assert_eq!(z.max_abs(), 0.0);
        assert!(check_stoquastic(&z, 0.0).stoquastic);
    }

    #[test]
    fn one_by_one_has_no_offender() {
        let m = SymmetricBlockMatrix::from_bands(vec![vec![3.0]]).unwrap();
        let r = check_stoquastic(&m, 0.0);
        assert!(r.stoquastic);
        assert!(r.worst_offender.is_none());
    }

    #[test]
    fn json_shape() {
        let m = SymmetricBlockMatrix::from_bands(vec![vec![1.0, 2.0], vec![-0.5]]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"dim":2,"bands":[[1.0,2.0],[-0.5]]}"#);
        let back: SymmetricBlockMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<SymmetricBlockMatrix>(r#"{"dim":3,"bands":[[1.0,2.0]]}"#)
            .is_err());
        assert!(serde_json::from_str::<SymmetricBlockMatrix>(r#"{"dim":2,"bands":[[1.0,2.0],[1.0,1.0]]}"#)
            .is_err());
    }

    #[test]
    fn dense_round_trip() {
        let m = SymmetricBlockMatrix::from_bands(vec![
            vec![1.0, 2.0, 3.0, 4.0],
            vec![0.1, 0.2, 0.3],
            vec![-1.0, -2.0],
        ])
        .unwrap();
        let d = m.to_dense();
        assert_eq!(SymmetricBlockMatrix::from_dense(&d, 2, 0.0).unwrap(), m);
        assert!(SymmetricBlockMatrix::from_dense(&d, 1, 0.0).is_err());
        let x = [1.0, -1.0, 0.5, 2.0];
        let y = m.mul_vec(&x);
        let yd = &d * nalgebra::DVector::from_column_slice(&x);
        for i in 0..4 {
            assert_relative_eq!(y[i], yd[i], epsilon = 1e-14);
        }
    }

    proptest! {
        #[test]
        fn bands_beyond_order_absent(
            order in 1u8..=3,
            n in 1usize..12,
            phi in -3.0f64..3.0,
            theta in -3.0f64..3.0,
            seed in proptest::collection::vec(-1.0f64..1.0, 9),
        ) {
            let a = BellCoefficients::new(seed[..crate::types::coefficient_count(order)].to_vec()).unwrap();
            let pr = MeasurementParams::new(phi, theta).unwrap();
            let m = build_block(&a, &pr, BlockSpec::symmetric(n).unwrap());
            prop_assert!(m.bandwidth() <= order as usize);
            let dense = m.to_dense();
            for i in 0..m.dim() {
                for j in 0..m.dim() {
                    if i.abs_diff(j) > order as usize {
                        prop_assert_eq!(dense[(i, j)], 0.0);
                    }
                }
            }
        }

        #[test]
        fn smaller_blocks_use_reduced_party_count(
            n in 2usize..12,
            drop in 1usize..6,
            phi in -3.0f64..3.0,
            theta in -3.0f64..3.0,
            seed in proptest::collection::vec(-1.0f64..1.0, 9),
        ) {
            let tj = n.saturating_sub(2 * drop);
            prop_assume!(tj + 2 * drop == n);
            let a = BellCoefficients::new(seed).unwrap();
            let pr = MeasurementParams::new(phi, theta).unwrap();
            let inner = build_block(&a, &pr, BlockSpec::new(n, tj).unwrap());
            let sym = build_block(&a, &pr, BlockSpec::symmetric(tj.max(1)).unwrap());
            if tj > 0 {
                prop_assert_eq!(inner, sym);
            } else {
                prop_assert_eq!(inner.dim(), 1);
            }
        }

        #[test]
        fn basis_combination_matches_direct(
            n in 1usize..12,
            phi in -3.0f64..3.0,
            theta in -3.0f64..3.0,
            seed in proptest::collection::vec(-1.0f64..1.0, 9),
        ) {
            let pr = MeasurementParams::new(phi, theta).unwrap();
            let b = BlockSpec::symmetric(n).unwrap();
            let basis = MeasurementBasis::new(3, &pr, b);
            let a = BellCoefficients::new(seed.clone()).unwrap();
            let m1 = basis.combine(&seed);
            let m2 = build_block(&a, &pr, b);
            for (x, y) in m1.bands().iter().flatten().zip(m2.bands().iter().flatten()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
