//! Quantum bound (lowest eigenvalue), classical bound (deterministic strategies)
//! and their ratio.

mod eigen;

use serde::{Deserialize, Serialize};

use crate::dicke::{build_block, SymmetricBlockMatrix};
use crate::error::{Error, Result};
use crate::types::{coefficient_count, BellCoefficients, BlockSpec, MeasurementParams};

pub use eigen::{lowest_eigenpair, EigenMethod, DENSE_LIMIT};

/// Smallest eigenvalue and its eigenvector (largest-magnitude component positive).
pub fn beta_q(m: &SymmetricBlockMatrix) -> (f64, Vec<f64>) {
    lowest_eigenpair(m, EigenMethod::Auto)
}

/// Party counts per deterministic local strategy: outputs `(+,+)`, `(+,−)`,
/// `(−,+)`, `(−,−)` for inputs `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
}

impl DeterministicStrategy {
    pub fn new(a: usize, b: usize, c: usize, d: usize, n: usize) -> Result<Self> {
        if a + b + c + d != n {
            return Err(Error::InvalidInput(format!(
                "strategy counts {a}+{b}+{c}+{d} do not sum to n={n}"
            )));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn n(&self) -> usize {
        self.a + self.b + self.c + self.d
    }

    /// All strategies for `n` parties in lexicographic order.
    pub fn all(n: usize) -> impl Iterator<Item = Self> {
        (0..=n).flat_map(move |a| {
            (0..=n - a).flat_map(move |b| {
                (0..=n - a - b).map(move |c| Self {
                    a,
                    b,
                    c,
                    d: n - a - b - c,
                })
            })
        })
    }
}

/// Classical values of `S₀ … S₁₁₁` (up to `order`) for a strategy.
pub fn strategy_correlators(s: &DeterministicStrategy, order: u8) -> Vec<f64> {
    let n = s.n() as f64;
    let s0 = s.a as f64 + s.b as f64 - s.c as f64 - s.d as f64;
    let s1 = s.a as f64 - s.b as f64 + s.c as f64 - s.d as f64;
    let e = s.a as f64 - s.b as f64 - s.c as f64 + s.d as f64;
    let all = [
        s0,
        s1,
        s0 * s0 - n,
        s0 * s1 - e,
        s1 * s1 - n,
        s0.powi(3) + 2.0 * s0 - 3.0 * n * s0,
        s0 * s0 * s1 + 2.0 * s1 - n * s1 - 2.0 * e * s0,
        s0 * s1 * s1 + 2.0 * s0 - n * s0 - 2.0 * e * s1,
        s1.powi(3) + 2.0 * s1 - 3.0 * n * s1,
    ];
    all[..coefficient_count(order)].to_vec()
}

/// Correlators of every strategy, for repeated classical-bound evaluation.
#[derive(Debug, Clone)]
pub struct CorrelatorTable {
    n: usize,
    order: u8,
    strategies: Vec<DeterministicStrategy>,
    values: Vec<f64>,
}

impl CorrelatorTable {
    pub fn new(n: usize, order: u8) -> Self {
        let strategies: Vec<_> = DeterministicStrategy::all(n).collect();
        let values = strategies
            .iter()
            .flat_map(|s| strategy_correlators(s, order))
            .collect();
        Self {
            n,
            order,
            strategies,
            values,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    /// `min_s α · 𝒮(s)`, first strategy in lexicographic order on ties.
    pub fn beta_c(&self, alpha: &[f64]) -> (f64, DeterministicStrategy) {
        let w = coefficient_count(self.order);
        let mut best = (f64::INFINITY, self.strategies[0]);
        for (s, row) in self.strategies.iter().zip(self.values.chunks_exact(w)) {
            let v: f64 = row.iter().zip(alpha).map(|(x, y)| x * y).sum();
            if v < best.0 {
                best = (v, *s);
            }
        }
        best
    }
}

/// Classical bound by enumeration over `(a, b, c, d)`.
pub fn beta_c(coeffs: &BellCoefficients, n: usize) -> Result<(f64, DeterministicStrategy)> {
    if n == 0 {
        return Err(Error::InvalidInput("party count must be positive".into()));
    }
    Ok(CorrelatorTable::new(n, coeffs.order()).beta_c(coeffs.values()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapStatus {
    Defined,
    /// `β_C ≥ 0`; the ratio is not reported.
    ClassicalBoundNonnegative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub beta_q: f64,
    pub beta_c: f64,
    pub gap: Option<f64>,
    pub gap_status: GapStatus,
    pub strategy: DeterministicStrategy,
    /// Ground state in the Dicke basis of the block attaining `β_Q`.
    pub ground_state: Vec<f64>,
    /// `2J` of that block.
    pub two_j: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GapOptions {
    /// Minimize over every block instead of the symmetric one.
    pub all_blocks: bool,
}

pub(crate) fn gap_value(beta_q: f64, beta_c: f64) -> Option<f64> {
    (beta_c < 0.0).then(|| beta_q / beta_c)
}

/// `β_Q / β_C` on the symmetric block.
pub fn gap(coeffs: &BellCoefficients, params: &MeasurementParams, n: usize) -> Result<BoundsReport> {
    gap_with(coeffs, params, n, GapOptions::default())
}

pub fn gap_with(
    coeffs: &BellCoefficients,
    params: &MeasurementParams,
    n: usize,
    opts: GapOptions,
) -> Result<BoundsReport> {
    let blocks = if opts.all_blocks {
        BlockSpec::all(n)?
    } else {
        vec![BlockSpec::symmetric(n)?]
    };
    let mut best: Option<(f64, Vec<f64>, usize)> = None;
    for b in blocks.into_iter().rev() {
        let (e, v) = beta_q(&build_block(coeffs, params, b));
        if best.as_ref().is_none_or(|(be, _, _)| e < *be) {
            best = Some((e, v, b.two_j()));
        }
    }
    let (bq, ground_state, two_j) = best.expect("at least one block");
    let (bc, strategy) = beta_c(coeffs, n)?;
    let g = gap_value(bq, bc);
    Ok(BoundsReport {
        beta_q: bq,
        beta_c: bc,
        gap: g,
        gap_status: if g.is_some() {
            GapStatus::Defined
        } else {
            GapStatus::ClassicalBoundNonnegative
        },
        strategy,
        ground_state,
        two_j,
    })
}
