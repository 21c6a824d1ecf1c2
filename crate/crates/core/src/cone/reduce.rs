use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::HyperplaneSet;
use crate::error::Result;
use crate::linalg::{dot, nnls};

/// Residual below this (unit rows) ⇒ redundant.
const REDUNDANT_BELOW: f64 = 1e-8;
/// Residual between the two thresholds ⇒ indeterminate, row kept.
const CERTAIN_ABOVE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum RowStatus {
    /// `witness` satisfies every other kept row and violates this one.
    Irredundant { witness: Vec<f64> },
    /// The nonnegative fit residual fell inside the ambiguity band.
    Indeterminate { residual: f64 },
}

#[derive(Debug, Clone)]
pub struct Reduced {
    pub hyperplanes: HyperplaneSet,
    /// One status per kept row.
    pub status: Vec<RowStatus>,
}

/// Drops every row that is a nonnegative combination of the others.
///
/// Rows are tested last to first against the currently kept rows, so among
/// positive multiples the earliest survives. A row removed as redundant stays
/// redundant after later removals, and a witness stays valid on any subset, so a
/// single pass suffices.
pub fn reduce_irredundant(h: &HyperplaneSet) -> Result<Reduced> {
    let rows = h.normalized_rows();
    let m = rows.len();
    let dim = h.dim();
    let mut kept: Vec<bool> = vec![true; m];
    let mut status: Vec<Option<RowStatus>> = vec![None; m];
    for j in (0..m).rev() {
        let others: Vec<usize> = (0..m).filter(|&i| i != j && kept[i]).collect();
        if others.is_empty() {
            status[j] = Some(RowStatus::Irredundant {
                witness: rows[j].clone(),
            });
            continue;
        }
        let a = DMatrix::from_fn(dim, others.len(), |r, c| rows[others[c]][r]);
        let b = DVector::from_column_slice(&rows[j]);
        let (_, resid) = nnls(&a, &b);
        let rn = resid.norm();
        if rn < REDUNDANT_BELOW {
            kept[j] = false;
        } else {
            let w: Vec<f64> = resid.iter().map(|v| v / rn).collect();
            let worst_other = others
                .iter()
                .map(|&i| dot(&rows[i], &w))
                .fold(f64::NEG_INFINITY, f64::max);
            let certified = dot(&rows[j], &w) > 0.0 && worst_other <= 1e-9;
            status[j] = Some(if rn >= CERTAIN_ABOVE && certified {
                RowStatus::Irredundant { witness: w }
            } else {
                RowStatus::Indeterminate { residual: rn }
            });
        }
    }
    let keep: Vec<usize> = (0..m).filter(|&i| kept[i]).collect();
    let status = keep.iter().map(|&i| status[i].clone().unwrap()).collect();
    Ok(Reduced {
        hyperplanes: h.subset(&keep),
        status,
    })
}

/// Whether `v` is a nonnegative combination of `gens` plus any combination of
/// `lines`; returns the fit residual norm relative to `|v|`.
#[cfg(test)]
pub(crate) fn conic_residual(v: &[f64], gens: &[Vec<f64>], lines: &[Vec<f64>]) -> f64 {
    let dim = v.len();
    let cols: Vec<Vec<f64>> = gens
        .iter()
        .cloned()
        .chain(lines.iter().cloned())
        .chain(lines.iter().map(|l| l.iter().map(|x| -x).collect()))
        .collect();
    let a = DMatrix::from_fn(dim, cols.len(), |r, c| cols[c][r]);
    let (_, r) = nnls(&a, &DVector::from_column_slice(v));
    r.norm() / crate::linalg::norm(v).max(1e-300)
}
