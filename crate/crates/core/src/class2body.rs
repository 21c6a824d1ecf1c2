//! A two-body family of tangent inequalities, parametrised by `(x, y, σ, τ, μ)`,
//! and its stoquasticity conditions.

use serde::{Deserialize, Serialize};

use crate::dicke::{build_block, check_stoquastic};
use crate::error::{Error, Result};
use crate::types::{wrap_angle, BellCoefficients, BlockSpec, MeasurementParams};

pub const EQUALITY_TOL: f64 = 1e-10;
pub const INEQUALITY_SLACK: f64 = 1e-12;
pub const MAX_VERIFY_N: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassParams {
    x: u32,
    y: u32,
    sigma: i8,
    tau: i8,
    mu: u32,
}

impl ClassParams {
    pub fn new(x: u32, y: u32, sigma: i8, tau: i8, mu: u32) -> Result<Self> {
        if x == 0 || y == 0 {
            return Err(Error::InvalidInput("x and y must be at least 1".into()));
        }
        if sigma.abs() != 1 || tau.abs() != 1 {
            return Err(Error::InvalidInput("sigma and tau must be ±1".into()));
        }
        Ok(Self { x, y, sigma, tau, mu })
    }

    pub fn x(&self) -> u32 {
        self.x
    }
    pub fn y(&self) -> u32 {
        self.y
    }
    pub fn sigma(&self) -> i8 {
        self.sigma
    }
    pub fn tau(&self) -> i8 {
        self.tau
    }
    pub fn mu(&self) -> u32 {
        self.mu
    }

    /// Advisory for the tangency parity rule; `None` when it holds.
    /// For even `n`, `μ` and `x` should differ in parity; for odd `n`, `μ` and `y`.
    pub fn parity_warning(&self, n: usize) -> Option<String> {
        let (name, other) = if n % 2 == 0 { ("x", self.x) } else { ("y", self.y) };
        (self.mu % 2 == other % 2).then(|| {
            format!("mu={} and {name}={other} share parity for n={n}; the inequality may not be tangent", self.mu)
        })
    }

    /// `(α, β, γ, δ, ε)` before the halving of the quadratic weights.
    pub fn raw(&self) -> [f64; 5] {
        let (x, y, mu) = (self.x as f64, self.y as f64, self.mu as f64);
        let (s, t) = (self.sigma as f64, self.tau as f64);
        [x * (s * mu + t * (x + y)), mu * y, x * x, s * x * y, y * y]
    }
}

/// Coefficients `(α, β, γ/2, δ, ε/2)` in the standard two-body order.
pub fn class_to_coeffs(p: &ClassParams) -> BellCoefficients {
    let [a, b, g, d, e] = p.raw();
    BellCoefficients::new(vec![a, b, g / 2.0, d, e / 2.0]).expect("finite coefficients")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockVerdict {
    pub two_j: usize,
    pub stoquastic: bool,
    pub max_off_diagonal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassConditionReport {
    #[serde(rename = "A_prime")]
    pub a_prime: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub condition_c_met: bool,
    pub condition_a_met: bool,
    pub per_block_stoquastic: Vec<BlockVerdict>,
}

impl ClassConditionReport {
    pub fn conditions_met(&self) -> bool {
        self.condition_c_met && self.condition_a_met
    }
}

/// `A′`, `C`, `D` and the two angle conditions. No blocks are built.
pub fn stoq_conditions(p: &ClassParams, params: &MeasurementParams) -> ClassConditionReport {
    let [a, b, g, d, e] = p.raw();
    let (cp, sp) = params.cs(0);
    let (ct, st) = params.cs(1);
    let (x, y) = (p.x as f64, p.y as f64);
    let (sigma, tau) = (p.sigma as f64, p.tau as f64);
    ClassConditionReport {
        a_prime: a * sp + b * st,
        c: g * sp * sp + 2.0 * d * sp * st + e * st * st,
        d: g * cp * sp + d * cp * st + d * ct * sp + e * ct * st,
        condition_c_met: (x * sp + sigma * y * st).abs() <= EQUALITY_TOL,
        condition_a_met: x * tau * (x + y) * sp <= INEQUALITY_SLACK,
        per_block_stoquastic: Vec::new(),
    }
}

/// Builds every block of the class operator and checks each one.
pub fn verify_all_blocks(
    p: &ClassParams,
    params: &MeasurementParams,
    n: usize,
    tol: f64,
) -> Result<ClassConditionReport> {
    if n > MAX_VERIFY_N {
        return Err(Error::Resource(format!(
            "all-block verification is limited to n <= {MAX_VERIFY_N}"
        )));
    }
    let coeffs = class_to_coeffs(p);
    let mut report = stoq_conditions(p, params);
    report.per_block_stoquastic = BlockSpec::all(n)?
        .into_iter()
        .map(|b| {
            let m = build_block(&coeffs, params, b);
            let r = check_stoquastic(&m, tol);
            let max_off = (1..=m.bandwidth())
                .flat_map(|d| m.band(d).iter().copied())
                .fold(f64::NEG_INFINITY, f64::max);
            BlockVerdict {
                two_j: b.two_j(),
                stoquastic: r.stoquastic,
                max_off_diagonal: if max_off.is_finite() { max_off } else { 0.0 },
            }
        })
        .collect();
    Ok(report)
}

/// All `θ ∈ [−π, π)` with `x sin φ = −σ y sin θ`.
pub fn solve_theta(p: &ClassParams, phi: f64) -> Vec<f64> {
    let s = -(p.x as f64) * phi.sin() / (p.sigma as f64 * p.y as f64);
    if s.abs() > 1.0 + EQUALITY_TOL {
        return Vec::new();
    }
    let base = s.clamp(-1.0, 1.0).asin();
    let mut out = vec![wrap_angle(base), wrap_angle(std::f64::consts::PI - base)];
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    out
}
