use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wraps an angle into `[-π, π)`.
pub(crate) fn wrap_angle(x: f64) -> f64 {
    let tau = 2.0 * PI;
    let mut y = x - tau * ((x + PI) / tau).floor();
    // floor can land exactly on the upper edge after rounding
    if y >= PI {
        y -= tau;
    }
    if y < -PI {
        y = -PI;
    }
    y
}

/// The two local measurement angles, shared by every party.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAngles")]
pub struct MeasurementParams {
    phi: f64,
    theta: f64,
}

#[derive(Deserialize)]
struct RawAngles {
    phi: f64,
    theta: f64,
}

impl TryFrom<RawAngles> for MeasurementParams {
    type Error = Error;
    fn try_from(r: RawAngles) -> Result<Self> {
        MeasurementParams::new(r.phi, r.theta)
    }
}

impl MeasurementParams {
    pub fn new(phi: f64, theta: f64) -> Result<Self> {
        if !phi.is_finite() || !theta.is_finite() {
            return Err(Error::InvalidInput(format!(
                "angles must be finite, got phi={phi}, theta={theta}"
            )));
        }
        Ok(Self {
            phi: wrap_angle(phi),
            theta: wrap_angle(theta),
        })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Both angles moved by the same `delta`.
    pub fn rotated(&self, delta: f64) -> Result<Self> {
        Self::new(self.phi + delta, self.theta + delta)
    }

    /// `(cos, sin)` of the angle for input `x ∈ {0, 1}`.
    pub(crate) fn cs(&self, x: u8) -> (f64, f64) {
        let a = if x == 0 { self.phi } else { self.theta };
        (a.cos(), a.sin())
    }
}

/// A spin-`J` block of an `n`-party PI operator, stored as `2J`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockSpec {
    n: usize,
    two_j: usize,
}

impl BlockSpec {
    pub fn new(n: usize, two_j: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("party count must be positive".into()));
        }
        if two_j > n || (n - two_j) % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "2J={two_j} is not a valid block for n={n}"
            )));
        }
        Ok(Self { n, two_j })
    }

    /// The `J = n/2` block.
    pub fn symmetric(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    /// Every block from `J₀` up to `n/2`.
    pub fn all(n: usize) -> Result<Vec<Self>> {
        if n == 0 {
            return Err(Error::InvalidInput("party count must be positive".into()));
        }
        Ok((n % 2..=n).step_by(2).map(|two_j| Self { n, two_j }).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn two_j(&self) -> usize {
        self.two_j
    }

    pub fn j(&self) -> f64 {
        self.two_j as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.two_j + 1
    }

    pub fn is_symmetric(&self) -> bool {
        self.two_j == self.n
    }
}

/// A multiset over the inputs `{0, 1}` of size 1 to 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Setting {
    size: u8,
    ones: u8,
}

impl Setting {
    pub fn new(size: u8, ones: u8) -> Result<Self> {
        if !(1..=3).contains(&size) || ones > size {
            return Err(Error::InvalidInput(format!(
                "no setting of size {size} with {ones} ones"
            )));
        }
        Ok(Self { size, ones })
    }

    pub fn size(&self) -> u8 {
        self.size
    }

    pub fn ones(&self) -> u8 {
        self.ones
    }

    pub fn zeros(&self) -> u8 {
        self.size - self.ones
    }

    /// Inputs in sorted order, e.g. `[0, 1, 1]`.
    pub fn inputs(&self) -> Vec<u8> {
        let mut v = vec![0u8; self.zeros() as usize];
        v.extend(std::iter::repeat_n(1u8, self.ones as usize));
        v
    }

    /// All settings up to `order`, in coefficient order.
    pub fn all(order: u8) -> Vec<Setting> {
        (1..=order.min(3))
            .flat_map(|size| (0..=size).map(move |ones| Setting { size, ones }))
            .collect()
    }

    /// Position in the coefficient vector.
    pub fn index(&self) -> usize {
        let offset = match self.size {
            1 => 0,
            2 => 2,
            _ => 5,
        };
        offset + self.ones as usize
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for x in self.inputs() {
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

/// Number of coefficients for an operator of order `k`.
pub fn coefficient_count(order: u8) -> usize {
    match order {
        1 => 2,
        2 => 5,
        3 => 9,
        _ => 0,
    }
}

/// Bell coefficients `α` ordered as `(0, 1, 00, 01, 11, 000, 001, 011, 111)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct BellCoefficients {
    order: u8,
    values: Vec<f64>,
}

impl TryFrom<Vec<f64>> for BellCoefficients {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<BellCoefficients> for Vec<f64> {
    fn from(c: BellCoefficients) -> Self {
        c.values
    }
}

impl BellCoefficients {
    /// Order is inferred from the length (2, 5 or 9).
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let order = match values.len() {
            2 => 1,
            5 => 2,
            9 => 3,
            len => {
                return Err(Error::InvalidInput(format!(
                    "coefficient vector must have length 2, 5 or 9, got {len}"
                )))
            }
        };
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite coefficient {bad}")));
        }
        Ok(Self { order, values })
    }

    pub fn zeros(order: u8) -> Result<Self> {
        Self::new(vec![0.0; coefficient_count(order)])
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, s: Setting) -> f64 {
        self.values.get(s.index()).copied().unwrap_or(0.0)
    }

    /// Coefficient/setting pairs.
    pub fn iter(&self) -> impl Iterator<Item = (Setting, f64)> + '_ {
        Setting::all(self.order).into_iter().zip(self.values.iter().copied())
    }

    /// Same operator expressed at a higher order, padding with zeros.
    pub fn lift(&self, order: u8) -> Result<Self> {
        if order < self.order {
            return Err(Error::InvalidInput(format!(
                "cannot lower order {} to {order}",
                self.order
            )));
        }
        let mut v = self.values.clone();
        v.resize(coefficient_count(order), 0.0);
        Self::new(v)
    }

    pub fn scaled(&self, t: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v * t).collect())
    }
}
