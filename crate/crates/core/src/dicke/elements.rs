//! Closed-form Dicke-basis matrix elements of collective spin products and of PI
//! measurement operators.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::types::{BlockSpec, MeasurementParams, Setting};

/// `Γ(x) = √((x+1)(2J−x))` for `0 ≤ x ≤ 2J−1`.
pub fn gamma(x: usize, block: BlockSpec) -> Result<f64> {
    let tj = block.two_j();
    if tj == 0 || x > tj - 1 {
        return Err(Error::Domain(format!(
            "gamma index {x} outside 0..={} for 2J={tj}",
            tj as i64 - 1
        )));
    }
    Ok(g(x as i64, tj))
}

/// `Ξ(x) = 2J − 2x` for `0 ≤ x ≤ 2J`.
pub fn xi(x: usize, block: BlockSpec) -> Result<f64> {
    let tj = block.two_j();
    if x > tj {
        return Err(Error::Domain(format!("xi index {x} outside 0..={tj}")));
    }
    Ok(xi_raw(x as i64, tj))
}

/// Γ extended by zero outside its range.
#[inline]
pub(crate) fn g(x: i64, two_j: usize) -> f64 {
    let tj = two_j as i64;
    if x < 0 || x > tj - 1 {
        0.0
    } else {
        (((x + 1) * (tj - x)) as f64).sqrt()
    }
}

#[inline]
pub(crate) fn xi_raw(x: i64, two_j: usize) -> f64 {
    two_j as f64 - 2.0 * x as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// An ordered product of collective spin operators, e.g. `S_Y S_Z S_X`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliProduct(Vec<Pauli>);

const SUPPORTED: [&str; 21] = [
    "X", "Y", "Z", "XX", "YY", "XY", "YX", "XZ", "ZX", "YZ", "ZY", "ZZ", "ZZZ", "ZZX", "ZXX",
    "XXX", "XZZ", "YZZ", "YZX", "ZYX", "YXX",
];

impl PauliProduct {
    pub fn new(factors: Vec<Pauli>) -> Result<Self> {
        let p = PauliProduct(factors);
        if !SUPPORTED.contains(&p.to_string().as_str()) {
            return Err(Error::Unsupported(format!("no closed form for S-product {p}")));
        }
        Ok(p)
    }

    pub fn factors(&self) -> &[Pauli] {
        &self.0
    }

    /// Every product with a closed form.
    pub fn supported() -> Vec<PauliProduct> {
        SUPPORTED.iter().map(|s| s.parse().unwrap()).collect()
    }
}

impl fmt::Display for PauliProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            let c = match p {
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for PauliProduct {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let factors = s
            .trim()
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(Error::Unsupported(format!("unknown Pauli letter '{c}' in {s}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        PauliProduct::new(factors)
    }
}

fn delta(a: i64, b: i64) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// Entry `(k, l)` of the product of collective spin operators in block `J`.
pub fn pi_pauli_product_element(
    product: &PauliProduct,
    k: usize,
    l: usize,
    block: BlockSpec,
) -> Result<Complex64> {
    let tj = block.two_j();
    if k > tj || l > tj {
        return Err(Error::Domain(format!(
            "index ({k}, {l}) outside block of dimension {}",
            tj + 1
        )));
    }
    Ok(product_element_raw(&product.to_string(), k as i64, l as i64, tj))
}

/// Closed-form entry; the label is assumed supported.
pub(crate) fn product_element_raw(label: &str, k: i64, l: i64, tj: usize) -> Complex64 {
    let g = |x: i64| g(x, tj);
    let x = |v: i64| xi_raw(v, tj);
    let re = |v: f64| Complex64::new(v, 0.0);
    let im = |v: f64| Complex64::new(0.0, v);
    let d = delta;
    match label {
        "X" => re(g(l) * d(k, l + 1) + g(k) * d(l, k + 1)),
        "Y" => im(g(l) * d(k, l + 1) - g(k) * d(l, k + 1)),
        "Z" => re(x(k) * d(k, l)),
        "XX" => re(g(l + 1) * g(l) * d(k, l + 2)
            + (g(l).powi(2) + g(l - 1).powi(2)) * d(k, l)
            + g(k + 1) * g(k) * d(l, k + 2)),
        "YY" => re(-g(l + 1) * g(l) * d(k, l + 2)
            + (g(l).powi(2) + g(l - 1).powi(2)) * d(k, l)
            - g(k + 1) * g(k) * d(l, k + 2)),
        "XY" => im(g(l + 1) * g(l) * d(k, l + 2)
            + (g(l).powi(2) - g(l - 1).powi(2)) * d(k, l)
            - g(k + 1) * g(k) * d(l, k + 2)),
        "YX" => im(g(l + 1) * g(l) * d(k, l + 2)
            + (g(l - 1).powi(2) - g(l).powi(2)) * d(k, l)
            - g(k + 1) * g(k) * d(l, k + 2)),
        "XZ" => re(x(l) * g(l) * d(k, l + 1) + x(l) * g(k) * d(l, k + 1)),
        "ZX" => re(x(k) * g(l) * d(k, l + 1) + x(k) * g(k) * d(l, k + 1)),
        "YZ" => im(x(l) * g(l) * d(k, l + 1) - x(l) * g(k) * d(l, k + 1)),
        "ZY" => im(x(k) * g(l) * d(k, l + 1) - x(k) * g(k) * d(l, k + 1)),
        "ZZ" => re(x(k).powi(2) * d(k, l)),
        "ZZZ" => re(x(k).powi(3) * d(k, l)),
        "ZZX" => re(x(k).powi(2) * g(l) * d(k, l + 1) + x(k).powi(2) * g(k) * d(l, k + 1)),
        "ZXX" => re(x(k) * g(l + 1) * g(l) * d(k, l + 2)
            + x(k) * (g(l).powi(2) + g(l - 1).powi(2)) * d(k, l)
            + x(k) * g(k + 1) * g(k) * d(l, k + 2)),
        "XXX" => re(g(l + 2) * g(l + 1) * g(l) * d(k, l + 3)
            + (g(l + 1).powi(2) * g(l) + g(l).powi(3) + g(l) * g(l - 1).powi(2)) * d(k, l + 1)
            + (g(k + 1).powi(2) * g(k) + g(k).powi(3) + g(k) * g(k - 1).powi(2)) * d(l, k + 1)
            + g(k + 2) * g(k + 1) * g(k) * d(l, k + 3)),
        "XZZ" => re(x(l).powi(2) * g(l) * d(k, l + 1) + x(l).powi(2) * g(k) * d(l, k + 1)),
        "YZZ" => im(x(l).powi(2) * g(l) * d(k, l + 1) - x(l).powi(2) * g(k) * d(l, k + 1)),
        "YZX" => im(x(l + 1) * g(l + 1) * g(l) * d(k, l + 2)
            + (x(l - 1) * g(l - 1).powi(2) - x(l + 1) * g(l).powi(2)) * d(k, l)
            - x(k + 1) * g(k + 1) * g(k) * d(l, k + 2)),
        "ZYX" => im(x(k) * g(l + 1) * g(l) * d(k, l + 2)
            + x(k) * (g(l - 1).powi(2) - g(l).powi(2)) * d(k, l)
            - x(k) * g(k + 1) * g(k) * d(l, k + 2)),
        "YXX" => im(g(l + 2) * g(l + 1) * g(l) * d(k, l + 3)
            + (g(l).powi(3) - g(l + 1).powi(2) * g(l) + g(l) * g(l - 1).powi(2)) * d(k, l + 1)
            - (g(k).powi(3) + g(k + 1).powi(2) * g(k) - g(k) * g(k - 1).powi(2)) * d(l, k + 1)
            - g(k + 2) * g(k + 1) * g(k) * d(l, k + 3)),
        _ => unreachable!("unsupported label {label}"),
    }
}

/// Entry `(k, l)` of the PI Pauli operator `S_{Z…Z X…X}` with `order − m` Z's and
/// `m` X's (sum over ordered tuples of distinct sites), written through products of
/// collective spins.
pub(crate) fn pi_zx_element(order: u8, m: u8, k: i64, l: i64, tj: usize) -> f64 {
    let p = |label: &str| product_element_raw(label, k, l, tj);
    let nn = tj as f64;
    let id = delta(k, l);
    let v = match (order, m) {
        (1, 0) => p("Z"),
        (1, 1) => p("X"),
        (2, 0) => p("ZZ") - nn * id,
        (2, 1) => p("ZX") - Complex64::i() * p("Y"),
        (2, 2) => p("XX") - nn * id,
        (3, 0) => p("ZZZ") + (2.0 - 3.0 * nn) * p("Z"),
        (3, 1) => p("ZZX") - nn * p("X") - Complex64::i() * (p("YZ") + p("ZY")),
        (3, 2) => p("ZXX") + (2.0 - nn) * p("Z") - 2.0 * Complex64::i() * p("YX"),
        (3, 3) => p("XXX") + (2.0 - 3.0 * nn) * p("X"),
        _ => unreachable!("no PI Pauli operator of order {order} with {m} X's"),
    };
    v.re
}

fn binomial(n: u8, k: u8) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Coefficient of `S_{Z^{K−m} X^m}` in the expansion of `S_setting`.
///
/// Multilinear expansion of `M_{x₁}⋯M_{x_K}`; the PI Pauli operators are symmetric
/// in the order of their letters.
pub(crate) fn zx_expansion(setting: Setting, params: &MeasurementParams) -> Vec<f64> {
    let (c0, s0) = params.cs(0);
    let (c1, s1) = params.cs(1);
    let z = setting.zeros();
    let o = setting.ones();
    let mut out = vec![0.0; setting.size() as usize + 1];
    for i in 0..=z {
        for j in 0..=o {
            let w = binomial(z, i)
                * binomial(o, j)
                * s0.powi(i as i32)
                * c0.powi((z - i) as i32)
                * s1.powi(j as i32)
                * c1.powi((o - j) as i32);
            out[(i + j) as usize] += w;
        }
    }
    out
}

/// Entry `(k, k+d)` of `S_setting` in block `J` via the expansion into PI Pauli
/// operators. Used for the diagonal, and as a second route for the off-diagonals.
pub(crate) fn measurement_element_by_expansion(
    setting: Setting,
    d: usize,
    k: usize,
    tj: usize,
    params: &MeasurementParams,
) -> f64 {
    zx_expansion(setting, params)
        .iter()
        .enumerate()
        .map(|(m, w)| {
            if *w == 0.0 {
                0.0
            } else {
                w * pi_zx_element(setting.size(), m as u8, k as i64, (k + d) as i64, tj)
            }
        })
        .sum()
}

/// Entry `(k, k+d)` of the PI measurement operator `S_setting` in block `J`.
///
/// Off-diagonal entries use closed forms in `Γ`; the diagonal is assembled from the
/// expansion into `S_{ZZ}`, `S_{ZX}`, … Returns 0 when `d` exceeds the setting size.
pub fn pi_measurement_band(
    setting: Setting,
    d: usize,
    k: usize,
    block: BlockSpec,
    params: &MeasurementParams,
) -> Result<f64> {
    let tj = block.two_j();
    if k + d > tj {
        return Err(Error::Domain(format!(
            "band index k={k} outside 0..={} for offset {d}",
            tj as i64 - d as i64
        )));
    }
    Ok(band_raw(setting, d, k, tj, params))
}

pub(crate) fn band_raw(
    setting: Setting,
    d: usize,
    k: usize,
    tj: usize,
    params: &MeasurementParams,
) -> f64 {
    let size = setting.size() as usize;
    if d > size {
        return 0.0;
    }
    if d == 0 {
        return measurement_element_by_expansion(setting, 0, k, tj, params);
    }
    let n = tj as f64;
    let kf = k as f64;
    let ki = k as i64;
    let gk = g(ki, tj);
    let (cp, sp) = params.cs(0);
    let (ct, st) = params.cs(1);
    let (p, t) = (params.phi(), params.theta());
    let poly = 4.0 * kf * kf - 4.0 * kf * (n - 1.0) + n * n - 3.0 * n + 2.0;
    match (size, setting.ones(), d) {
        (1, 0, 1) => gk * sp,
        (1, 1, 1) => gk * st,
        (2, 0, 1) => gk * (n - 1.0 - 2.0 * kf) * (2.0 * p).sin(),
        (2, 1, 1) => gk * (n - 1.0 - 2.0 * kf) * (p + t).sin(),
        (2, 2, 1) => gk * (n - 1.0 - 2.0 * kf) * (2.0 * t).sin(),
        (2, 0, 2) => gk * g(ki + 1, tj) * sp * sp,
        (2, 1, 2) => gk * g(ki + 1, tj) * st * sp,
        (2, 2, 2) => gk * g(ki + 1, tj) * st * st,
        (3, 0, 1) => 3.0 * gk * sp * (poly * cp * cp + kf * (n - 1.0 - kf) * sp * sp),
        (3, 1, 1) => {
            gk * (poly * cp * (st * cp + 2.0 * ct * sp)
                - 3.0 * kf * st * (kf - n + 1.0) * sp * sp)
        }
        (3, 2, 1) => {
            gk * (ct * poly * (2.0 * st * cp + ct * sp)
                - 3.0 * kf * st * st * (kf - n + 1.0) * sp)
        }
        (3, 3, 1) => 3.0 * st * gk * (ct * ct * poly + kf * st * st * (n - 1.0 - kf)),
        (3, ones, 2) => {
            let gg = g(ki + 1, tj) * gk * (n - 2.0 - 2.0 * kf);
            match ones {
                0 => 3.0 * gg * sp * sp * cp,
                1 => gg * sp * (2.0 * st * cp + ct * sp),
                2 => st * gg * (st * cp + 2.0 * ct * sp),
                _ => 3.0 * st * st * ct * gg,
            }
        }
        (3, ones, 3) => {
            let ggg = g(ki + 2, tj) * g(ki + 1, tj) * gk;
            ggg * sp.powi(3 - ones as i32) * st.powi(ones as i32)
        }
        _ => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn blk(tj: usize) -> BlockSpec {
        BlockSpec::symmetric(tj).unwrap()
    }

    #[test]
    fn gamma_and_xi_values() {
        assert_relative_eq!(gamma(0, blk(10)).unwrap(), 10f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(gamma(4, blk(10)).unwrap(), 30f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(gamma(9, blk(10)).unwrap(), 10f64.sqrt(), epsilon = 1e-14);
        assert!(gamma(10, blk(10)).is_err());
        assert!(gamma(0, BlockSpec::new(2, 0).unwrap()).is_err());
        assert_eq!(xi(0, blk(10)).unwrap(), 10.0);
        assert_eq!(xi(5, blk(10)).unwrap(), 0.0);
        assert_eq!(xi(10, blk(10)).unwrap(), -10.0);
        assert!(xi(11, blk(10)).is_err());
    }

    #[test]
    fn product_examples() {
        let b = blk(10);
        let z: PauliProduct = "Z".parse().unwrap();
        assert_eq!(pi_pauli_product_element(&z, 0, 0, b).unwrap().re, 10.0);
        let x: PauliProduct = "X".parse().unwrap();
        assert_relative_eq!(
            pi_pauli_product_element(&x, 1, 0, b).unwrap().re,
            10f64.sqrt(),
            epsilon = 1e-14
        );
        assert!(matches!("XZY".parse::<PauliProduct>(), Err(Error::Unsupported(_))));
        assert!(matches!("ZXZ".parse::<PauliProduct>(), Err(Error::Unsupported(_))));
    }

    #[test]
    fn hermitian_products_are_hermitian() {
        // X, Y, Z, XX, YY, ZZ, ZZZ, XXX are Hermitian
        for label in ["X", "Y", "Z", "XX", "YY", "ZZ", "ZZZ", "XXX"] {
            let p: PauliProduct = label.parse().unwrap();
            for k in 0..=7 {
                for l in 0..=7 {
                    let a = pi_pauli_product_element(&p, k, l, blk(7)).unwrap();
                    let b = pi_pauli_product_element(&p, l, k, blk(7)).unwrap();
                    assert!((a - b.conj()).norm() < 1e-12, "{label} ({k},{l})");
                }
            }
        }
    }

    #[test]
    fn band_examples() {
        let b = blk(10);
        let pr = MeasurementParams::new(PI / 6.0, 5.0 * PI / 6.0).unwrap();
        let s01 = Setting::new(2, 1).unwrap();
        for k in 0..=8 {
            let want = g(k as i64, 10) * g(k as i64 + 1, 10) / 4.0;
            assert_relative_eq!(
                pi_measurement_band(s01, 2, k, b, &pr).unwrap(),
                want,
                epsilon = 1e-12
            );
        }
        let s0 = Setting::new(1, 0).unwrap();
        assert_eq!(pi_measurement_band(s0, 2, 0, b, &pr).unwrap(), 0.0);
        assert!(pi_measurement_band(s0, 1, 10, b, &pr).is_err());
    }

    #[test]
    fn closed_forms_match_expansion_route() {
        let pr = MeasurementParams::new(0.37, 1.91).unwrap();
        for tj in [1usize, 2, 5, 8] {
            for s in Setting::all(3) {
                for d in 1..=s.size() as usize {
                    for k in 0..=tj.saturating_sub(d) {
                        if k + d > tj {
                            continue;
                        }
                        let a = band_raw(s, d, k, tj, &pr);
                        let b = measurement_element_by_expansion(s, d, k, tj, &pr);
                        assert!((a - b).abs() < 1e-10, "{s} d={d} k={k} 2J={tj}: {a} vs {b}");
                    }
                }
            }
        }
    }
}
