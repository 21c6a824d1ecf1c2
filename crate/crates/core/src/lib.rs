//! Stoquastic permutationally invariant (PI) Bell operators.
//!
//! The crate works in the Dicke basis of the spin-`J` blocks of PI operators built
//! from two dichotomic measurements per party,
//! `M_0 = cos φ Z + sin φ X` and `M_1 = cos θ Z + sin θ X`, shared by all parties.
//!
//! - [`dicke`]: matrix elements of PI measurement operators, block assembly,
//!   stoquasticity checks and a full-Hilbert-space reference implementation.
//! - [`cone`]: the cone of Bell coefficients whose symmetric block is stoquastic,
//!   in hyperplane form and as rays plus lines.
//! - [`bounds`]: quantum bound (lowest eigenvalue), classical bound (deterministic
//!   strategies) and their ratio.
//! - [`class2body`]: the two-body family parametrized by `(x, y, μ, σ, τ)` and its
//!   all-blocks stoquasticity conditions.
//! - [`parent`]: parent Hamiltonians `𝟙 − |φ⟩⟨φ|` and their decomposition into
//!   weight-class Pauli sums.
//! - [`optimizer`]: coordinate sweeps over cone coordinates, angle scans and
//!   Gaussian fits of ground states.
//!
//! ```
//! use stoqbell::{BellCoefficients, BlockSpec, MeasurementParams};
//! use stoqbell::dicke::{build_block, check_stoquastic};
//! use std::f64::consts::PI;
//!
//! let alpha = BellCoefficients::new(vec![-2.0, 0.0, 0.5, -1.0, 0.5]).unwrap();
//! let params = MeasurementParams::new(PI / 6.0, 5.0 * PI / 6.0).unwrap();
//! let block = build_block(&alpha, &params, BlockSpec::symmetric(10).unwrap());
//! assert!(check_stoquastic(&block, 1e-10).stoquastic);
//! ```

pub mod bounds;
pub mod class2body;
pub mod cone;
pub mod dicke;
mod error;
mod linalg;
pub mod optimizer;
pub mod parent;
mod types;

pub use error::{Error, Result};
pub use types::{BellCoefficients, BlockSpec, MeasurementParams, Setting};
