//! PI operators in the Dicke basis.

mod block;
mod elements;
pub mod full_space;

pub use block::{
    build_block, check_stoquastic, measurement_block, MeasurementBasis, Offender, StoqReport,
    SymmetricBlockMatrix, DEFAULT_STOQ_TOL,
};
pub use elements::{
    gamma, pi_measurement_band, pi_pauli_product_element, xi, Pauli, PauliProduct,
};
pub use full_space::{
    brute_force_block, embed_computational, spectrum_shift_check, Embedding, Shift,
    SparseOperator,
};

pub(crate) use elements::g;
pub(crate) use elements::band_raw;
