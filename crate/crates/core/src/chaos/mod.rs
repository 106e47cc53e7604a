//! Hermite polynomials, Gaussian moment identities, Faà di Bruno index sets
//! and coefficients, and finite-dimensional tensor contractions.

pub mod coefficients;
pub mod hermite;
pub mod moments;
pub mod multiindex;
pub mod quadrature;
pub mod smooth;
pub mod tensor;

pub use coefficients::{
    beta_function, beta_half_integer, coeff_c, coeff_w, coeff_w_hat, coeff_w_hat_exact,
    derivative_order, faa_di_bruno, DerivativeOrder,
};
pub use hermite::{hermite, hermite_coefficients, hermite_expand_power};
pub use moments::gaussian_moment_functional;
pub use multiindex::{
    enumerate_a, enumerate_b, enumerate_b0, partitions, MultiIndexAlpha, MultiIndexBeta,
    ENUMERATION_BUDGET,
};
pub use quadrature::GaussHermite;
pub use smooth::{test_bank, Ridge, Separable, Smooth1, SmoothFunction};
pub use tensor::{contract_symmetrized, symmetrize, SymmetricTensor, Tensor};
