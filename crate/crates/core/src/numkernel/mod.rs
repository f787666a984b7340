//! Dense complex linear algebra and special functions.

mod eig;
mod matrix;
mod special;
mod svd;

pub use eig::{
    hermitian_eig, hermitian_eigenvalues, unitary_eig, unitary_eigenangles, HermitianSpectrum,
    COS_DEGENERACY_TOL, HERMITIAN_TOL, JACOBI_TOL, UNITARY_TOL,
};
pub use matrix::ComplexMatrix;
pub(crate) use matrix::{gemm, gemm_adjoint_rhs};
pub use special::{
    cos_integral, hyp3f2, sin_integral, LogFactorials, SpecialFnValue, EULER_GAMMA, HYP3F2_MAX_TERMS,
};
pub use svd::{singular_values, svd, Svd};
