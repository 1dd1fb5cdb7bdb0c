//! Small dense complex linear algebra, quadrature and finite differences.

mod diff;
mod eigen;
mod expm;
mod matrix;
mod quadrature;

pub use diff::{central_diff, central_diff_real, central_diff_vec};
pub use eigen::{
    eig, eigenvalue_order, eigenvalues, hermitian_eigen, normalize_phase, schur, sort_eigenvalues, EigenSystem,
    DEFECTIVE_THRESHOLD,
};
pub use expm::matrix_exp;
pub use matrix::{ComplexMatrix, LargeMatrix, MAX_LARGE_DIM, MAX_SMALL_DIM, SINGULAR_DET};
pub use quadrature::{
    adaptive_integrate, integrate_real_line, integrate_segments, integrate_with_error, Quadrature, QuadratureSpec,
};

pub use num_complex::Complex64;

/// Determinant (free-function form of [`ComplexMatrix::det`]).
pub fn det(m: &ComplexMatrix) -> Complex64 {
    m.det()
}

/// Inverse (free-function form of [`ComplexMatrix::inverse`]).
pub fn inverse(m: &ComplexMatrix) -> crate::Result<ComplexMatrix> {
    m.inverse()
}
