//! Dense complex linear algebra.
//!
//! [`ComplexMatrix`] is the universal carrier for operators, isometries,
//! and density matrices throughout the crate: a row-major dense matrix of
//! `Complex64` entries. The eigensolver ([`herm_eig`]) handles Hermitian
//! matrices only; functional calculus ([`matfun`], [`exp_i_herm`]) and the
//! partial trace ([`partial_trace`]) are built on top of it.

mod eig;
mod matrix;
mod partial;

pub use eig::{exp_i_herm, herm_eig, herm_eig_jacobi, herm_eig_tridiagonal, matfun, matfun_complex, HermitianEig};
pub use matrix::{consts as pauli, kron, kron_all, C64, ComplexMatrix};
pub use partial::partial_trace;

/// Hermitian inner product `<x, y>`, conjugate-linear in `x`.
pub fn inner_product(x: &[C64], y: &[C64]) -> C64 {
    matrix::inner(x, y)
}
