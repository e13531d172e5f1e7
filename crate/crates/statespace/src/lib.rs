//! Numerics for state spaces of finite quantum lattice truncations.
//!
//! A lattice truncation is an ordered list of site dimensions `[k_0, …,
//! k_{m-1}]` standing for the matrix algebra `M_{k_0} ⊗ ⋯ ⊗ M_{k_{m-1}}`.
//! States of such an algebra are density matrices, and this crate provides
//! the constructive machinery around them:
//!
//! * [`linalg`] — dense complex matrices, Kronecker products, a Hermitian
//!   eigensolver, functional calculus, and partial traces.
//! * [`algebra`] — local-operator embeddings, isometry-induced maps on
//!   operators and states, site interleaving for stacked systems, and
//!   numeric checks of the composition laws those maps satisfy.
//! * [`states`] — density-matrix validation, the state action `A·ω`,
//!   corner restriction/extension, stabilization by a vacuum factor, and a
//!   truncated metric for the weak* topology with a certified tail bound.
//! * [`homotopy`] — phase lifting, unitary loop lifting, interpolation
//!   homotopies, inductive loop contraction in `S(M_n)`, site-by-site
//!   disentangling on a lattice, and machine verification of the results.
//! * [`models`] — the Berry Hamiltonian over the sphere with its Chern
//!   invariant, a spin-chain pump over the three-sphere, and free-fermion
//!   spectral flattening.
//! * [`phases`] — finitely presented commutative monoids, localization,
//!   and Grothendieck group completion via integer normal forms.
//!
//! All operations are pure functions of their inputs; values are immutable
//! after construction and safe to share across threads.

pub mod algebra;
pub mod config;
pub mod error;
pub mod homotopy;
pub mod linalg;
pub mod models;
pub mod phases;
pub mod sampling;
pub mod states;

pub use config::Tolerances;
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
pub use states::DensityMatrix;
