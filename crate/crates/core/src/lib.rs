//! Two-sided bounds on the ground-state energy density of translation-invariant
//! quantum spin chains.
//!
//! The set of two-site reduced states of infinite translation-invariant chains is
//! approximated from outside by finite marginal relaxations ([`outer`]) and from
//! inside by uniform matrix product states ([`inner`]). Minimizing a nearest-neighbour
//! interaction over either approximation brackets the energy density. The anisotropic
//! XY chain ([`xy`]) has a closed-form answer in terms of a complete elliptic integral
//! and serves as an exact reference; [`probe`] searches sampled data for bounded-degree
//! polynomial relations.

pub mod error;
pub mod exec;
pub mod hermitian;
pub mod inner;
pub mod lanczos;
pub mod outer;
pub mod probe;
pub mod xy;

pub use error::{Error, Result};
pub use exec::Exec;
pub use hermitian::{
    C64, DensityMatrix, HermitianOp, Pauli, PauliTwoBodyHamiltonian, hermitian_eig, kron,
    operator_norm, partial_trace, psd_project,
};
