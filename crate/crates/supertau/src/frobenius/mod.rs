//! Frobenius manifold data, the Hamiltonian densities h_{α,p}, two-point
//! functions and the super tau-cover of the principal hierarchy.

pub mod cover;
pub mod spec;
pub mod tables;

pub use cover::Cover;
pub use spec::{builtin, FrobeniusSpec};
pub use tables::{compute_h, verify_h, HTable, OmegaTable};
