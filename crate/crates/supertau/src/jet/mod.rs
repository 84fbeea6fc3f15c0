//! Graded differential polynomial algebra over ℚ: even jets u^{α,s}, odd jets
//! θ^s_α, the nonlocal generators σ, f, Φ and the times, together with the
//! total x-derivative, antiderivatives and truncated Laurent series.

pub mod antideriv;
pub mod fmt;
pub mod gen;
pub mod mono;
pub mod poly;
pub mod ring;
pub mod series;
pub mod series2;

pub use antideriv::{antiderivative, dx_free, euler, integrate_field, is_total_derivative};
pub use gen::{q, qi, ExpQ, Gen, Q};
pub use mono::Mono;
pub use poly::DiffPoly;
pub use ring::{commutator, apply_derivation, Flow, FreeRules, Ring, Rules};
pub use series::LaurentJet;
pub use series2::Series2;
