//! Ergodicity coefficients and stability analysis for positive trace-norm
//! contractions on finite von Neumann algebras.
//!
//! A finite von Neumann algebra is modelled as a direct sum of complex matrix
//! blocks `M = ⊕ᵢ Mat(dᵢ)` carrying a faithful finite trace
//! `τ(x) = Σᵢ μᵢ · tr(xᵢ)` with positive block weights `μᵢ`. Linear maps on
//! the associated L¹ space are stored as real transfer matrices over an
//! orthonormal self-adjoint basis.
//!
//! The crate computes:
//!
//! - the Dobrushin ergodicity coefficient `ᾱ(T)` and the induced 1→1 norm
//!   ([`dobrushin`]),
//! - uniform asymptotic stability certificates with geometric convergence
//!   bounds ([`stability`]),
//! - the asymptotic coefficient `ρ̄(T)`, the zero–one law, smoothing tables,
//!   the vanish-or-fixed-point dichotomy, and strong stability verdicts
//!   ([`mixing`]),
//! - a truncated-diagonal-shift family showing how the dichotomy degenerates
//!   as dimension grows ([`shift_demo`]),
//! - slow, independent brute-force references for all of the above
//!   ([`oracle`]).

pub mod algebra;
pub mod dobrushin;
pub mod error;
pub mod mixing;
pub mod oracle;
pub mod shift_demo;
pub mod stability;
pub mod superop;

pub use algebra::{AlgebraShape, Element, ElementKind, Projector};
pub use error::{Error, Result};
pub use superop::SuperOperator;
