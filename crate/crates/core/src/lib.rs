//! Certified verification engine for sharp anticanonical volume bounds of
//! K-semistable Fano manifolds.
//!
//! Every numeric claim is established in one of two modes and nothing else:
//!
//! * exact arbitrary-precision rational arithmetic (equalities, polynomial
//!   identities, sign checks), or
//! * rigorous interval enclosures with rational endpoints (anything involving
//!   `exp`, `log`, square roots or pi), refined adaptively up to a precision
//!   cap.
//!
//! The headline statement being verified: among Fano manifolds of dimension
//! `n` admitting a Kaehler-Einstein metric, the second largest anticanonical
//! volume is exactly `2n^n`, attained by the quadric and by the product-type
//! degeneration, with every competing construction strictly below.  The
//! engine rebuilds the supporting volume-loss models, threshold equations,
//! closed-form sums, asymptotic hand-offs, toric fixtures and equivariant
//! volume identities from scratch and emits machine-checkable certificates.

pub mod blowup;
pub mod dh;
pub mod exact;
pub mod formulas;
pub mod gap;
pub mod threshold;
pub mod toric;
pub mod wire;

pub use exact::Rational;
