//! Best constants in weighted Wirtinger inequalities
//!
//! `∫₀^{2π} a w² ≤ C(a, b) ∫₀^{2π} b w′²` for 2π-periodic `w` with
//! `∫₀^{2π} a w = 0`.
//!
//! * [`weights`]: periodic weights and their exact or tabulated integrals.
//! * [`transform`]: the change of variables `τ(θ)` and the homeomorphisms
//!   `h_{p,q}`.
//! * [`spectral`]: `C(a, b)` from the first constrained eigenvalue.
//! * [`sharpness`]: closed-form bounds, extremal weights and functions,
//!   equality checks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod function;
pub mod quad;
pub mod sharpness;
pub mod spectral;
pub mod transform;
pub mod weights;

pub use error::{Result, WirtingerError};
pub use function::PeriodicFn;
pub use weights::{ClassMembership, PeriodicWeight, WeightKind};
