//! Weighted Moser–Trudinger functionals on the two-dimensional upper
//! half-plane.
//!
//! Radial profiles on half-disks are studied through the change of
//! variables `v(s) = T u(R e^{-s/(2+β)})`, which turns the weighted energy
//! into `∫|v'|^{2+α} ds` and the exponential integral into an `e^{-s}`
//! weighted integral on the half-line. The crate provides the constants,
//! quadrature, profile model, functionals, concentration diagnostics and a
//! constrained maximizer built on that picture.

// negated comparisons reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod concentration;
pub mod constants;
pub mod corpus;
pub mod error;
pub mod extremal;
pub mod format;
pub mod functionals;
pub mod profiles;
pub mod quadrature;
pub mod special;
pub mod verify;

pub use constants::{build_constants, ConstantsBundle, WeightParams};
pub use error::{Error, Result};
pub use profiles::{HalfLineProfile, RadialProfile};
pub use quadrature::QuadratureConfig;
