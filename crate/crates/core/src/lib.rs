//! Thermal Casimir-Polder free energy of an atom above a graphene sheet.
//!
//! Graphene is described either by the hydrodynamic (charged fluid) model or
//! by the Dirac model through its polarization tensor at zero or nonzero
//! temperature. The free energy is the Lifshitz sum over Matsubara frequencies.

// `!(x > 0.0)` is how NaN gets rejected; index loops mirror the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod lifshitz;
pub mod atoms;
pub mod config;
pub mod quadrature;
pub mod reflection;
pub mod report;
pub mod response;
pub mod units;

pub use error::{Error, Result};
