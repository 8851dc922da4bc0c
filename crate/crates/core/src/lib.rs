//! Numerical toolkit for rearrangement-invariant and dyadic-block quasinorms
//! of gridded functions.

// `!(a < b)` is used on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod dyadic;
pub mod error;
pub mod fourier;
pub mod gridfn;
pub mod maximal;
pub mod norms;
pub mod par;
pub mod rearrange;
pub mod verify;

pub use error::{Error, Result};
pub use gridfn::{ComplexGrid, DomainKind, GridFunction, GridSpec, LorentzParams, RealGrid, StepFunction};
