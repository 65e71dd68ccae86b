//! Stinespring-type dilations of τ-maps on finite-dimensional Hilbert
//! C*-modules, their covariant versions, and the crossed-product picture.

pub mod algebra;
pub mod check;
pub mod crossed;
pub mod dilation;
pub mod error;
pub mod instances;
pub mod linalg;
pub mod module;

pub use check::{Check, Report};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, Tolerance, C64};
