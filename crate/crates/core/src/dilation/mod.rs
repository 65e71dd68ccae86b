//! CP maps, τ-maps and their Stinespring-type dilations.

mod covariant;
mod cp;
mod stinespring;
mod tau;

pub(crate) use covariant::require_covariant;
pub use covariant::{covariant_dilate, stinespring_unitaries, verify_covariant_tau_map, CovariantStinespringData};
pub use cp::{verify_cp, CPMap, CpReport};
pub use stinespring::{gns_construct, stinespring_checks, StinespringData};
pub use tau::{decompose_tau_map, decompose_with_base, decomposition_checks, verify_tau_map, TauDecomposition, TauMap};
