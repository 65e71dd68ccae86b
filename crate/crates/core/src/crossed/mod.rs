//! Crossed products of finite group actions and the correspondence between
//! covariant τ-maps and τ-maps on crossed products.

mod algebra;
mod integrated;
mod lift;
mod module;

pub use algebra::{build_crossed_algebra, CrossedProductAlgebra, Tuple};
pub use integrated::{integrated_form, IntegratedForm};
pub use lift::{
    lift_tau_map, restrict_tau_map, roundtrip_check, shift_identity, CrossedTauMap, RestrictedTauMap,
    RoundtripInstance,
};
pub use module::{build_crossed_module, build_crossed_module_over, CrossedProductModule};
