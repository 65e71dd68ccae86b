//! Concrete Hilbert C*-modules, correspondences and module dynamical systems.

mod correspondence;
mod dynamics;
mod hilbert;

pub use correspondence::Correspondence;
pub use dynamics::{induced_algebra_action, ModuleDynamicalSystem};
pub use hilbert::{fullness_check, interior_tensor_space, ConcreteHilbertModule, InteriorTensor};
