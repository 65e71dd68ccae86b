//! Concrete finite-dimensional C*-algebras, finite groups, unitary
//! representations and C*-dynamical systems `(G, α, A)`.

mod covariance;
mod cstar;
mod group;
mod rep;

pub use covariance::{group_average_cp, verify_covariant_cp};
pub use cstar::{ConcreteCStarAlgebra, StarHomomorphism};
pub use group::FiniteGroup;
pub use rep::{AlgebraAction, UnitaryRep};
