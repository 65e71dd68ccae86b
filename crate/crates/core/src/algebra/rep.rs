use std::sync::Arc;

use crate::algebra::{ConcreteCStarAlgebra, FiniteGroup, StarHomomorphism};
use crate::error::{Error, Result};
use crate::linalg::{identity, relative_residual, ComplexMatrix, Tolerance};

/// A unitary representation of a finite group by `d × d` matrices.
#[derive(Debug, Clone)]
pub struct UnitaryRep {
    group: Arc<FiniteGroup>,
    images: Vec<ComplexMatrix>,
}

impl UnitaryRep {
    /// Checks unitarity, `u_e = 1` and `u_s u_t = u_{st}` on every pair.
    pub fn new(group: Arc<FiniteGroup>, images: Vec<ComplexMatrix>, tol: &Tolerance) -> Result<Self> {
        if images.len() != group.order() {
            return Err(Error::DimensionMismatch {
                context: "representation images",
                expected: (group.order(), 1),
                found: (images.len(), 1),
            });
        }
        let d = images[0].nrows();
        let one = identity(d);
        for (t, u) in images.iter().enumerate() {
            if u.shape() != (d, d) {
                return Err(Error::DimensionMismatch {
                    context: "representation image",
                    expected: (d, d),
                    found: u.shape(),
                });
            }
            let residual = relative_residual(&(u.adjoint() * u), &one).max(relative_residual(&(u * u.adjoint()), &one));
            if residual > tol.abs_eps {
                return Err(Error::Invalid {
                    what: "representation image",
                    property: "unitary",
                    residual,
                    witness: Some(format!("group element {t}")),
                });
            }
        }
        let residual = relative_residual(&images[0], &one);
        if residual > tol.abs_eps {
            return Err(Error::Invalid {
                what: "representation",
                property: "unital homomorphism (u_e = 1)",
                residual,
                witness: None,
            });
        }
        for s in group.elements() {
            for t in group.elements() {
                let residual = relative_residual(&(&images[s] * &images[t]), &images[group.mul(s, t)]);
                if residual > tol.abs_eps {
                    return Err(Error::Invalid {
                        what: "representation",
                        property: "group homomorphism",
                        residual,
                        witness: Some(format!("pair ({s}, {t})")),
                    });
                }
            }
        }
        Ok(Self { group, images })
    }

    /// As [`UnitaryRep::new`], additionally requiring every `u_t` to lie in `algebra`.
    pub fn in_algebra(
        group: Arc<FiniteGroup>,
        algebra: &ConcreteCStarAlgebra,
        images: Vec<ComplexMatrix>,
        tol: &Tolerance,
    ) -> Result<Self> {
        let rep = Self::new(group, images, tol)?;
        if rep.dim() != algebra.ambient_dim() {
            return Err(Error::DimensionMismatch {
                context: "representation in algebra",
                expected: (algebra.ambient_dim(), algebra.ambient_dim()),
                found: (rep.dim(), rep.dim()),
            });
        }
        for (t, u) in rep.images.iter().enumerate() {
            let residual = algebra.membership_residual(u)?;
            if residual > tol.abs_eps {
                return Err(Error::Invalid {
                    what: "representation image",
                    property: "element of the algebra",
                    residual,
                    witness: Some(format!("group element {t}")),
                });
            }
        }
        Ok(rep)
    }

    pub fn trivial(group: Arc<FiniteGroup>, dim: usize) -> Self {
        let images = vec![identity(dim); group.order()];
        Self { group, images }
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.images[0].nrows()
    }

    pub fn image(&self, t: usize) -> &ComplexMatrix {
        &self.images[t]
    }

    pub fn images(&self) -> &[ComplexMatrix] {
        &self.images
    }

    /// `t ↦ χ(t) u_t`-style reweighting without validation; used to build
    /// deliberately inconsistent instances.
    pub fn map_images_unchecked(&self, f: impl Fn(usize, &ComplexMatrix) -> ComplexMatrix) -> Self {
        Self {
            group: self.group.clone(),
            images: self.images.iter().enumerate().map(|(t, u)| f(t, u)).collect(),
        }
    }
}

/// An action `α: G → Aut(A)` of a finite group on a concrete algebra.
#[derive(Debug, Clone)]
pub struct AlgebraAction {
    group: Arc<FiniteGroup>,
    algebra: Arc<ConcreteCStarAlgebra>,
    automorphisms: Vec<StarHomomorphism>,
}

impl AlgebraAction {
    /// `images[t][μ] = α_t(f_μ)` for the algebra basis `f_μ`.
    pub fn new(
        group: Arc<FiniteGroup>,
        algebra: Arc<ConcreteCStarAlgebra>,
        images: Vec<Vec<ComplexMatrix>>,
        tol: &Tolerance,
    ) -> Result<Self> {
        if images.len() != group.order() {
            return Err(Error::DimensionMismatch {
                context: "action images",
                expected: (group.order(), algebra.dim()),
                found: (images.len(), algebra.dim()),
            });
        }
        let automorphisms = images
            .into_iter()
            .map(|imgs| StarHomomorphism::new(algebra.clone(), algebra.clone(), imgs, tol))
            .collect::<Result<Vec<_>>>()?;
        let action = Self {
            group,
            algebra,
            automorphisms,
        };
        action.check_group_law(tol)?;
        Ok(action)
    }

    /// Inner action `α_t = Ad(ρ_t)`; `ρ` must normalize the algebra.
    pub fn inner(algebra: Arc<ConcreteCStarAlgebra>, rep: &UnitaryRep, tol: &Tolerance) -> Result<Self> {
        let images = rep
            .images()
            .iter()
            .map(|u| algebra.basis().iter().map(|a| u * a * u.adjoint()).collect())
            .collect();
        Self::new(rep.group().clone(), algebra, images, tol)
    }

    pub fn trivial(group: Arc<FiniteGroup>, algebra: Arc<ConcreteCStarAlgebra>) -> Self {
        let automorphisms = vec![StarHomomorphism::identity(algebra.clone()); group.order()];
        Self {
            group,
            algebra,
            automorphisms,
        }
    }

    fn check_group_law(&self, tol: &Tolerance) -> Result<()> {
        for (k, f) in self.algebra.basis().iter().enumerate() {
            let residual = relative_residual(&self.apply(0, f)?, f);
            if residual > tol.abs_eps {
                return Err(Error::Invalid {
                    what: "action",
                    property: "unital group action (α_e = id)",
                    residual,
                    witness: Some(format!("basis[{k}]")),
                });
            }
        }
        for s in self.group.elements() {
            for t in self.group.elements() {
                let st = self.group.mul(s, t);
                for (k, f) in self.algebra.basis().iter().enumerate() {
                    let lhs = self.apply(s, &self.apply(t, f)?)?;
                    let residual = relative_residual(&lhs, &self.apply(st, f)?);
                    if residual > tol.abs_eps {
                        return Err(Error::Invalid {
                            what: "action",
                            property: "group action (α_s∘α_t = α_st)",
                            residual,
                            witness: Some(format!("pair ({s}, {t}), basis[{k}]")),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn algebra(&self) -> &Arc<ConcreteCStarAlgebra> {
        &self.algebra
    }

    pub fn automorphism(&self, t: usize) -> &StarHomomorphism {
        &self.automorphisms[t]
    }

    /// `α_t(a)`.
    pub fn apply(&self, t: usize, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.automorphisms[t].apply(a)
    }
}
