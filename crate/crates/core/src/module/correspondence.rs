use std::sync::Arc;

use crate::algebra::{ConcreteCStarAlgebra, StarHomomorphism};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Tolerance};
use crate::module::ConcreteHilbertModule;

/// A Hilbert `B`-module `E′ ⊆ k × b` matrices with a left action of a unital
/// algebra `C` by `k × k` matrices.
#[derive(Debug, Clone)]
pub struct Correspondence {
    module: Arc<ConcreteHilbertModule>,
    left_algebra: Arc<ConcreteCStarAlgebra>,
    /// `None` means `C ⊆ M_k` acts by its own matrices.
    left_action: Option<StarHomomorphism>,
}

impl Correspondence {
    /// `C ⊆ M_k` acting on `E′` by matrix multiplication.
    pub fn new(
        module: Arc<ConcreteHilbertModule>,
        left_algebra: Arc<ConcreteCStarAlgebra>,
        tol: &Tolerance,
    ) -> Result<Self> {
        if left_algebra.ambient_dim() != module.rows() {
            return Err(Error::DimensionMismatch {
                context: "left algebra acting on module rows",
                expected: (module.rows(), module.rows()),
                found: (left_algebra.ambient_dim(), left_algebra.ambient_dim()),
            });
        }
        let corr = Self {
            module,
            left_algebra,
            left_action: None,
        };
        corr.check_preserves_module(tol)?;
        Ok(corr)
    }

    /// `C` acting through a *-homomorphism `π′: C → M_k`.
    pub fn with_action(module: Arc<ConcreteHilbertModule>, action: StarHomomorphism, tol: &Tolerance) -> Result<Self> {
        if action.codomain().ambient_dim() != module.rows() {
            return Err(Error::DimensionMismatch {
                context: "left action codomain",
                expected: (module.rows(), module.rows()),
                found: (action.codomain().ambient_dim(), action.codomain().ambient_dim()),
            });
        }
        let corr = Self {
            module,
            left_algebra: action.domain().clone(),
            left_action: Some(action),
        };
        corr.check_preserves_module(tol)?;
        Ok(corr)
    }

    /// The full matrix algebra `M_k` acting on the module of all `k × b` matrices.
    pub fn full(b_algebra: Arc<ConcreteCStarAlgebra>, rows: usize) -> Result<Self> {
        let module = ConcreteHilbertModule::full(b_algebra, rows)?.into_arc();
        Ok(Self {
            module,
            left_algebra: ConcreteCStarAlgebra::full(rows).into_arc(),
            left_action: None,
        })
    }

    fn check_preserves_module(&self, tol: &Tolerance) -> Result<()> {
        for (i, c) in self.left_algebra.basis().iter().enumerate() {
            let pc = self.act(c)?;
            for (j, x) in self.module.basis().iter().enumerate() {
                let residual = self.module.membership_residual(&(&pc * x))?;
                if residual > tol.abs_eps {
                    return Err(Error::Invalid {
                        what: "left action",
                        property: "module-preserving action",
                        residual,
                        witness: Some(format!("left[{i}]·basis[{j}]")),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn module(&self) -> &Arc<ConcreteHilbertModule> {
        &self.module
    }

    pub fn left_algebra(&self) -> &Arc<ConcreteCStarAlgebra> {
        &self.left_algebra
    }

    /// `π′(c)` as a `k × k` matrix.
    pub fn act(&self, c: &ComplexMatrix) -> Result<ComplexMatrix> {
        match &self.left_action {
            None => Ok(c.clone()),
            Some(hom) => hom.apply(c),
        }
    }
}
