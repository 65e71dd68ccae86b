use std::sync::Arc;

use crate::algebra::{AlgebraAction, FiniteGroup};
use crate::check::Check;
use crate::error::{Error, Result};
use crate::linalg::{
    identity, pseudo_inverse, rank, relative_residual, unvectorize, vectorize, zeros, ComplexMatrix, Tolerance,
};
use crate::module::hilbert::inner_product_span_dim;
use crate::module::ConcreteHilbertModule;

/// A finite group acting on a full Hilbert module, together with the action
/// it induces on the coefficient algebra.
#[derive(Debug, Clone)]
pub struct ModuleDynamicalSystem {
    group: Arc<FiniteGroup>,
    module: Arc<ConcreteHilbertModule>,
    /// `eta[t]` maps basis coordinates of `x` to those of `η_t(x)`.
    eta: Vec<ComplexMatrix>,
    induced: AlgebraAction,
}

impl ModuleDynamicalSystem {
    /// `images[t][j] = η_t(x_j)` for the module basis `x_j`.
    pub fn new(
        group: Arc<FiniteGroup>,
        module: Arc<ConcreteHilbertModule>,
        images: Vec<Vec<ComplexMatrix>>,
        tol: &Tolerance,
    ) -> Result<Self> {
        let n = module.dim();
        if images.len() != group.order() || images.iter().any(|imgs| imgs.len() != n) {
            return Err(Error::DimensionMismatch {
                context: "module action images",
                expected: (group.order(), n),
                found: (images.len(), images.first().map_or(0, Vec::len)),
            });
        }
        let mut eta = Vec::with_capacity(group.order());
        for (t, imgs) in images.iter().enumerate() {
            let mut m = zeros(n, n);
            for (j, y) in imgs.iter().enumerate() {
                let (coords, residual) = module_coordinates(&module, y)?;
                if residual > tol.abs_eps {
                    return Err(Error::Invalid {
                        what: "η image",
                        property: "module element",
                        residual,
                        witness: Some(format!("t = {t}, basis[{j}]")),
                    });
                }
                m.set_column(j, &coords);
            }
            if rank(&m, tol) < n {
                return Err(Error::Invalid {
                    what: "η_t",
                    property: "invertible map",
                    residual: f64::NAN,
                    witness: Some(format!("t = {t}")),
                });
            }
            eta.push(m);
        }
        check_group_law(&group, &eta, tol)?;

        let spanned = inner_product_span_dim(&module, tol)?;
        if spanned < module.algebra().dim() {
            return Err(Error::NotFull {
                spanned,
                algebra_dim: module.algebra().dim(),
            });
        }
        let induced = solve_induced_action(&group, &module, &images, tol)?;
        let sys = Self {
            group,
            module,
            eta,
            induced,
        };
        let check = sys.right_action_compatibility(tol)?;
        if !check.passed() {
            return Err(Error::Invalid {
                what: "η",
                property: "α^η-twisted right-module map",
                residual: check.residual,
                witness: check.witness,
            });
        }
        Ok(sys)
    }

    pub fn from_fn(
        group: Arc<FiniteGroup>,
        module: Arc<ConcreteHilbertModule>,
        f: impl Fn(usize, &ComplexMatrix) -> ComplexMatrix,
        tol: &Tolerance,
    ) -> Result<Self> {
        let images = group
            .elements()
            .map(|t| module.basis().iter().map(|x| f(t, x)).collect())
            .collect();
        Self::new(group, module, images, tol)
    }

    /// `η_t = id` for every `t`.
    pub fn trivial(group: Arc<FiniteGroup>, module: Arc<ConcreteHilbertModule>, tol: &Tolerance) -> Result<Self> {
        Self::from_fn(group, module, |_, x| x.clone(), tol)
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn module(&self) -> &Arc<ConcreteHilbertModule> {
        &self.module
    }

    /// The induced action `α^η` on the coefficient algebra.
    pub fn induced(&self) -> &AlgebraAction {
        &self.induced
    }

    /// Coordinate matrix of `η_t`.
    pub fn eta_matrix(&self, t: usize) -> &ComplexMatrix {
        &self.eta[t]
    }

    /// `η_t(x)`.
    pub fn apply(&self, t: usize, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let coords = self.module.coordinates(x)?;
        Ok(self.module.combine(&(&self.eta[t] * coords)))
    }

    /// Worst `‖⟨η_t x, η_t y⟩ − α^η_t(⟨x, y⟩)‖` over basis pairs and `t`.
    pub fn compatibility(&self, tol: &Tolerance) -> Result<Check> {
        let mut check = Check::new("⟨η_t x, η_t y⟩ = α^η_t(⟨x,y⟩)", tol.abs_eps);
        let basis = self.module.basis();
        for t in self.group.elements() {
            let moved = basis.iter().map(|x| self.apply(t, x)).collect::<Result<Vec<_>>>()?;
            for (i, x) in basis.iter().enumerate() {
                for (j, y) in basis.iter().enumerate() {
                    let lhs = moved[i].adjoint() * &moved[j];
                    let rhs = self.induced.apply(t, &self.module.inner(x, y))?;
                    check.observe(relative_residual(&lhs, &rhs), || format!("t = {t}, pair ({i}, {j})"));
                }
            }
        }
        Ok(check)
    }

    /// Worst `‖η_t(x a) − η_t(x) α^η_t(a)‖` over module and algebra bases.
    pub fn right_action_compatibility(&self, tol: &Tolerance) -> Result<Check> {
        let mut check = Check::new("η_t(xa) = η_t(x)α^η_t(a)", tol.abs_eps);
        for t in self.group.elements() {
            for (i, x) in self.module.basis().iter().enumerate() {
                let ex = self.apply(t, x)?;
                for (k, a) in self.module.algebra().basis().iter().enumerate() {
                    let lhs = self.apply(t, &(x * a))?;
                    let rhs = &ex * self.induced.apply(t, a)?;
                    check.observe(relative_residual(&lhs, &rhs), || format!("t = {t}, x[{i}], a[{k}]"));
                }
            }
        }
        Ok(check)
    }
}

/// The action `α^η` determined by the system; see [`ModuleDynamicalSystem::induced`].
pub fn induced_algebra_action(sys: &ModuleDynamicalSystem) -> &AlgebraAction {
    sys.induced()
}

fn module_coordinates(
    module: &ConcreteHilbertModule,
    y: &ComplexMatrix,
) -> Result<(nalgebra::DVector<crate::linalg::C64>, f64)> {
    let coords = module.coordinates(y)?;
    let residual = relative_residual(&module.combine(&coords), y);
    Ok((coords, residual))
}

fn check_group_law(group: &FiniteGroup, eta: &[ComplexMatrix], tol: &Tolerance) -> Result<()> {
    let n = eta[0].nrows();
    let residual = relative_residual(&eta[group.identity()], &identity(n));
    if residual > tol.abs_eps {
        return Err(Error::Invalid {
            what: "module action",
            property: "unital group action (η_e = id)",
            residual,
            witness: None,
        });
    }
    for s in group.elements() {
        for t in group.elements() {
            let residual = relative_residual(&(&eta[s] * &eta[t]), &eta[group.mul(s, t)]);
            if residual > tol.abs_eps {
                return Err(Error::Invalid {
                    what: "module action",
                    property: "group action (η_s∘η_t = η_st)",
                    residual,
                    witness: Some(format!("pair ({s}, {t})")),
                });
            }
        }
    }
    Ok(())
}

/// Least-squares solve for the linear map `x* y ↦ η_t(x)* η_t(y)` on the
/// algebra, one group element at a time.
fn solve_induced_action(
    group: &Arc<FiniteGroup>,
    module: &ConcreteHilbertModule,
    images: &[Vec<ComplexMatrix>],
    tol: &Tolerance,
) -> Result<AlgebraAction> {
    let algebra = module.algebra();
    let d = algebra.ambient_dim();
    let basis = module.basis();
    let n = basis.len();
    let mut products = zeros(algebra.dim(), n * n);
    for (i, x) in basis.iter().enumerate() {
        for (j, y) in basis.iter().enumerate() {
            products.set_column(i * n + j, &algebra.coordinates(&module.inner(x, y))?);
        }
    }
    let products_pinv = pseudo_inverse(&products, tol);
    let mut all_images = Vec::with_capacity(group.order());
    for (t, imgs) in images.iter().enumerate() {
        let mut targets = zeros(d * d, n * n);
        for i in 0..n {
            for j in 0..n {
                targets.set_column(i * n + j, &vectorize(&(imgs[i].adjoint() * &imgs[j])));
            }
        }
        let solution = &targets * &products_pinv;
        let residual = relative_residual(&(&solution * &products), &targets);
        if residual > tol.abs_eps {
            return Err(Error::InconsistentAction { element: t, residual });
        }
        let alpha_t = (0..algebra.dim())
            .map(|mu| unvectorize(&solution.column(mu).into_owned(), d, d))
            .collect();
        all_images.push(alpha_t);
    }
    AlgebraAction::new(group.clone(), algebra.clone(), all_images, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{ConcreteCStarAlgebra, UnitaryRep};
    use crate::linalg::{c, matrix_unit, real_matrix};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn z2_rho() -> UnitaryRep {
        let g = Arc::new(FiniteGroup::cyclic(2));
        UnitaryRep::new(g, vec![identity(2), real_matrix(2, 2, &[1.0, 0.0, 0.0, -1.0])], &tol()).unwrap()
    }

    fn m2_over_itself() -> Arc<ConcreteHilbertModule> {
        let m2 = ConcreteCStarAlgebra::full(2).into_arc();
        ConcreteHilbertModule::full(m2, 2).unwrap().into_arc()
    }

    #[test]
    fn trivial_eta_induces_trivial_action() {
        let g = Arc::new(FiniteGroup::cyclic(3));
        let sys = ModuleDynamicalSystem::trivial(g, m2_over_itself(), &tol()).unwrap();
        for t in 0..3 {
            for a in sys.module().algebra().basis() {
                assert!(tol().close(&sys.induced().apply(t, a).unwrap(), a));
            }
        }
    }

    #[test]
    fn conjugation_induces_inner_action() {
        let rho = z2_rho();
        let sys = ModuleDynamicalSystem::from_fn(
            rho.group().clone(),
            m2_over_itself(),
            |t, x| rho.image(t) * x * rho.image(t).adjoint(),
            &tol(),
        )
        .unwrap();
        for a in sys.module().algebra().basis() {
            let expected = rho.image(1) * a * rho.image(1).adjoint();
            assert!(tol().close(&sys.induced().apply(1, a).unwrap(), &expected));
        }
        assert!(sys.compatibility(&tol()).unwrap().passed());
    }

    #[test]
    fn left_multiplication_induces_trivial_action() {
        let rho = z2_rho();
        let sys =
            ModuleDynamicalSystem::from_fn(rho.group().clone(), m2_over_itself(), |t, x| rho.image(t) * x, &tol())
                .unwrap();
        for a in sys.module().algebra().basis() {
            assert!(tol().close(&sys.induced().apply(1, a).unwrap(), a));
        }
    }

    #[test]
    fn non_full_module_is_rejected() {
        let diag = ConcreteCStarAlgebra::diagonal(2, &tol()).unwrap().into_arc();
        let e = ConcreteHilbertModule::validate(diag, 2, vec![matrix_unit(2, 2, 0, 0)], &tol())
            .unwrap()
            .into_arc();
        let err = ModuleDynamicalSystem::trivial(Arc::new(FiniteGroup::cyclic(2)), e, &tol()).unwrap_err();
        assert!(matches!(err, Error::NotFull { spanned: 1, algebra_dim: 2 }));
    }

    #[test]
    fn transpose_does_not_induce_an_action() {
        // e11*e11 = e21*e21 = e11 but their transposes give e11 and e22
        let g = Arc::new(FiniteGroup::cyclic(2));
        let err = ModuleDynamicalSystem::from_fn(
            g,
            m2_over_itself(),
            |t, x| if t == 0 { x.clone() } else { x.transpose() },
            &tol(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InconsistentAction { element: 1, .. }));
    }

    #[test]
    fn group_law_violation_is_rejected() {
        let g = Arc::new(FiniteGroup::cyclic(2));
        let i = c(0.0, 1.0);
        let err = ModuleDynamicalSystem::from_fn(g, m2_over_itself(), |t, x| if t == 0 { x.clone() } else { x * i }, &tol())
            .unwrap_err();
        assert!(matches!(err, Error::Invalid { what: "module action", .. }));
    }
}
