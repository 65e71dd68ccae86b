use crate::algebra::{AlgebraAction, UnitaryRep};
use crate::check::Check;
use crate::dilation::CPMap;
use crate::error::{Error, Result};
use crate::linalg::{relative_residual, zeros, Tolerance, C64};

fn check_shapes(tau: &CPMap, action: &AlgebraAction, u: &UnitaryRep, tol: &Tolerance) -> Result<()> {
    if !tau.domain().same_as(action.algebra(), tol) {
        return Err(Error::DomainMismatch("τ.domain differs from the acted-on algebra".into()));
    }
    if tau.codomain().ambient_dim() != u.dim() {
        return Err(Error::DomainMismatch(format!(
            "u acts on ℂ^{} but τ lands in {}×{} matrices",
            u.dim(),
            tau.codomain().ambient_dim(),
            tau.codomain().ambient_dim()
        )));
    }
    if action.group() != u.group() {
        return Err(Error::DomainMismatch("α and u are over different groups".into()));
    }
    Ok(())
}

/// Worst `‖τ(α_t(a)) − u_t τ(a) u_t*‖` over the domain basis and all `t`.
pub fn verify_covariant_cp(tau: &CPMap, action: &AlgebraAction, u: &UnitaryRep, tol: &Tolerance) -> Result<Check> {
    check_shapes(tau, action, u, tol)?;
    let mut check = Check::new("τ u-covariant", tol.abs_eps);
    for t in action.group().elements() {
        let ut = u.image(t);
        for (k, a) in tau.domain().basis().iter().enumerate() {
            let lhs = tau.apply(&action.apply(t, a)?)?;
            let rhs = ut * tau.apply(a)? * ut.adjoint();
            check.observe(relative_residual(&lhs, &rhs), || format!("t = {t}, basis[{k}]"));
        }
    }
    Ok(check)
}

/// `τ(a) = (1/|G|) Σ_t u_t* φ(α_t(a)) u_t`, a u-covariant CP map.
pub fn group_average_cp(phi: &CPMap, action: &AlgebraAction, u: &UnitaryRep, tol: &Tolerance) -> Result<CPMap> {
    check_shapes(phi, action, u, tol)?;
    let group = action.group();
    let b = phi.codomain().ambient_dim();
    let weight = C64::new(1.0 / group.order() as f64, 0.0);
    let images = phi
        .domain()
        .basis()
        .iter()
        .map(|a| {
            group.elements().try_fold(zeros(b, b), |acc, t| {
                let ut = u.image(t);
                Ok::<_, Error>(acc + ut.adjoint() * phi.apply(&action.apply(t, a)?)? * ut * weight)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let tau = CPMap::new(phi.domain().clone(), phi.codomain().clone(), images, &tol.construction())?;
    let check = verify_covariant_cp(&tau, action, u, &tol.construction())?;
    if !check.passed() {
        return Err(Error::ConstructionCheck {
            check: "group average is u-covariant",
            residual: check.residual,
            threshold: check.threshold,
        });
    }
    Ok(tau)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::algebra::{ConcreteCStarAlgebra, FiniteGroup};
    use crate::linalg::{identity, real_matrix, ComplexMatrix};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn rho() -> UnitaryRep {
        let g = Arc::new(FiniteGroup::cyclic(2));
        UnitaryRep::new(g, vec![identity(2), real_matrix(2, 2, &[1.0, 0.0, 0.0, -1.0])], &tol()).unwrap()
    }

    #[test]
    fn trivial_group_is_always_covariant() {
        let m2 = ConcreteCStarAlgebra::full(2).into_arc();
        let g = Arc::new(FiniteGroup::trivial());
        let action = AlgebraAction::trivial(g.clone(), m2.clone());
        let u = UnitaryRep::trivial(g, 2);
        let images = m2.basis().iter().map(|b| b.transpose()).collect();
        let t = CPMap::linear(m2.clone(), m2, images, &tol()).unwrap();
        assert!(verify_covariant_cp(&t, &action, &u, &tol()).unwrap().passed());
    }

    #[test]
    fn identity_is_covariant_for_matching_inner_action() {
        let m2 = ConcreteCStarAlgebra::full(2).into_arc();
        let action = AlgebraAction::inner(m2.clone(), &rho(), &tol()).unwrap();
        assert!(verify_covariant_cp(&CPMap::identity(m2), &action, &rho(), &tol()).unwrap().passed());
    }

    #[test]
    fn identity_is_not_covariant_for_trivial_u() {
        let m2 = ConcreteCStarAlgebra::full(2).into_arc();
        let action = AlgebraAction::inner(m2.clone(), &rho(), &tol()).unwrap();
        let u = UnitaryRep::trivial(rho().group().clone(), 2);
        let check = verify_covariant_cp(&CPMap::identity(m2), &action, &u, &tol()).unwrap();
        assert!(!check.passed());
        // α_g(e12) = −e12 while u ≡ 1 leaves e12 fixed: ‖−2 e12‖ / (1 + 1)
        assert!((check.residual - 1.0).abs() < 1e-12);
    }

    #[test]
    fn averaging_identity_gives_diagonal_pinching() {
        let m2 = ConcreteCStarAlgebra::full(2).into_arc();
        // u ≡ 1 averages a over {a, ρaρ*}, killing the off-diagonal part
        let action = AlgebraAction::inner(m2.clone(), &rho(), &tol()).unwrap();
        let u = UnitaryRep::trivial(rho().group().clone(), 2);
        let tau = group_average_cp(&CPMap::identity(m2.clone()), &action, &u, &tol()).unwrap();
        let a = real_matrix(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let pinched = real_matrix(2, 2, &[1.0, 0.0, 0.0, 4.0]);
        assert!(tol().close(&tau.apply(&a).unwrap(), &pinched));
    }

    #[test]
    fn averaging_an_already_covariant_map_changes_nothing() {
        let m2 = ConcreteCStarAlgebra::full(2).into_arc();
        let action = AlgebraAction::inner(m2.clone(), &rho(), &tol()).unwrap();
        let tau = group_average_cp(&CPMap::identity(m2.clone()), &action, &rho(), &tol()).unwrap();
        for (x, y) in tau.images().iter().zip(m2.basis()) {
            assert!(tol().close(x, y));
        }
    }

    #[test]
    fn averaging_over_trivial_group_is_identity_operation() {
        let m2 = ConcreteCStarAlgebra::full(2).into_arc();
        let g = Arc::new(FiniteGroup::trivial());
        let action = AlgebraAction::trivial(g.clone(), m2.clone());
        let k = ComplexMatrix::from_fn(2, 2, |i, j| crate::linalg::c(i as f64 + 0.5, j as f64 - 0.25));
        let phi = CPMap::from_kraus(m2.clone(), m2, &[k], &tol()).unwrap();
        let tau = group_average_cp(&phi, &action, &UnitaryRep::trivial(g, 2), &tol()).unwrap();
        for (x, y) in tau.images().iter().zip(phi.images()) {
            assert!(tol().close(x, y));
        }
    }
}
