use crate::algebra::{AlgebraAction, UnitaryRep};
use crate::check::{Check, Report};
use crate::dilation::{decompose_tau_map, StinespringData, TauDecomposition, TauMap};
use crate::error::{Error, Result};
use crate::linalg::{relative_residual, ComplexMatrix, Tolerance};
use crate::module::ModuleDynamicalSystem;

/// `(π, V, Ψ, S)` together with unitary representations `v` on the dilation
/// space and `w` on `F′⊙ℂ^b` that make every piece covariant.
#[derive(Debug, Clone)]
pub struct CovariantStinespringData {
    dec: TauDecomposition,
    v: UnitaryRep,
    w: UnitaryRep,
    report: Report,
}

impl CovariantStinespringData {
    pub fn decomposition(&self) -> &TauDecomposition {
        &self.dec
    }

    pub fn base(&self) -> &StinespringData {
        self.dec.base()
    }

    pub fn v(&self) -> &UnitaryRep {
        &self.v
    }

    pub fn w(&self) -> &UnitaryRep {
        &self.w
    }

    pub fn report(&self) -> &Report {
        &self.report
    }
}

fn check_shapes(t: &TauMap, sys: &ModuleDynamicalSystem, u: &UnitaryRep, u_prime: &UnitaryRep) -> Result<()> {
    if sys.module().dim() != t.source().dim() || sys.module().rows() != t.source().rows() {
        return Err(Error::DomainMismatch("η acts on a different module than T".into()));
    }
    if u.dim() != t.tau().codomain().ambient_dim() {
        return Err(Error::DomainMismatch(format!(
            "u acts on ℂ^{} but B acts on ℂ^{}",
            u.dim(),
            t.tau().codomain().ambient_dim()
        )));
    }
    if u_prime.dim() != t.target().left_algebra().ambient_dim() {
        return Err(Error::DomainMismatch(format!(
            "u′ has dimension {} but C acts on ℂ^{}",
            u_prime.dim(),
            t.target().left_algebra().ambient_dim()
        )));
    }
    if sys.group() != u.group() || sys.group() != u_prime.group() {
        return Err(Error::DomainMismatch("η, u and u′ are over different groups".into()));
    }
    Ok(())
}

/// `π′(u′_t)` for every `t`, as `k′ × k′` matrices.
fn left_unitaries(t: &TauMap, u_prime: &UnitaryRep) -> Result<Vec<ComplexMatrix>> {
    u_prime.images().iter().map(|c| t.target().act(c)).collect()
}

/// Worst covariance residual with its `(t, basis)` location.
fn tau_map_covariance(
    t: &TauMap,
    sys: &ModuleDynamicalSystem,
    u: &UnitaryRep,
    lifted: &[ComplexMatrix],
    tol: &Tolerance,
) -> Result<(Check, (usize, usize))> {
    let mut check = Check::new("T(η_t x) = u′_t T(x) u_t*", tol.abs_eps);
    let mut worst = (0, 0);
    for g in sys.group().elements() {
        for (j, x) in sys.module().basis().iter().enumerate() {
            let lhs = t.apply(&sys.apply(g, x)?)?;
            let rhs = &lifted[g] * &t.images()[j] * u.image(g).adjoint();
            let residual = relative_residual(&lhs, &rhs);
            if residual > check.residual || residual.is_nan() {
                worst = (g, j);
            }
            check.observe(residual, || format!("t = {g}, basis[{j}]"));
        }
    }
    Ok((check, worst))
}

fn induced_covariance(
    t: &TauMap,
    action: &AlgebraAction,
    u: &UnitaryRep,
    tol: &Tolerance,
) -> Result<(Check, usize)> {
    let mut check = Check::new("τ(α^η_t a) = u_t τ(a) u_t*", tol.abs_eps);
    let mut worst = 0;
    for g in action.group().elements() {
        let ug = u.image(g);
        for (k, a) in t.tau().domain().basis().iter().enumerate() {
            let lhs = t.tau().apply(&action.apply(g, a)?)?;
            let rhs = ug * t.tau().apply(a)? * ug.adjoint();
            let residual = relative_residual(&lhs, &rhs);
            if residual > check.residual || residual.is_nan() {
                worst = g;
            }
            check.observe(residual, || format!("t = {g}, basis[{k}]"));
        }
    }
    Ok((check, worst))
}

/// Covariance of `T` plus the derived u-covariance of `τ` for `α^η`.
pub fn verify_covariant_tau_map(
    t: &TauMap,
    sys: &ModuleDynamicalSystem,
    u: &UnitaryRep,
    u_prime: &UnitaryRep,
    tol: &Tolerance,
) -> Result<Report> {
    check_shapes(t, sys, u, u_prime)?;
    let lifted = left_unitaries(t, u_prime)?;
    let mut report = Report::default();
    report.push(tau_map_covariance(t, sys, u, &lifted, tol)?.0);
    report.push(induced_covariance(t, sys.induced(), u, tol)?.0);
    Ok(report)
}

/// Fails unless `T` is `(u′,u)`-covariant and `τ` is `u`-covariant for the
/// induced action; returns `π′(u′_t)` for every `t`.
pub(crate) fn require_covariant(
    t: &TauMap,
    sys: &ModuleDynamicalSystem,
    u: &UnitaryRep,
    u_prime: &UnitaryRep,
    tol: &Tolerance,
) -> Result<Vec<ComplexMatrix>> {
    check_shapes(t, sys, u, u_prime)?;
    let lifted = left_unitaries(t, u_prime)?;
    let (check, (element, basis)) = tau_map_covariance(t, sys, u, &lifted, tol)?;
    if !check.passed() {
        return Err(Error::NotCovariantTauMap {
            element,
            basis,
            residual: check.residual,
        });
    }
    let (check, element) = induced_covariance(t, sys.induced(), u, tol)?;
    if !check.passed() {
        return Err(Error::InducedCovarianceBroken {
            element,
            residual: check.residual,
        });
    }
    Ok(lifted)
}

/// The unitaries `v_t(a ⊗ b ⊗ h) = α_t(a) ⊗ u_t b ⊗ h` on the dilation
/// space of a u-covariant CP map. Unitarity is not checked here.
pub fn stinespring_unitaries(
    base: &StinespringData,
    action: &AlgebraAction,
    u: &UnitaryRep,
) -> Result<Vec<ComplexMatrix>> {
    let tau = base.tau();
    let basis = tau.domain().basis();
    let adjoints: Vec<_> = basis.iter().map(|f| f.adjoint()).collect();
    action
        .group()
        .elements()
        .map(|g| {
            let moved = basis.iter().map(|f| action.apply(g, f)).collect::<Result<Vec<_>>>()?;
            base.compress(|mu, lambda| tau.apply(&(&adjoints[mu] * &moved[lambda])), u.image(g))
        })
        .collect()
}

/// The covariant dilation of a covariant τ-map: `v` on the dilation space
/// and `w` on `F′⊙ℂ^b` with `π`, `V`, `S` and `Ψ` all intertwining.
pub fn covariant_dilate(
    t: &TauMap,
    sys: &ModuleDynamicalSystem,
    u: &UnitaryRep,
    u_prime: &UnitaryRep,
    tol: &Tolerance,
) -> Result<CovariantStinespringData> {
    let lifted = require_covariant(t, sys, u, u_prime, tol)?;
    let dec = decompose_tau_map(t, tol)?;
    let ctol = tol.construction();
    let v_images = stinespring_unitaries(dec.base(), sys.induced(), u)?;
    let v = UnitaryRep::new(sys.group().clone(), v_images, &ctol).map_err(|e| construction_error("v is a unitary representation", e))?;

    let q = dec.fpp_space();
    let mut w_images = Vec::with_capacity(sys.group().order());
    for (g, up) in lifted.iter().enumerate() {
        let moved = up * q;
        let compressed = q.adjoint() * &moved;
        let residual = relative_residual(&(q * &compressed), &moved);
        if residual > tol.abs_eps {
            return Err(Error::FprimeNotInvariant { element: g, residual });
        }
        w_images.push(compressed);
    }
    let w = UnitaryRep::new(sys.group().clone(), w_images, &ctol).map_err(|e| construction_error("w is a unitary representation", e))?;

    let mut data = CovariantStinespringData {
        dec,
        v,
        w,
        report: Report::default(),
    };
    data.report = covariant_checks(&data, sys, u, &lifted, &ctol)?;
    data.report.require()?;
    Ok(data)
}

fn construction_error(check: &'static str, e: Error) -> Error {
    match e {
        Error::Invalid { residual, .. } => Error::ConstructionCheck {
            check,
            residual,
            threshold: f64::NAN,
        },
        other => other,
    }
}

fn covariant_checks(
    data: &CovariantStinespringData,
    sys: &ModuleDynamicalSystem,
    u: &UnitaryRep,
    lifted: &[ComplexMatrix],
    tol: &Tolerance,
) -> Result<Report> {
    let base = data.base();
    let dec = &data.dec;
    let alpha = sys.induced();
    let a_basis = base.domain().basis();
    let e_basis = sys.module().basis();
    let s = dec.s();
    let epp = dec.epp_space();

    let mut pi_cov = Check::new("π(α_t a) = v_t π(a) v_t*", tol.abs_eps);
    let mut intertwine = Check::new("v_t V = V u_t", tol.abs_eps);
    let mut s_cov = Check::new("w_t S = S u′_t", tol.abs_eps);
    let mut psi_cov = Check::new("Ψ(η_t x) = w_t Ψ(x) v_t*", tol.abs_eps);
    let mut assoc = Check::new("Ψ(η_t x)*Ψ(η_t y) = v_t π(⟨x,y⟩) v_t*", tol.abs_eps);
    for g in sys.group().elements() {
        let vg = data.v.image(g);
        let wg = data.w.image(g);
        for (k, a) in a_basis.iter().enumerate() {
            let lhs = base.pi(&alpha.apply(g, a)?)?;
            let rhs = vg * &base.pi_basis()[k] * vg.adjoint();
            pi_cov.observe(relative_residual(&lhs, &rhs), || format!("t = {g}, basis[{k}]"));
        }
        intertwine.observe(
            relative_residual(&(vg * base.v()), &(base.v() * u.image(g))),
            || format!("t = {g}"),
        );
        s_cov.observe(
            relative_residual(&(wg * &s * epp), &(&s * &lifted[g] * epp)),
            || format!("t = {g}"),
        );
        let moved = e_basis
            .iter()
            .map(|x| dec.psi(&sys.apply(g, x)?))
            .collect::<Result<Vec<_>>>()?;
        for (j, psi_x) in dec.psi_basis().iter().enumerate() {
            let rhs = wg * psi_x * vg.adjoint();
            psi_cov.observe(relative_residual(&moved[j], &rhs), || format!("t = {g}, basis[{j}]"));
            for (l, psi_y) in dec.psi_basis().iter().enumerate() {
                let lhs = moved[j].adjoint() * &moved[l];
                let rhs = vg * psi_x.adjoint() * psi_y * vg.adjoint();
                assoc.observe(relative_residual(&lhs, &rhs), || format!("t = {g}, pair ({j}, {l})"));
            }
        }
    }
    let mut report = Report::default();
    for c in [pi_cov, intertwine, s_cov, psi_cov, assoc] {
        report.push(c);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::algebra::{group_average_cp, ConcreteCStarAlgebra, FiniteGroup};
    use crate::dilation::{gns_construct, CPMap};
    use crate::linalg::{c, identity, real_matrix};
    use crate::module::{ConcreteHilbertModule, Correspondence};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    struct Instance {
        t: TauMap,
        sys: ModuleDynamicalSystem,
        u: UnitaryRep,
        u_prime: UnitaryRep,
    }

    /// `G = ℤ/2`, `E = A = M₂`, `η = Ad(ρ)`, `τ` a group average, `T(a) = π(a)V`
    /// and `u′ = v`.
    fn z2_instance() -> Instance {
        let m2 = ConcreteCStarAlgebra::full(2).into_arc();
        let group = Arc::new(FiniteGroup::cyclic(2));
        let rho = UnitaryRep::new(group.clone(), vec![identity(2), real_matrix(2, 2, &[1.0, 0.0, 0.0, -1.0])], &tol())
            .unwrap();
        let action = AlgebraAction::inner(m2.clone(), &rho, &tol()).unwrap();
        let k = ComplexMatrix::from_fn(2, 2, |i, j| c(0.3 + 0.2 * i as f64, 0.5 * j as f64 - 0.1));
        let phi = CPMap::from_kraus(m2.clone(), m2.clone(), &[k], &tol()).unwrap();
        let tau = group_average_cp(&phi, &action, &rho, &tol()).unwrap();
        let base = gns_construct(&tau, &tol()).unwrap();
        let v = UnitaryRep::new(group.clone(), stinespring_unitaries(&base, &action, &rho).unwrap(), &tol()).unwrap();

        let e = ConcreteHilbertModule::full(m2.clone(), 2).unwrap().into_arc();
        let sys =
            ModuleDynamicalSystem::from_fn(group, e.clone(), |g, x| rho.image(g) * x * rho.image(g).adjoint(), &tol())
                .unwrap();
        let target = Arc::new(Correspondence::full(m2, base.dim()).unwrap());
        let t = TauMap::from_fn(tau, e, target, |a| base.pi(a).unwrap() * base.v(), &tol()).unwrap();
        Instance { t, sys, u: rho, u_prime: v }
    }

    #[test]
    fn canonical_z2_instance_dilates_covariantly() {
        let inst = z2_instance();
        let report = verify_covariant_tau_map(&inst.t, &inst.sys, &inst.u, &inst.u_prime, &tol()).unwrap();
        assert!(report.passed(), "{report}");
        let data = covariant_dilate(&inst.t, &inst.sys, &inst.u, &inst.u_prime, &tol()).unwrap();
        for check in &data.report().checks {
            assert!(check.residual <= 1e-9, "{check}");
        }
    }

    #[test]
    fn trivial_group_gives_trivial_unitaries() {
        let inst = z2_instance();
        let g = Arc::new(FiniteGroup::trivial());
        let sys = ModuleDynamicalSystem::trivial(g.clone(), inst.t.source().clone(), &tol()).unwrap();
        let u = UnitaryRep::trivial(g.clone(), 2);
        let up = UnitaryRep::trivial(g, inst.t.target().left_algebra().ambient_dim());
        let data = covariant_dilate(&inst.t, &sys, &u, &up, &tol()).unwrap();
        assert!(tol().close(data.v().image(0), &identity(data.base().dim())));
        assert!(tol().close(data.w().image(0), &identity(data.decomposition().fpp_space().ncols())));
    }

    #[test]
    fn sign_corrupted_u_is_not_covariant() {
        let inst = z2_instance();
        let bad = inst.u.map_images_unchecked(|g, u| if g == 0 { u.clone() } else { -u });
        let err = covariant_dilate(&inst.t, &inst.sys, &bad, &inst.u_prime, &tol()).unwrap_err();
        match err {
            Error::NotCovariantTauMap { element, residual, .. } => {
                assert_eq!(element, 1);
                assert!(residual > 0.1);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn u_prime_moving_the_range_of_t_is_rejected() {
        // pad E′ with a junk row and let u′ swap it into the range of T; since
        // covariance of T already forces u′ to preserve [T(E)B]⊙H, this
        // surfaces as a covariance failure
        let inst = z2_instance();
        let r = inst.t.target().left_algebra().ambient_dim();
        let m2 = inst.t.tau().codomain().clone();
        let target = Arc::new(Correspondence::full(m2, r + 1).unwrap());
        let images = inst
            .t
            .images()
            .iter()
            .map(|y| crate::linalg::vstack(&[y.clone(), crate::linalg::zeros(1, 2)]))
            .collect();
        let t = TauMap::new(inst.t.tau().clone(), inst.t.source().clone(), target, images, &tol()).unwrap();
        let mut swap = identity(r + 1);
        swap.swap_rows(1, r);
        // u′ = (v ⊕ 1) conjugated by the swap of row 1 and the junk row, a
        // representation that no longer agrees with v on the range of T
        let images: Vec<_> = inst
            .u_prime
            .images()
            .iter()
            .map(|v| &swap * crate::linalg::direct_sum(&[v, &identity(1)]) * &swap)
            .collect();
        let up = UnitaryRep::new(inst.u.group().clone(), images, &tol()).unwrap();
        let err = covariant_dilate(&t, &inst.sys, &inst.u, &up, &tol()).unwrap_err();
        assert!(matches!(err, Error::NotCovariantTauMap { .. }));
    }
}
