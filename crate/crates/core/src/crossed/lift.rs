use std::sync::Arc;

use crate::algebra::UnitaryRep;
use crate::check::{Check, Report};
use crate::crossed::{build_crossed_module, integrated_form, CrossedProductModule, Tuple};
use crate::dilation::{
    covariant_dilate, decompose_tau_map, require_covariant, verify_covariant_tau_map, verify_tau_map,
    CPMap, TauDecomposition, TauMap,
};
use crate::error::{Error, Result};
use crate::linalg::{relative_residual, ComplexMatrix, Tolerance};
use crate::module::{Correspondence, ModuleDynamicalSystem};

/// A τ̃-map `T̃: E×_η G → E′` over `τ̃: A×_α G → B`, covariant in the sense
/// `T̃(η_t ∘ m^l_t) = u′_t T̃(m)` and `T̃(m^r_t) = T̃(m) u_t`.
#[derive(Debug, Clone)]
pub struct CrossedTauMap {
    tau_map: TauMap,
    module: Arc<CrossedProductModule>,
    u: UnitaryRep,
    u_prime: UnitaryRep,
    report: Report,
}

impl CrossedTauMap {
    /// `images[t·dim E + j] = T̃(δ_t ⊗ x_j)`; `tau_tilde` is a CP map on the
    /// concrete crossed algebra of `module`.
    pub fn new(
        tau_tilde: CPMap,
        module: Arc<CrossedProductModule>,
        target: Arc<Correspondence>,
        images: Vec<ComplexMatrix>,
        u: UnitaryRep,
        u_prime: UnitaryRep,
        tol: &Tolerance,
    ) -> Result<Self> {
        if u.dim() != tau_tilde.codomain().ambient_dim() || u_prime.dim() != target.left_algebra().ambient_dim() {
            return Err(Error::DomainMismatch("u or u′ has the wrong dimension".into()));
        }
        if u.group() != module.sys().group() || u_prime.group() != module.sys().group() {
            return Err(Error::DomainMismatch("u, u′ and η are over different groups".into()));
        }
        let tau_map = TauMap::new(tau_tilde, module.concrete().clone(), target, images, tol)?;
        let mut ct = Self {
            tau_map,
            module,
            u,
            u_prime,
            report: Report::default(),
        };
        let is_tau_map = verify_tau_map(&ct.tau_map, tol)?;
        if !is_tau_map.passed() {
            return Err(Error::Invalid {
                what: "T̃",
                property: "τ̃-map",
                residual: is_tau_map.residual,
                witness: is_tau_map.witness,
            });
        }
        ct.report.push(is_tau_map);
        ct.report.extend(ct.require_conditions(tol)?);
        Ok(ct)
    }

    pub fn tau_map(&self) -> &TauMap {
        &self.tau_map
    }

    pub fn tau_tilde(&self) -> &CPMap {
        self.tau_map.tau()
    }

    pub fn module(&self) -> &Arc<CrossedProductModule> {
        &self.module
    }

    pub fn u(&self) -> &UnitaryRep {
        &self.u
    }

    pub fn u_prime(&self) -> &UnitaryRep {
        &self.u_prime
    }

    pub fn report(&self) -> &Report {
        &self.report
    }

    /// `T̃(l)` for a tuple `l`.
    pub fn apply(&self, l: &[ComplexMatrix]) -> Result<ComplexMatrix> {
        Ok(self.tau_map.apply_coords(&self.module.coordinates(l)?))
    }

    /// `τ̃(f)` for a tuple `f`.
    pub fn apply_tau(&self, f: &[ComplexMatrix]) -> Result<ComplexMatrix> {
        self.tau_tilde().apply(&self.module.algebra().rep(f)?)
    }

    /// Residuals of conditions (a) and (b) over all group elements and basis
    /// tuples, each with the worst group element.
    pub fn covariance_conditions(&self, tol: &Tolerance) -> Result<[(Check, usize); 2]> {
        let module = &self.module;
        let target = self.tau_map.target();
        let mut a = (Check::new("T̃(η_t ∘ m^l_t) = u′_t T̃(m)", tol.abs_eps), 0);
        let mut b = (Check::new("T̃(m^r_t) = T̃(m) u_t", tol.abs_eps), 0);
        for t in module.sys().group().elements() {
            let left = target.act(self.u_prime.image(t))?;
            for (k, img) in self.tau_map.images().iter().enumerate() {
                let m = module.basis_tuple(k);
                let residual = relative_residual(&self.apply(&module.eta_left(t, &m)?)?, &(&left * img));
                if residual > a.0.residual {
                    a.1 = t;
                }
                a.0.observe(residual, || format!("t = {t}, basis[{k}]"));
                let residual = relative_residual(&self.apply(&module.right_shift(t, &m))?, &(img * self.u.image(t)));
                if residual > b.0.residual {
                    b.1 = t;
                }
                b.0.observe(residual, || format!("t = {t}, basis[{k}]"));
            }
        }
        Ok([a, b])
    }

    fn require_conditions(&self, tol: &Tolerance) -> Result<Report> {
        let mut report = Report::default();
        for ((check, element), condition) in self.covariance_conditions(tol)?.into_iter().zip(['a', 'b']) {
            if !check.passed() {
                return Err(Error::NotCovariantCrossed {
                    condition,
                    element,
                    residual: check.residual,
                });
            }
            report.push(check);
        }
        Ok(report)
    }
}

/// `T̃(l) = Σ_s T(l(s)) u_s` and `τ̃(f) = Σ_t τ(f(t)) u_t` for a covariant τ-map.
pub fn lift_tau_map(
    t: &TauMap,
    sys: &ModuleDynamicalSystem,
    u: &UnitaryRep,
    u_prime: &UnitaryRep,
    tol: &Tolerance,
) -> Result<CrossedTauMap> {
    require_covariant(t, sys, u, u_prime, tol)?;
    let module = Arc::new(build_crossed_module(sys, tol)?);
    lift_over(t, module, u, u_prime, tol)
}

fn lift_over(
    t: &TauMap,
    module: Arc<CrossedProductModule>,
    u: &UnitaryRep,
    u_prime: &UnitaryRep,
    tol: &Tolerance,
) -> Result<CrossedTauMap> {
    let ctol = tol.construction();
    let group = module.sys().group().clone();
    let cp = module.algebra().clone();
    let tau = t.tau();

    let mut tau_images = Vec::with_capacity(cp.dim());
    let mut t_images = Vec::with_capacity(module.dim());
    for g in group.elements() {
        tau_images.extend(tau.images().iter().map(|img| img * u.image(g)));
        t_images.extend(t.images().iter().map(|img| img * u.image(g)));
    }
    let tau_tilde = CPMap::linear(cp.concrete().clone(), tau.codomain().clone(), tau_images, &ctol)?
        .checked(&ctol)
        .map_err(|e| as_construction_failure(e, "τ̃ is completely positive"))?;

    CrossedTauMap::new(
        tau_tilde,
        module,
        t.target().clone(),
        t_images,
        u.clone(),
        u_prime.clone(),
        &ctol,
    )
    .map_err(|e| as_construction_failure(e, "T̃ is a covariant τ̃-map"))
}

fn as_construction_failure(e: Error, check: &'static str) -> Error {
    match e {
        Error::Invalid { residual, .. }
        | Error::NotCovariantCrossed { residual, .. }
        | Error::NotCp {
            min_eigenvalue: residual,
        } => Error::ConstructionCheck {
            check,
            residual,
            threshold: f64::NAN,
        },
        other => other,
    }
}

/// The covariant τ-map `T₀ = S̃*Ψ̃(i_E(·))Ṽ` over `τ₀ = Ṽ*π̃(i_A(·))Ṽ`
/// recovered from a crossed τ̃-map, with the decomposition it came from.
#[derive(Debug, Clone)]
pub struct RestrictedTauMap {
    tau_map: TauMap,
    module: Arc<CrossedProductModule>,
    u: UnitaryRep,
    u_prime: UnitaryRep,
    decomposition: TauDecomposition,
    report: Report,
}

impl RestrictedTauMap {
    pub fn tau_map(&self) -> &TauMap {
        &self.tau_map
    }

    pub fn sys(&self) -> &ModuleDynamicalSystem {
        self.module.sys()
    }

    pub fn u(&self) -> &UnitaryRep {
        &self.u
    }

    pub fn u_prime(&self) -> &UnitaryRep {
        &self.u_prime
    }

    /// The decomposition `(π̃, Ṽ, Ψ̃, S̃)` of the crossed τ̃-map.
    pub fn decomposition(&self) -> &TauDecomposition {
        &self.decomposition
    }

    pub fn report(&self) -> &Report {
        &self.report
    }
}

/// Checks `α_t(⟨m,m′⟩(t⁻¹s)) = ⟨m^r_{t⁻¹}, m′⟩(s)` on all basis pairs.
pub fn shift_identity(module: &CrossedProductModule, tol: &Tolerance) -> Result<(Check, usize)> {
    let group = module.sys().group();
    let alpha = module.sys().induced();
    let tuples: Vec<Tuple> = (0..module.dim()).map(|k| module.basis_tuple(k)).collect();
    let mut check = Check::new("α_t(⟨m,m′⟩(t⁻¹s)) = ⟨m^r_(t⁻¹), m′⟩(s)", tol.abs_eps);
    let mut worst = 0;
    for t in group.elements() {
        let t_inv = group.inv(t);
        for (i, m) in tuples.iter().enumerate() {
            let shifted = module.right_shift(t_inv, m);
            for (j, mp) in tuples.iter().enumerate() {
                let ip = module.inner(m, mp)?;
                let rhs = module.inner(&shifted, mp)?;
                for s in group.elements() {
                    let lhs = alpha.apply(t, &ip[group.mul(t_inv, s)])?;
                    let residual = relative_residual(&lhs, &rhs[s]);
                    if residual > check.residual {
                        worst = t;
                    }
                    check.observe(residual, || format!("t = {t}, pair ({i}, {j}), s = {s}"));
                }
            }
        }
    }
    Ok((check, worst))
}

pub fn restrict_tau_map(ct: &CrossedTauMap, tol: &Tolerance) -> Result<RestrictedTauMap> {
    ct.require_conditions(tol)?;
    let module = ct.module.clone();
    let (identity, element) = shift_identity(&module, tol)?;
    if !identity.passed() {
        return Err(Error::IdentityViolation {
            element,
            residual: identity.residual,
        });
    }

    let dec = decompose_tau_map(&ct.tau_map, tol)?;
    let ctol = tol.construction();
    let cp = module.algebra();
    let base = dec.base();
    let v = base.v();

    let tau_images = cp
        .base()
        .basis()
        .iter()
        .map(|a| Ok(v.adjoint() * base.pi(&cp.i_a(a)?)? * v))
        .collect::<Result<Vec<_>>>()?;
    let tau0 = CPMap::linear(cp.base().clone(), ct.tau_tilde().codomain().clone(), tau_images, &ctol)?
        .checked(&ctol)
        .map_err(|e| as_construction_failure(e, "τ₀ is completely positive"))?;
    let s_star = dec.fpp_space();
    let t_images = module
        .sys()
        .module()
        .basis()
        .iter()
        .map(|x| Ok(s_star * dec.psi(&module.j(x)?)? * v))
        .collect::<Result<Vec<_>>>()?;
    let tau_map = TauMap::new(tau0, module.sys().module().clone(), ct.tau_map.target().clone(), t_images, &ctol)?;

    let mut report = Report::default();
    report.push(identity);
    report.push(verify_tau_map(&tau_map, &ctol)?);
    report.extend(verify_covariant_tau_map(&tau_map, module.sys(), &ct.u, &ct.u_prime, &ctol)?);
    report.require()?;
    Ok(RestrictedTauMap {
        tau_map,
        module,
        u: ct.u.clone(),
        u_prime: ct.u_prime.clone(),
        decomposition: dec,
        report,
    })
}

/// Input to [`roundtrip_check`].
#[derive(Debug, Clone)]
pub enum RoundtripInstance {
    Covariant {
        t: TauMap,
        sys: ModuleDynamicalSystem,
        u: UnitaryRep,
        u_prime: UnitaryRep,
    },
    Crossed(CrossedTauMap),
}

fn max_residual(name: &'static str, xs: &[ComplexMatrix], ys: &[ComplexMatrix], tol: &Tolerance) -> Check {
    let mut check = Check::new(name, tol.abs_eps);
    for (k, (x, y)) in xs.iter().zip(ys).enumerate() {
        check.observe(relative_residual(x, y), || format!("basis[{k}]"));
    }
    if xs.len() != ys.len() {
        check.observe(f64::INFINITY, || "length mismatch".into());
    }
    check
}

fn failed(name: &'static str, e: &Error) -> Check {
    Check {
        name,
        residual: f64::INFINITY,
        threshold: 0.0,
        witness: Some(e.to_string()),
    }
}

/// Compares `‖Ψ̃(m)Ṽb‖` with `‖(Ψ₁×v₁)(m)V₁b‖` via the `b × b` Gram matrices
/// of both sides on every basis tuple, where `(Ψ₁, v₁, V₁)` is the covariant
/// dilation of the restricted map.
fn isometry_check(ct: &CrossedTauMap, restricted: &RestrictedTauMap, tol: &Tolerance) -> Result<Check> {
    let dec = &restricted.decomposition;
    let data = covariant_dilate(&restricted.tau_map, restricted.sys(), &restricted.u, &restricted.u_prime, tol)?;
    let form = integrated_form(&data, &ct.module, tol)?;
    let mut check = Check::new("‖Ψ̃(m)Ṽb‖ = ‖(Ψ₁×v₁)(m)V₁b‖", tol.abs_eps);
    for k in 0..ct.module.dim() {
        let m = ct.module.basis_tuple(k);
        let lhs = dec.psi(&ct.module.concrete().basis()[k])? * dec.base().v();
        let rhs = form.psi(&m)? * data.base().v();
        check.observe(relative_residual(&(lhs.adjoint() * &lhs), &(rhs.adjoint() * &rhs)), || {
            format!("basis[{k}]")
        });
    }
    Ok(check)
}

/// Runs both compositions of lift and restriction and reports the
/// residuals; construction failures show up as failed checks.
pub fn roundtrip_check(instance: &RoundtripInstance, tol: &Tolerance) -> Report {
    let ctol = tol.construction();
    let mut report = Report::default();
    match instance {
        RoundtripInstance::Covariant { t, sys, u, u_prime } => {
            let ct = match lift_tau_map(t, sys, u, u_prime, tol) {
                Ok(ct) => ct,
                Err(e) => {
                    report.push(failed("lift", &e));
                    return report;
                }
            };
            let restricted = match restrict_tau_map(&ct, tol) {
                Ok(r) => r,
                Err(e) => {
                    report.push(failed("restrict", &e));
                    return report;
                }
            };
            report.push(max_residual("restrict(lift(T)) = T", restricted.tau_map.images(), t.images(), &ctol));
            report.push(max_residual(
                "restrict(lift(τ)) = τ",
                restricted.tau_map.tau().images(),
                t.tau().images(),
                &ctol,
            ));
            match lift_over(&restricted.tau_map, ct.module.clone(), u, u_prime, tol) {
                Ok(again) => {
                    report.push(max_residual(
                        "lift(restrict(T̃)) = T̃",
                        again.tau_map.images(),
                        ct.tau_map.images(),
                        &ctol,
                    ));
                    report.push(max_residual(
                        "lift(restrict(τ̃)) = τ̃",
                        again.tau_tilde().images(),
                        ct.tau_tilde().images(),
                        &ctol,
                    ));
                }
                Err(e) => report.push(failed("lift(restrict(T̃))", &e)),
            }
            match isometry_check(&ct, &restricted, tol) {
                Ok(c) => report.push(c),
                Err(e) => report.push(failed("‖Ψ̃(m)Ṽb‖ = ‖(Ψ₁×v₁)(m)V₁b‖", &e)),
            }
        }
        RoundtripInstance::Crossed(ct) => {
            let restricted = match restrict_tau_map(ct, tol) {
                Ok(r) => r,
                Err(e) => {
                    report.push(failed("restrict", &e));
                    return report;
                }
            };
            let again = match lift_over(&restricted.tau_map, ct.module.clone(), &ct.u, &ct.u_prime, tol) {
                Ok(again) => again,
                Err(e) => {
                    report.push(failed("lift", &e));
                    return report;
                }
            };
            report.push(max_residual(
                "lift(restrict(T̃)) = T̃",
                again.tau_map.images(),
                ct.tau_map.images(),
                &ctol,
            ));
            report.push(max_residual(
                "lift(restrict(τ̃)) = τ̃",
                again.tau_tilde().images(),
                ct.tau_tilde().images(),
                &ctol,
            ));
            match restrict_tau_map(&again, tol) {
                Ok(twice) => report.push(max_residual(
                    "restrict(lift(T₀)) = T₀",
                    twice.tau_map.images(),
                    restricted.tau_map.images(),
                    &ctol,
                )),
                Err(e) => report.push(failed("restrict(lift(T₀))", &e)),
            }
            match isometry_check(ct, &restricted, tol) {
                Ok(c) => report.push(c),
                Err(e) => report.push(failed("‖Ψ̃(m)Ṽb‖ = ‖(Ψ₁×v₁)(m)V₁b‖", &e)),
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{canonical_covariant, direct_crossed, rng_from_seed, GroupKind};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn canonical_z2_lift_restricts_back() {
        let inst = canonical_covariant(&mut rng_from_seed(3), GroupKind::Z2, 1, 2, 0, &tol()).unwrap();
        let ct = lift_tau_map(&inst.t, &inst.sys, &inst.u, &inst.u_prime, &tol()).unwrap();
        assert!(ct.report().passed(), "{}", ct.report());
        // δ_e ⊗ x lifts to T(x)
        for (k, x) in inst.t.source().basis().iter().enumerate() {
            let lifted = ct.apply(&ct.module().delta(0, x)).unwrap();
            assert!(tol().close(&lifted, &inst.t.images()[k]));
        }
        let r = restrict_tau_map(&ct, &tol()).unwrap();
        for (x, y) in r.tau_map().images().iter().zip(inst.t.images()) {
            assert!(relative_residual(x, y) <= 1e-8);
        }
    }

    #[test]
    fn roundtrip_reports_pass() {
        for kind in [GroupKind::Trivial, GroupKind::Z2, GroupKind::Z3, GroupKind::S3] {
            let inst = canonical_covariant(&mut rng_from_seed(11), kind, 2, 2, 1, &tol()).unwrap();
            let report = roundtrip_check(
                &RoundtripInstance::Covariant {
                    t: inst.t,
                    sys: inst.sys,
                    u: inst.u,
                    u_prime: inst.u_prime,
                },
                &tol(),
            );
            assert!(report.passed(), "{kind}: {report}");
        }
    }

    #[test]
    fn direct_crossed_instance_roundtrips() {
        for kind in GroupKind::ALL {
            let ct = direct_crossed(&mut rng_from_seed(5), kind, &tol()).unwrap();
            let report = roundtrip_check(&RoundtripInstance::Crossed(ct), &tol());
            assert!(report.passed(), "{kind}: {report}");
        }
    }
}
