use std::sync::Arc;

use nalgebra::DVector;

use crate::check::{Check, Report};
use crate::dilation::{gns_construct, CPMap, StinespringData};
use crate::error::{Error, Result};
use crate::linalg::{
    column_space, combine_images, hstack, identity, pseudo_inverse, relative_residual, zeros, ComplexMatrix,
    Tolerance, C64,
};
use crate::module::{interior_tensor_space, ConcreteHilbertModule, Correspondence};

/// A linear map `T: E → E′` between Hilbert modules over `A` and `B`,
/// paired with a CP map `τ: A → B`. The τ-map identity is checked by
/// [`verify_tau_map`], not at construction.
#[derive(Debug, Clone)]
pub struct TauMap {
    tau: CPMap,
    source: Arc<ConcreteHilbertModule>,
    target: Arc<Correspondence>,
    images: Vec<ComplexMatrix>,
}

impl TauMap {
    /// `images[j] = T(x_j)` for the basis of `source`; each must lie in the target module.
    pub fn new(
        tau: CPMap,
        source: Arc<ConcreteHilbertModule>,
        target: Arc<Correspondence>,
        images: Vec<ComplexMatrix>,
        tol: &Tolerance,
    ) -> Result<Self> {
        if !source.algebra().same_as(tau.domain(), tol) {
            return Err(Error::DomainMismatch("E is not a module over the domain of τ".into()));
        }
        if !target.module().algebra().same_as(tau.codomain(), tol) {
            return Err(Error::DomainMismatch("E′ is not a module over the codomain of τ".into()));
        }
        if images.len() != source.dim() {
            return Err(Error::DimensionMismatch {
                context: "τ-map images",
                expected: (source.dim(), 1),
                found: (images.len(), 1),
            });
        }
        for (j, y) in images.iter().enumerate() {
            let residual = target.module().membership_residual(y)?;
            if residual > tol.abs_eps {
                return Err(Error::Invalid {
                    what: "T image",
                    property: "element of E′",
                    residual,
                    witness: Some(format!("basis[{j}]")),
                });
            }
        }
        Ok(Self {
            tau,
            source,
            target,
            images,
        })
    }

    pub fn from_fn(
        tau: CPMap,
        source: Arc<ConcreteHilbertModule>,
        target: Arc<Correspondence>,
        f: impl Fn(&ComplexMatrix) -> ComplexMatrix,
        tol: &Tolerance,
    ) -> Result<Self> {
        let images = source.basis().iter().map(f).collect();
        Self::new(tau, source, target, images, tol)
    }

    pub fn tau(&self) -> &CPMap {
        &self.tau
    }

    pub fn source(&self) -> &Arc<ConcreteHilbertModule> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Correspondence> {
        &self.target
    }

    pub fn images(&self) -> &[ComplexMatrix] {
        &self.images
    }

    /// `T(x)`.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let coords = self.source.coordinates(x)?;
        Ok(self.apply_coords(&coords))
    }

    pub fn apply_coords(&self, coords: &DVector<C64>) -> ComplexMatrix {
        let m = self.target.module();
        combine_images(&self.images, coords, m.rows(), m.cols())
    }

    /// The same map with every image transformed by `f`; the result is not
    /// revalidated.
    pub fn map_images_unchecked(&self, f: impl Fn(usize, &ComplexMatrix) -> ComplexMatrix) -> Self {
        Self {
            images: self.images.iter().enumerate().map(|(j, y)| f(j, y)).collect(),
            ..self.clone()
        }
    }
}

/// Worst `‖T(x)*T(y) − τ(x*y)‖` over pairs of basis elements.
pub fn verify_tau_map(t: &TauMap, tol: &Tolerance) -> Result<Check> {
    let mut check = Check::new("⟨T(x),T(y)⟩ = τ(⟨x,y⟩)", tol.abs_eps);
    let basis = t.source.basis();
    for (i, x) in basis.iter().enumerate() {
        for (j, y) in basis.iter().enumerate() {
            let lhs = t.images[i].adjoint() * &t.images[j];
            let rhs = t.tau.apply(&t.source.inner(x, y))?;
            check.observe(relative_residual(&lhs, &rhs), || format!("pair ({i}, {j})"));
        }
    }
    Ok(check)
}

/// `T(x) b = S* Ψ(x) V b` with `Ψ` a quasi-representation over the minimal
/// Stinespring dilation of `τ` and `S` a coisometry onto `[T(E)B]⊙ℂ^b`.
#[derive(Debug, Clone)]
pub struct TauDecomposition {
    base: StinespringData,
    source: Arc<ConcreteHilbertModule>,
    /// `Ψ(x_j)`, each `q × r`, with range in `F′⊙ℂ^b` coordinates.
    psi: Vec<ComplexMatrix>,
    /// `k′ × q` orthonormal basis of `F′⊙ℂ^b` inside `ℂ^{k′}`.
    fpp: ComplexMatrix,
    /// `k′ × dim` orthonormal basis of `E′⊙ℂ^b` inside `ℂ^{k′}`.
    epp: ComplexMatrix,
    report: Report,
}

impl TauDecomposition {
    pub fn base(&self) -> &StinespringData {
        &self.base
    }

    pub fn source(&self) -> &Arc<ConcreteHilbertModule> {
        &self.source
    }

    pub fn psi_basis(&self) -> &[ComplexMatrix] {
        &self.psi
    }

    /// `Ψ(x)`.
    pub fn psi(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let coords = self.source.coordinates(x)?;
        Ok(combine_images(&self.psi, &coords, self.fpp.ncols(), self.base.dim()))
    }

    /// `S: E′⊙ℂ^b → F′⊙ℂ^b`, as a `q × k′` matrix (the adjoint of the inclusion).
    pub fn s(&self) -> ComplexMatrix {
        self.fpp.adjoint()
    }

    pub fn fpp_space(&self) -> &ComplexMatrix {
        &self.fpp
    }

    pub fn epp_space(&self) -> &ComplexMatrix {
        &self.epp
    }

    pub fn report(&self) -> &Report {
        &self.report
    }
}

/// Builds `(π, V, Ψ, S)` for a τ-map. Fails with `IllDefinedPsi` if the
/// values `π(a)Vh ↦ T(xa)h` are inconsistent.
pub fn decompose_tau_map(t: &TauMap, tol: &Tolerance) -> Result<TauDecomposition> {
    let check = verify_tau_map(t, tol)?;
    if !check.passed() {
        return Err(Error::Invalid {
            what: "T",
            property: "τ-map",
            residual: check.residual,
            witness: check.witness,
        });
    }
    let base = gns_construct(&t.tau, tol)?;
    decompose_with_base(t, base, tol)
}

/// As [`decompose_tau_map`], reusing an existing dilation of `t.tau()`.
pub fn decompose_with_base(t: &TauMap, base: StinespringData, tol: &Tolerance) -> Result<TauDecomposition> {
    let module = t.target.module();
    let k = module.rows();
    let algebra = t.source.algebra();

    let epp = interior_tensor_space(module, tol)?.onb;
    let fpp = if t.images.is_empty() {
        zeros(k, 0)
    } else {
        column_space(&hstack(&t.images, k), tol)?
    };

    let family = base.cyclic_family();
    let family_pinv = pseudo_inverse(&family, tol);
    let q = fpp.ncols();
    let mut psi = Vec::with_capacity(t.source.dim());
    for (j, x) in t.source.basis().iter().enumerate() {
        let targets = algebra
            .basis()
            .iter()
            .map(|f| t.apply(&(x * f)))
            .collect::<Result<Vec<_>>>()?;
        let targets = hstack(&targets, k);
        let solution = &targets * &family_pinv;
        let residual = relative_residual(&(&solution * &family), &targets);
        if residual > tol.abs_eps {
            return Err(Error::IllDefinedPsi { element: j, residual });
        }
        psi.push(if q == 0 { zeros(0, base.dim()) } else { fpp.adjoint() * solution });
    }

    let mut dec = TauDecomposition {
        base,
        source: t.source.clone(),
        psi,
        fpp,
        epp,
        report: Report::default(),
    };
    dec.report = decomposition_checks(&dec, t, &tol.construction())?;
    if let Some(failed) = dec.report.first_failure() {
        return Err(Error::ConstructionCheck {
            check: failed.name,
            residual: failed.residual,
            threshold: failed.threshold,
        });
    }
    Ok(dec)
}

/// Quasi-representation law, reconstruction of `T`, and `SS* = 1`.
pub fn decomposition_checks(dec: &TauDecomposition, t: &TauMap, tol: &Tolerance) -> Result<Report> {
    let mut report = Report::default();
    let basis = dec.source.basis();

    let mut quasi = Check::new("Ψ(x)*Ψ(y) = π(⟨x,y⟩)", tol.abs_eps);
    for (i, x) in basis.iter().enumerate() {
        for (j, y) in basis.iter().enumerate() {
            let lhs = dec.psi[i].adjoint() * &dec.psi[j];
            let rhs = dec.base.pi(&dec.source.inner(x, y))?;
            quasi.observe(relative_residual(&lhs, &rhs), || format!("pair ({i}, {j})"));
        }
    }
    report.push(quasi);

    let mut recon = Check::new("T(x) = S*Ψ(x)V", tol.abs_eps);
    let s_star = &dec.fpp;
    for (j, img) in t.images.iter().enumerate() {
        let rebuilt = s_star * &dec.psi[j] * dec.base.v();
        recon.observe(relative_residual(&rebuilt, img), || format!("basis[{j}]"));
    }
    report.push(recon);

    let mut coisometry = Check::new("SS* = 1 on F′⊙H", tol.abs_eps);
    let q = dec.fpp.ncols();
    coisometry.observe(relative_residual(&(dec.fpp.adjoint() * &dec.fpp), &identity(q)), String::new);
    report.push(coisometry);

    let mut inside = Check::new("F′⊙H ⊆ E′⊙H", tol.abs_eps);
    let leak = &dec.fpp - &dec.epp * (dec.epp.adjoint() * &dec.fpp);
    inside.observe(leak.norm() / (1.0 + dec.fpp.norm()), String::new);
    report.push(inside);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ConcreteCStarAlgebra;
    use crate::linalg::{c, vstack};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn kraus_tau() -> CPMap {
        let m2 = ConcreteCStarAlgebra::full(2).into_arc();
        let k1 = ComplexMatrix::from_fn(2, 2, |i, j| c(0.4 * i as f64 - 0.3, 0.2 + 0.5 * j as f64));
        let k2 = ComplexMatrix::from_fn(2, 2, |i, j| c(0.1 * (i + j) as f64, -0.6 * i as f64));
        CPMap::from_kraus(m2.clone(), m2, &[k1, k2], &tol()).unwrap()
    }

    fn identity_tau_map() -> TauMap {
        let m2 = ConcreteCStarAlgebra::full(2).into_arc();
        let e = ConcreteHilbertModule::full(m2.clone(), 2).unwrap().into_arc();
        let target = Arc::new(Correspondence::full(m2.clone(), 2).unwrap());
        TauMap::from_fn(CPMap::identity(m2), e, target, |x| x.clone(), &tol()).unwrap()
    }

    /// `T(a) = π(a)V` lands in the `r × 2` matrices, a τ-map by construction.
    fn gns_tau_map(tau: &CPMap, junk: usize) -> TauMap {
        let base = gns_construct(tau, &tol()).unwrap();
        let m2 = tau.domain().clone();
        let e = ConcreteHilbertModule::full(m2.clone(), 2).unwrap().into_arc();
        let rows = base.dim() + junk;
        let target = Arc::new(Correspondence::full(tau.codomain().clone(), rows).unwrap());
        TauMap::from_fn(
            tau.clone(),
            e,
            target,
            |a| vstack(&[base.pi(a).unwrap() * base.v(), zeros(junk, 2)]),
            &tol(),
        )
        .unwrap()
    }

    #[test]
    fn identity_tau_map_decomposes_trivially() {
        let t = identity_tau_map();
        assert!(verify_tau_map(&t, &tol()).unwrap().passed());
        let dec = decompose_tau_map(&t, &tol()).unwrap();
        assert_eq!(dec.fpp_space().ncols(), 2);
        let s = dec.s();
        assert!(tol().close(&(&s * s.adjoint()), &identity(2)));
        assert!(tol().close(&(s.adjoint() * &s), &identity(2)));
        assert!(dec.report().passed());
    }

    #[test]
    fn doubled_map_is_not_a_tau_map() {
        let t = identity_tau_map().map_images_unchecked(|_, y| y * c(2.0, 0.0));
        let check = verify_tau_map(&t, &tol()).unwrap();
        assert!(!check.passed());
        assert!(matches!(decompose_tau_map(&t, &tol()), Err(Error::Invalid { property: "τ-map", .. })));
    }

    #[test]
    fn gns_module_map_reconstructs() {
        let t = gns_tau_map(&kraus_tau(), 0);
        assert!(verify_tau_map(&t, &tol()).unwrap().passed());
        let dec = decompose_tau_map(&t, &tol()).unwrap();
        let recon = dec.report().get("T(x) = S*Ψ(x)V").unwrap();
        assert!(recon.residual <= 1e-9, "{recon}");
    }

    #[test]
    fn junk_summand_makes_s_a_strict_coisometry() {
        let t = gns_tau_map(&kraus_tau(), 3);
        let dec = decompose_tau_map(&t, &tol()).unwrap();
        let s = dec.s();
        let q = s.nrows();
        let k = s.ncols();
        assert!(tol().close(&(&s * s.adjoint()), &identity(q)));
        assert_eq!(dec.epp_space().ncols(), k);
        // S*S is the projection onto F′⊙H, of rank q < k
        let p = s.adjoint() * &s;
        assert!((p.trace().re - q as f64).abs() < 1e-9);
        assert!(q + 3 <= k);
    }

    #[test]
    fn inconsistent_psi_is_detected() {
        // T(x) = x·w for a unitary w not in the commutant of M₂ is still a
        // τ-map for τ(a) = w* a w, but pairing it with τ = id breaks Ψ
        let m2 = ConcreteCStarAlgebra::full(2).into_arc();
        let e = ConcreteHilbertModule::full(m2.clone(), 2).unwrap().into_arc();
        let target = Arc::new(Correspondence::full(m2.clone(), 2).unwrap());
        let swap = crate::linalg::real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let t = TauMap::from_fn(CPMap::identity(m2), e, target, |x| x * &swap, &tol()).unwrap();
        assert!(!verify_tau_map(&t, &tol()).unwrap().passed());
        let base = gns_construct(t.tau(), &tol()).unwrap();
        assert!(matches!(decompose_with_base(&t, base, &tol()), Err(Error::IllDefinedPsi { .. })));
    }

    #[test]
    fn clustered_cyclic_spectrum_decomposes() {
        use crate::instances::{canonical_covariant, rng_from_seed, GroupKind};
        let inst = canonical_covariant(&mut rng_from_seed(3022), GroupKind::S3, 1, 2, 0, &tol()).unwrap();
        let dec = decompose_tau_map(&inst.t, &tol()).unwrap();
        assert!(dec.report.passed());
    }
}
