use std::sync::Arc;

use nalgebra::DVector;

use crate::check::{Check, Report};
use crate::crossed::{CrossedProductModule, Tuple};
use crate::dilation::CovariantStinespringData;
use crate::error::{Error, Result};
use crate::linalg::{combine_images, relative_residual, ComplexMatrix, Tolerance, C64};

/// `(Ψ×v)(l) = Σ_t Ψ(l(t)) v_t` and `(π×v)(g) = Σ_t π(g(t)) v_t`, stored as
/// their values on the basis tuples.
#[derive(Debug, Clone)]
pub struct IntegratedForm {
    module: Arc<CrossedProductModule>,
    psi: Vec<ComplexMatrix>,
    pi: Vec<ComplexMatrix>,
    shape: (usize, usize),
    report: Report,
}

impl IntegratedForm {
    pub fn module(&self) -> &Arc<CrossedProductModule> {
        &self.module
    }

    pub fn report(&self) -> &Report {
        &self.report
    }

    /// `(Ψ×v)(l)`.
    pub fn psi(&self, l: &[ComplexMatrix]) -> Result<ComplexMatrix> {
        let coords = self.module.coordinates(l)?;
        Ok(combine_images(&self.psi, &coords, self.shape.0, self.shape.1))
    }

    pub fn psi_coords(&self, coords: &DVector<C64>) -> ComplexMatrix {
        combine_images(&self.psi, coords, self.shape.0, self.shape.1)
    }

    /// `(π×v)(g)`.
    pub fn pi(&self, g: &[ComplexMatrix]) -> Result<ComplexMatrix> {
        let cp = self.module.algebra();
        let coords = cp.concrete().coordinates(&cp.rep(g)?)?;
        Ok(combine_images(&self.pi, &coords, self.shape.1, self.shape.1))
    }
}

/// Integrates a covariant dilation over the crossed module and checks that
/// the result is a module map and a quasi-representation on basis tuples.
pub fn integrated_form(
    data: &CovariantStinespringData,
    module: &Arc<CrossedProductModule>,
    tol: &Tolerance,
) -> Result<IntegratedForm> {
    let dec = data.decomposition();
    let base = data.base();
    let group = module.sys().group();
    let r = base.dim();
    let q = dec.fpp_space().ncols();

    let mut psi = Vec::with_capacity(module.dim());
    for t in group.elements() {
        for p in dec.psi_basis() {
            psi.push(p * data.v().image(t));
        }
    }
    let mut pi = Vec::with_capacity(module.algebra().dim());
    for t in group.elements() {
        for p in base.pi_basis() {
            pi.push(p * data.v().image(t));
        }
    }
    let mut form = IntegratedForm {
        module: module.clone(),
        psi,
        pi,
        shape: (q, r),
        report: Report::default(),
    };

    let ctol = tol.construction();
    let cp = module.algebra();
    let m_tuples: Vec<Tuple> = (0..module.dim()).map(|k| module.basis_tuple(k)).collect();
    let a_tuples: Vec<Tuple> = (0..cp.dim()).map(|k| cp.basis_tuple(k)).collect();

    let mut hom = Check::new("(Ψ×v)(l·g) = (Ψ×v)(l)(π×v)(g)", ctol.abs_eps);
    for (i, l) in m_tuples.iter().enumerate() {
        for (k, g) in a_tuples.iter().enumerate() {
            let lhs = form.psi(&module.right_action(l, g)?)?;
            let rhs = &form.psi[i] * &form.pi[k];
            hom.observe(relative_residual(&lhs, &rhs), || format!("l = basis[{i}], g = basis[{k}]"));
        }
    }
    let mut quasi = Check::new("(Ψ×v)(m)*(Ψ×v)(l) = (π×v)(⟨m,l⟩)", ctol.abs_eps);
    for (i, m) in m_tuples.iter().enumerate() {
        for (j, l) in m_tuples.iter().enumerate() {
            let lhs = form.psi[i].adjoint() * &form.psi[j];
            let rhs = form.pi(&module.inner(m, l)?)?;
            quasi.observe(relative_residual(&lhs, &rhs), || format!("m = basis[{i}], l = basis[{j}]"));
        }
    }
    for check in [hom, quasi] {
        if !check.passed() {
            return Err(Error::LemmaViolation {
                identity: check.name,
                witness: check.witness.unwrap_or_default(),
                residual: check.residual,
            });
        }
        form.report.push(check);
    }
    Ok(form)
}
