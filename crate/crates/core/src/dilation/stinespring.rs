use std::sync::Arc;

use nalgebra::DVector;

use crate::algebra::ConcreteCStarAlgebra;
use crate::check::{Check, Report};
use crate::dilation::{verify_cp, CPMap};
use crate::error::{Error, Result};
use crate::linalg::{
    combine_images, hstack, identity, onb_from_gram, rank, relative_residual, zeros, ComplexMatrix,
    GramBasis, Tolerance, C64,
};

/// Minimal Stinespring data `(π, V)` for a CP map `τ: A → B ⊆ M_b`, built on
/// the Hilbert space `F₀⊙ℂ^b` spanned by the triples `f_μ ⊗ g_ν ⊗ e_i`.
#[derive(Debug, Clone)]
pub struct StinespringData {
    tau: CPMap,
    /// `n × r` coefficients of an orthonormal basis in the spanning triples.
    coeffs: ComplexMatrix,
    /// `π(f_μ)` for the domain basis, each `r × r`.
    pi: Vec<ComplexMatrix>,
    /// `V: ℂ^b → ℂ^r`.
    v: ComplexMatrix,
    gram: GramBasis,
    report: Report,
}

impl StinespringData {
    pub fn tau(&self) -> &CPMap {
        &self.tau
    }

    pub fn domain(&self) -> &Arc<ConcreteCStarAlgebra> {
        self.tau.domain()
    }

    /// Dimension `r` of the dilation space.
    pub fn dim(&self) -> usize {
        self.v.nrows()
    }

    pub fn pi_basis(&self) -> &[ComplexMatrix] {
        &self.pi
    }

    /// `π(a)`.
    pub fn pi(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        let coords = self.domain().coordinates(a)?;
        Ok(self.pi_coords(&coords))
    }

    pub fn pi_coords(&self, coords: &DVector<C64>) -> ComplexMatrix {
        combine_images(&self.pi, coords, self.dim(), self.dim())
    }

    pub fn v(&self) -> &ComplexMatrix {
        &self.v
    }

    pub fn gram(&self) -> &GramBasis {
        &self.gram
    }

    /// Some Gram eigenvalue sits within a factor 10 of the rank cutoff.
    pub fn rank_unstable(&self) -> bool {
        self.gram.near_cutoff()
    }

    /// Post-construction checks, held to the construction tolerance.
    pub fn report(&self) -> &Report {
        &self.report
    }

    /// Spanning family `π(f_μ) V e_i` as the columns of an `r × (m·b)` matrix.
    pub fn cyclic_family(&self) -> ComplexMatrix {
        hstack(&self.pi.iter().map(|p| p * &self.v).collect::<Vec<_>>(), self.dim())
    }

    /// Compresses an operator on the spanning triples to the dilation space:
    /// given `block(μ, λ)` (a `b × b` matrix) and `right` (a `b × b` matrix),
    /// returns the `r × r` matrix of the operator whose Gram-form is
    /// `⟨f_μ⊗g_ν⊗e_i, X (f_λ⊗g_κ⊗e_p)⟩ = e_i* g_ν* block(μ,λ) right g_κ e_p`.
    pub(crate) fn compress(
        &self,
        block: impl Fn(usize, usize) -> Result<ComplexMatrix>,
        right: &ComplexMatrix,
    ) -> Result<ComplexMatrix> {
        let form = triple_form(self.tau.domain().dim(), self.tau.codomain(), block, right)?;
        Ok(self.coeffs.adjoint() * form * &self.coeffs)
    }
}

/// Sesquilinear form on the spanning triples: `K* [block(μ,λ)] (I_m ⊗ right) K`
/// with `K = I_m ⊗ [g_1 … g_B]`.
fn triple_form(
    m: usize,
    codomain: &ConcreteCStarAlgebra,
    block: impl Fn(usize, usize) -> Result<ComplexMatrix>,
    right: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let b = codomain.ambient_dim();
    let gh = hstack(codomain.basis(), b);
    let right_gh = right * &gh;
    let width = gh.ncols();
    let mut form = zeros(m * width, m * width);
    for mu in 0..m {
        for lambda in 0..m {
            let sub = gh.adjoint() * block(mu, lambda)? * &right_gh;
            form.view_mut((mu * width, lambda * width), (width, width)).copy_from(&sub);
        }
    }
    Ok(form)
}

/// GNS construction for a CP map: returns `(π, V)` with `τ(a) = V* π(a) V`
/// and `[π(A) V ℂ^b]` equal to the whole dilation space.
pub fn gns_construct(tau: &CPMap, tol: &Tolerance) -> Result<StinespringData> {
    if !tau.is_cp_checked() {
        let report = verify_cp(tau, tol)?;
        if !report.is_cp {
            return Err(Error::NotCp {
                min_eigenvalue: report.min_eigenvalue,
            });
        }
    }
    let domain = tau.domain();
    let codomain = tau.codomain();
    let m = domain.dim();
    let b = codomain.ambient_dim();
    let basis = domain.basis();
    let adjoints: Vec<_> = basis.iter().map(|f| f.adjoint()).collect();
    let one_b = identity(b);

    let gram = triple_form(m, codomain, |mu, lambda| tau.apply(&(&adjoints[mu] * &basis[lambda])), &one_b)?;
    let onb = onb_from_gram(&gram, tol)?;
    let coeffs = onb.coeffs.clone();

    let mut data = StinespringData {
        tau: tau.clone(),
        coeffs,
        pi: Vec::new(),
        v: zeros(0, b),
        gram: onb,
        report: Report::default(),
    };

    data.pi = basis
        .iter()
        .map(|a| data.compress(|mu, lambda| tau.apply(&(&adjoints[mu] * a * &basis[lambda])), &one_b))
        .collect::<Result<_>>()?;

    // V e_p = 1⊗1⊗e_p; its Gram-form against the triples is e_i* g_ν* τ(f_μ*) e_p
    let gh = hstack(codomain.basis(), b);
    let blocks = adjoints
        .iter()
        .map(|f| Ok(gh.adjoint() * tau.apply(f)?))
        .collect::<Result<Vec<_>>>()?;
    let w = crate::linalg::vstack(&blocks);
    data.v = data.coeffs.adjoint() * w;

    data.report = stinespring_checks(&data, &tol.construction())?;
    if let Some(failed) = data.report.first_failure() {
        return Err(Error::ConstructionCheck {
            check: failed.name,
            residual: failed.residual,
            threshold: failed.threshold,
        });
    }
    Ok(data)
}

/// Verifies that `π` is a unital *-representation, that `τ = V*πV`, and
/// minimality of the dilation.
pub fn stinespring_checks(data: &StinespringData, tol: &Tolerance) -> Result<Report> {
    let domain = data.domain();
    let basis = domain.basis();
    let r = data.dim();
    let mut report = Report::default();

    let mut unital = Check::new("π(1) = 1", tol.abs_eps);
    unital.observe(
        relative_residual(&data.pi_coords(domain.unit_coordinates()), &identity(r)),
        String::new,
    );
    report.push(unital);

    let mut star = Check::new("π(a*) = π(a)*", tol.abs_eps);
    let mut mult = Check::new("π(ab) = π(a)π(b)", tol.abs_eps);
    for (i, a) in basis.iter().enumerate() {
        star.observe(relative_residual(&data.pi(&a.adjoint())?, &data.pi[i].adjoint()), || {
            format!("basis[{i}]")
        });
        for (j, bb) in basis.iter().enumerate() {
            let lhs = data.pi(&(a * bb))?;
            mult.observe(relative_residual(&lhs, &(&data.pi[i] * &data.pi[j])), || {
                format!("basis ({i}, {j})")
            });
        }
    }
    report.push(star);
    report.push(mult);

    let mut dilates = Check::new("τ(a) = V*π(a)V", tol.abs_eps);
    for (i, img) in data.tau.images().iter().enumerate() {
        let rebuilt = data.v.adjoint() * &data.pi[i] * &data.v;
        dilates.observe(relative_residual(&rebuilt, img), || format!("basis[{i}]"));
    }
    report.push(dilates);

    let mut minimal = Check::new("[π(A)Vℂ^b] = dilation space", 0.0);
    let spanned = if r == 0 { 0 } else { rank(&data.cyclic_family(), tol) };
    minimal.observe((r - spanned) as f64, || format!("rank {spanned} of {r}"));
    report.push(minimal);
    Ok(report)
}
