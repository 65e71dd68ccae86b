use std::sync::Arc;

use crate::algebra::{AlgebraAction, ConcreteCStarAlgebra, FiniteGroup};
use crate::check::{Check, Report};
use crate::error::{Error, Result};
use crate::linalg::{direct_sum, relative_residual, zeros, ComplexMatrix, Tolerance};

/// A `G`-indexed tuple of matrices, `f[t] = f(t)`.
pub type Tuple = Vec<ComplexMatrix>;

/// `A ×_α G` for a finite group, realised on `ℂ^d ⊗ ℂ^{|G|}` by the regular
/// covariant pair `(i_A, i_G)`. Block `s` of `ℂ^{d·|G|}` holds `ξ(s)`.
#[derive(Debug, Clone)]
pub struct CrossedProductAlgebra {
    action: AlgebraAction,
    concrete: Arc<ConcreteCStarAlgebra>,
    report: Report,
}

impl CrossedProductAlgebra {
    pub fn action(&self) -> &AlgebraAction {
        &self.action
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        self.action.group()
    }

    pub fn base(&self) -> &Arc<ConcreteCStarAlgebra> {
        self.action.algebra()
    }

    /// The concrete algebra spanned by `i_A(f_μ) i_G(t)`, with basis index `t·dim A + μ`.
    pub fn concrete(&self) -> &Arc<ConcreteCStarAlgebra> {
        &self.concrete
    }

    pub fn dim(&self) -> usize {
        self.concrete.dim()
    }

    pub fn report(&self) -> &Report {
        &self.report
    }

    /// `i_A(a) = ⊕_s α_{s⁻¹}(a)`.
    pub fn i_a(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        twisted_diagonal(self.group(), a, |t, x| self.action.apply(t, x))
    }

    /// `(i_G(t) ξ)(s) = ξ(t⁻¹ s)` on `ℂ^d ⊗ ℂ^{|G|}`.
    pub fn i_g(&self, t: usize) -> ComplexMatrix {
        regular_shift(self.group(), self.base().ambient_dim(), t)
    }

    /// `Σ_t i_A(f(t)) i_G(t)`.
    pub fn rep(&self, f: &[ComplexMatrix]) -> Result<ComplexMatrix> {
        let n = self.group().order() * self.base().ambient_dim();
        let mut out = zeros(n, n);
        for (t, ft) in f.iter().enumerate().filter(|(_, ft)| !is_zero(ft)) {
            out += self.i_a(ft)? * self.i_g(t);
        }
        Ok(out)
    }

    /// `(f ★ g)(s) = Σ_t f(t) α_t(g(t⁻¹ s))`.
    pub fn convolve(&self, f: &[ComplexMatrix], g: &[ComplexMatrix]) -> Result<Tuple> {
        let group = self.group();
        let d = self.base().ambient_dim();
        let mut out = vec![zeros(d, d); group.order()];
        for t in group.elements().filter(|&t| !is_zero(&f[t])) {
            for r in group.elements().filter(|&r| !is_zero(&g[r])) {
                out[group.mul(t, r)] += &f[t] * self.action.apply(t, &g[r])?;
            }
        }
        Ok(out)
    }

    /// `f^★(s) = α_s(f(s⁻¹))*`.
    pub fn involution(&self, f: &[ComplexMatrix]) -> Result<Tuple> {
        let group = self.group();
        group
            .elements()
            .map(|s| Ok(self.action.apply(s, &f[group.inv(s)])?.adjoint()))
            .collect()
    }

    /// `δ_t ⊗ f_μ` for basis index `t·dim A + μ`.
    pub fn basis_tuple(&self, k: usize) -> Tuple {
        let m = self.base().dim();
        self.delta(k / m, &self.base().basis()[k % m])
    }

    /// `δ_t ⊗ a`.
    pub fn delta(&self, t: usize, a: &ComplexMatrix) -> Tuple {
        let d = self.base().ambient_dim();
        let mut f = vec![zeros(d, d); self.group().order()];
        f[t] = a.clone();
        f
    }

    /// The tuple represented by an element of the concrete algebra.
    pub fn tuple_of(&self, x: &ComplexMatrix) -> Result<Tuple> {
        let coords = self.concrete.coordinates(x)?;
        let m = self.base().dim();
        let d = self.base().ambient_dim();
        let basis = self.base().basis();
        Ok(self
            .group()
            .elements()
            .map(|t| (0..m).fold(zeros(d, d), |acc, mu| acc + &basis[mu] * coords[t * m + mu]))
            .collect())
    }
}

pub(crate) fn is_zero(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re == 0.0 && z.im == 0.0)
}

/// `⊕_s β_{s⁻¹}(x)` for a group action `β`.
pub(crate) fn twisted_diagonal(
    group: &FiniteGroup,
    x: &ComplexMatrix,
    beta: impl Fn(usize, &ComplexMatrix) -> Result<ComplexMatrix>,
) -> Result<ComplexMatrix> {
    let blocks = group.elements().map(|s| beta(group.inv(s), x)).collect::<Result<Vec<_>>>()?;
    Ok(direct_sum(&blocks.iter().collect::<Vec<_>>()))
}

/// Block permutation `(i_G(t) ξ)(s) = ξ(t⁻¹ s)` with blocks of size `d`.
pub(crate) fn regular_shift(group: &FiniteGroup, d: usize, t: usize) -> ComplexMatrix {
    let n = group.order();
    let mut m = zeros(d * n, d * n);
    for s in group.elements() {
        let src = group.mul(group.inv(t), s);
        for i in 0..d {
            m[(s * d + i, src * d + i)] = crate::linalg::c(1.0, 0.0);
        }
    }
    m
}

/// Builds the concrete crossed product and cross-checks convolution and
/// involution against the regular representation on all basis pairs.
pub fn build_crossed_algebra(action: &AlgebraAction, tol: &Tolerance) -> Result<CrossedProductAlgebra> {
    let group = action.group();
    let base = action.algebra();
    let d = base.ambient_dim();
    let m = base.dim();
    let i_a: Vec<_> = base
        .basis()
        .iter()
        .map(|f| twisted_diagonal(group, f, |t, x| action.apply(t, x)))
        .collect::<Result<_>>()?;
    let i_g: Vec<_> = group.elements().map(|t| regular_shift(group, d, t)).collect();
    let mut basis = Vec::with_capacity(group.order() * m);
    for g in &i_g {
        for a in &i_a {
            basis.push(a * g);
        }
    }
    let ctol = tol.construction();
    let mut shell = CrossedProductAlgebra {
        action: action.clone(),
        concrete: ConcreteCStarAlgebra::validate(d * group.order(), basis, &ctol)?.into_arc(),
        report: Report::default(),
    };

    let dim = shell.dim();
    let tuples: Vec<_> = (0..dim).map(|k| shell.basis_tuple(k)).collect();
    let mut conv = Check::new("rep(f★g) = rep(f)rep(g)", ctol.abs_eps);
    for (i, f) in tuples.iter().enumerate() {
        for (j, g) in tuples.iter().enumerate() {
            let lhs = shell.rep(&shell.convolve(f, g)?)?;
            let rhs = &shell.concrete.basis()[i] * &shell.concrete.basis()[j];
            let residual = relative_residual(&lhs, &rhs);
            if residual > ctol.abs_eps {
                return Err(Error::RepresentationMismatch {
                    left: i,
                    right: j,
                    residual,
                });
            }
            conv.observe(residual, || format!("basis ({i}, {j})"));
        }
    }
    let mut star = Check::new("rep(f^★) = rep(f)*", ctol.abs_eps);
    for (i, f) in tuples.iter().enumerate() {
        let residual = relative_residual(&shell.rep(&shell.involution(f)?)?, &shell.concrete.basis()[i].adjoint());
        if residual > ctol.abs_eps {
            return Err(Error::RepresentationMismatch {
                left: i,
                right: i,
                residual,
            });
        }
        star.observe(residual, || format!("basis[{i}]"));
    }
    shell.report.push(conv);
    shell.report.push(star);
    Ok(shell)
}
