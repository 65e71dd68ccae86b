use std::sync::Arc;

use nalgebra::DVector;

use crate::check::{Check, Report};
use crate::crossed::algebra::{is_zero, regular_shift, twisted_diagonal, Tuple};
use crate::crossed::{build_crossed_algebra, CrossedProductAlgebra};
use crate::error::Result;
use crate::linalg::{c, psd_report, relative_residual, zeros, ComplexMatrix, Tolerance, C64};
use crate::module::{ConcreteHilbertModule, ModuleDynamicalSystem};

/// `E ×_η G` for a finite group. A tuple `l` is represented by
/// `L(l) = Σ_t J(l(t)) i_G(t)` with `J(x) = ⊕_s η_{s⁻¹}(x)`, a `k|G| × d|G|`
/// matrix, so the module is concrete over the concrete crossed algebra.
#[derive(Debug, Clone)]
pub struct CrossedProductModule {
    sys: ModuleDynamicalSystem,
    algebra: Arc<CrossedProductAlgebra>,
    concrete: Arc<ConcreteHilbertModule>,
    report: Report,
}

impl CrossedProductModule {
    pub fn sys(&self) -> &ModuleDynamicalSystem {
        &self.sys
    }

    pub fn algebra(&self) -> &Arc<CrossedProductAlgebra> {
        &self.algebra
    }

    /// The concrete module spanned by `L(δ_t ⊗ x_j)`, basis index `t·dim E + j`.
    pub fn concrete(&self) -> &Arc<ConcreteHilbertModule> {
        &self.concrete
    }

    pub fn dim(&self) -> usize {
        self.concrete.dim()
    }

    pub fn report(&self) -> &Report {
        &self.report
    }

    fn base_shape(&self) -> (usize, usize) {
        let e = self.sys.module();
        (e.rows(), e.cols())
    }

    /// `i_E(x) = J(x) = L(δ_e ⊗ x)`.
    pub fn j(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        twisted_diagonal(self.sys.group(), x, |t, y| self.sys.apply(t, y))
    }

    /// `L(l) = Σ_t J(l(t)) i_G(t)`.
    pub fn l_op(&self, l: &[ComplexMatrix]) -> Result<ComplexMatrix> {
        let group = self.sys.group();
        let (k, d) = self.base_shape();
        let n = group.order();
        let mut out = zeros(k * n, d * n);
        for (t, lt) in l.iter().enumerate() {
            if !is_zero(lt) {
                out += self.j(lt)? * regular_shift(group, d, t);
            }
        }
        Ok(out)
    }

    /// `(l·g)(s) = Σ_t l(t) α_t(g(t⁻¹ s))`.
    pub fn right_action(&self, l: &[ComplexMatrix], g: &[ComplexMatrix]) -> Result<Tuple> {
        let group = self.sys.group();
        let alpha = self.sys.induced();
        let (k, d) = self.base_shape();
        let mut out = vec![zeros(k, d); group.order()];
        for t in group.elements().filter(|&t| !is_zero(&l[t])) {
            for r in group.elements().filter(|&r| !is_zero(&g[r])) {
                out[group.mul(t, r)] += &l[t] * alpha.apply(t, &g[r])?;
            }
        }
        Ok(out)
    }

    /// `⟨l, m⟩(s) = Σ_t α_{t⁻¹}(⟨l(t), m(ts)⟩)`.
    pub fn inner(&self, l: &[ComplexMatrix], m: &[ComplexMatrix]) -> Result<Tuple> {
        let group = self.sys.group();
        let alpha = self.sys.induced();
        let d = self.base_shape().1;
        let mut out = vec![zeros(d, d); group.order()];
        for t in group.elements().filter(|&t| !is_zero(&l[t])) {
            let lt_star = l[t].adjoint();
            for r in group.elements().filter(|&r| !is_zero(&m[r])) {
                // r = ts
                let s = group.mul(group.inv(t), r);
                out[s] += alpha.apply(group.inv(t), &(&lt_star * &m[r]))?;
            }
        }
        Ok(out)
    }

    /// `δ_t ⊗ x_j` for basis index `t·dim E + j`.
    pub fn basis_tuple(&self, k: usize) -> Tuple {
        let e = self.sys.module();
        self.delta(k / e.dim(), &e.basis()[k % e.dim()])
    }

    /// `δ_t ⊗ x`.
    pub fn delta(&self, t: usize, x: &ComplexMatrix) -> Tuple {
        let (k, d) = self.base_shape();
        let mut l = vec![zeros(k, d); self.sys.group().order()];
        l[t] = x.clone();
        l
    }

    /// Coordinates of a tuple in the basis `δ_t ⊗ x_j`.
    pub fn coordinates(&self, l: &[ComplexMatrix]) -> Result<DVector<C64>> {
        let e = self.sys.module();
        let m = e.dim();
        let mut coords = DVector::zeros(l.len() * m);
        for (t, lt) in l.iter().enumerate() {
            if !is_zero(lt) {
                coords.rows_mut(t * m, m).copy_from(&e.coordinates(lt)?);
            }
        }
        Ok(coords)
    }

    /// The tuple represented by an element of the concrete module.
    pub fn tuple_of(&self, x: &ComplexMatrix) -> Result<Tuple> {
        let coords = self.concrete.coordinates(x)?;
        let e = self.sys.module();
        let m = e.dim();
        let (k, d) = self.base_shape();
        Ok(self
            .sys
            .group()
            .elements()
            .map(|t| (0..m).fold(zeros(k, d), |acc, j| acc + &e.basis()[j] * coords[t * m + j]))
            .collect())
    }

    /// `η_t ∘ m^l_t`, that is `s ↦ η_t(m(t⁻¹ s))`.
    pub fn eta_left(&self, t: usize, m: &[ComplexMatrix]) -> Result<Tuple> {
        let group = self.sys.group();
        group
            .elements()
            .map(|s| self.sys.apply(t, &m[group.mul(group.inv(t), s)]))
            .collect()
    }

    /// `m^r_t`, that is `s ↦ m(s t⁻¹)`.
    pub fn right_shift(&self, t: usize, m: &[ComplexMatrix]) -> Tuple {
        let group = self.sys.group();
        group.elements().map(|s| m[group.mul(s, group.inv(t))].clone()).collect()
    }
}

/// Builds the crossed algebra for the induced action together with the
/// crossed module, and checks the tuple formulas against the concrete model.
pub fn build_crossed_module(sys: &ModuleDynamicalSystem, tol: &Tolerance) -> Result<CrossedProductModule> {
    let algebra = Arc::new(build_crossed_algebra(sys.induced(), tol)?);
    build_crossed_module_over(sys, algebra, tol)
}

/// Same as [`build_crossed_module`] over an already built crossed algebra.
pub fn build_crossed_module_over(
    sys: &ModuleDynamicalSystem,
    algebra: Arc<CrossedProductAlgebra>,
    tol: &Tolerance,
) -> Result<CrossedProductModule> {
    let ctol = tol.construction();
    let e = sys.module();
    let n = sys.group().order();
    let mut shell = CrossedProductModule {
        sys: sys.clone(),
        algebra,
        concrete: ConcreteHilbertModule::zero(e.algebra().clone(), 0).into_arc(),
        report: Report::default(),
    };
    let tuples: Vec<_> = (0..n * e.dim()).map(|k| shell.basis_tuple(k)).collect();
    let ops = tuples.iter().map(|l| shell.l_op(l)).collect::<Result<Vec<_>>>()?;
    shell.concrete =
        ConcreteHilbertModule::validate(shell.algebra.concrete().clone(), e.rows() * n, ops.clone(), &ctol)?
            .into_arc();

    let cp = shell.algebra.clone();
    let mut report = Report::default();

    let mut inner = Check::new("L(l)*L(m) = rep(⟨l,m⟩)", ctol.abs_eps);
    for (i, l) in tuples.iter().enumerate() {
        for (j, m) in tuples.iter().enumerate() {
            let lhs = ops[i].adjoint() * &ops[j];
            let rhs = cp.rep(&shell.inner(l, m)?)?;
            inner.observe(relative_residual(&lhs, &rhs), || format!("basis ({i}, {j})"));
        }
    }
    report.push(inner);

    let mut action = Check::new("L(l)rep(g) = L(l·g)", ctol.abs_eps);
    for (i, l) in tuples.iter().enumerate() {
        for (k, g) in cp.concrete().basis().iter().enumerate() {
            let lhs = &ops[i] * g;
            let rhs = shell.l_op(&shell.right_action(l, &cp.basis_tuple(k))?)?;
            action.observe(relative_residual(&lhs, &rhs), || format!("module basis {i}, algebra basis {k}"));
        }
    }
    report.push(action);

    // a few fixed combinations that mix every basis tuple with distinct phases
    let mut positive = Check::new("rep(⟨l,l⟩) ⪰ 0", ctol.abs_eps);
    for probe in 0..4 {
        let coords = DVector::from_fn(tuples.len(), |k, _| {
            let phase = (probe as f64 + 1.0) * (k as f64 + 0.5);
            c(phase.cos(), phase.sin()) / (1.0 + (k % (probe + 2)) as f64)
        });
        let l = shell.tuple_of(&shell.concrete.combine(&coords))?;
        let report = psd_report(&cp.rep(&shell.inner(&l, &l)?)?, &ctol)?;
        positive.observe((-report.min_eigenvalue).max(0.0) / (1.0 + report.max_abs_eigenvalue), || {
            format!("probe {probe}")
        });
    }
    report.push(positive);

    let mut i_e = Check::new("⟨i_E(x), i_E(y)⟩ = i_A(⟨x,y⟩)", ctol.abs_eps);
    let embedded = e.basis().iter().map(|x| shell.j(x)).collect::<Result<Vec<_>>>()?;
    for (i, x) in e.basis().iter().enumerate() {
        for (j, y) in e.basis().iter().enumerate() {
            let lhs = embedded[i].adjoint() * &embedded[j];
            let rhs = cp.i_a(&e.inner(x, y))?;
            i_e.observe(relative_residual(&lhs, &rhs), || format!("pair ({i}, {j})"));
        }
    }
    report.push(i_e);

    report.require()?;
    shell.report = report;
    Ok(shell)
}
