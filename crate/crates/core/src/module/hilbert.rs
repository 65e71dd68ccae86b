use std::sync::Arc;

use nalgebra::DVector;

use crate::algebra::ConcreteCStarAlgebra;
use crate::error::{Error, Result};
use crate::linalg::{column_space, hstack, rank, zeros, ComplexMatrix, SpanBasis, Tolerance, C64};

/// A Hilbert module `E` realized as a subspace of `k × d` matrices over an
/// algebra `A ⊆ M_d`, with `⟨x, y⟩ = x* y` and right action by multiplication.
///
/// Each element `x` is its own operator `L_x: ℂ^d → E⊙ℂ^d ⊆ ℂ^k`, so
/// `L_x* L_y = ⟨x, y⟩` holds with no change of representation.
#[derive(Debug, Clone)]
pub struct ConcreteHilbertModule {
    algebra: Arc<ConcreteCStarAlgebra>,
    rows: usize,
    basis: Vec<ComplexMatrix>,
    span: SpanBasis,
}

impl ConcreteHilbertModule {
    pub fn validate(
        algebra: Arc<ConcreteCStarAlgebra>,
        rows: usize,
        basis: Vec<ComplexMatrix>,
        tol: &Tolerance,
    ) -> Result<Self> {
        let d = algebra.ambient_dim();
        if let Some(b) = basis.iter().find(|b| b.shape() != (rows, d)) {
            return Err(Error::DimensionMismatch {
                context: "module basis element",
                expected: (rows, d),
                found: b.shape(),
            });
        }
        let (span, r) = SpanBasis::new(rows, d, &basis, tol);
        if r < basis.len() {
            return Err(Error::Invalid {
                what: "module basis",
                property: "linearly independent family",
                residual: (basis.len() - r) as f64,
                witness: None,
            });
        }
        for (i, x) in basis.iter().enumerate() {
            let x_star = x.adjoint();
            for (j, y) in basis.iter().enumerate() {
                let residual = algebra.membership_residual(&(&x_star * y))?;
                if residual > tol.abs_eps {
                    return Err(Error::Invalid {
                        what: "inner product",
                        property: "algebra element",
                        residual,
                        witness: Some(format!("⟨basis[{i}], basis[{j}]⟩")),
                    });
                }
            }
            for (mu, a) in algebra.basis().iter().enumerate() {
                let residual = span.membership_residual(&(x * a))?;
                if residual > tol.abs_eps {
                    return Err(Error::Invalid {
                        what: "right action",
                        property: "module element",
                        residual,
                        witness: Some(format!("basis[{i}]·algebra[{mu}]")),
                    });
                }
            }
        }
        Ok(Self {
            algebra,
            rows,
            basis,
            span,
        })
    }

    /// All `rows × d` matrices as a module over the full algebra `M_d`.
    pub fn full(algebra: Arc<ConcreteCStarAlgebra>, rows: usize) -> Result<Self> {
        if !algebra.is_full() {
            return Err(Error::DomainMismatch(
                "the module of all k×d matrices needs the full matrix algebra".into(),
            ));
        }
        let d = algebra.ambient_dim();
        let span = SpanBasis::matrix_units(rows, d);
        let basis = (0..rows * d).map(|k| span.element(k)).collect();
        Ok(Self {
            algebra,
            rows,
            basis,
            span,
        })
    }

    /// The standard module `A^n`, realized as `n` vertically stacked `d × d` blocks.
    pub fn free(algebra: Arc<ConcreteCStarAlgebra>, n: usize, tol: &Tolerance) -> Result<Self> {
        let d = algebra.ambient_dim();
        if algebra.is_full() {
            return Self::full(algebra, n * d);
        }
        let mut basis = Vec::with_capacity(n * algebra.dim());
        for block in 0..n {
            for f in algebra.basis() {
                let mut x = zeros(n * d, d);
                x.view_mut((block * d, 0), (d, d)).copy_from(f);
                basis.push(x);
            }
        }
        Self::validate(algebra, n * d, basis, tol)
    }

    /// The zero module `{0}` inside `k × d` matrices.
    pub fn zero(algebra: Arc<ConcreteCStarAlgebra>, rows: usize) -> Self {
        let d = algebra.ambient_dim();
        let (span, _) = SpanBasis::new(rows, d, &[], &Tolerance::default());
        Self {
            algebra,
            rows,
            basis: Vec::new(),
            span,
        }
    }

    pub fn into_arc(self) -> Arc<Self> {
        Arc::new(self)
    }

    pub fn algebra(&self) -> &Arc<ConcreteCStarAlgebra> {
        &self.algebra
    }

    /// `k`, the number of rows of every element.
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.algebra.ambient_dim()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    pub fn inner(&self, x: &ComplexMatrix, y: &ComplexMatrix) -> ComplexMatrix {
        x.adjoint() * y
    }

    pub fn coordinates(&self, x: &ComplexMatrix) -> Result<DVector<C64>> {
        self.span.project(x)
    }

    pub fn coordinates_in_span(&self, x: &ComplexMatrix, tol: &Tolerance) -> Result<DVector<C64>> {
        self.span.coordinates_in_span(x, tol)
    }

    pub fn membership_residual(&self, x: &ComplexMatrix) -> Result<f64> {
        self.span.membership_residual(x)
    }

    pub fn contains(&self, x: &ComplexMatrix, tol: &Tolerance) -> bool {
        self.membership_residual(x).is_ok_and(|r| r <= tol.abs_eps)
    }

    pub fn combine(&self, coords: &DVector<C64>) -> ComplexMatrix {
        self.span.combine(coords)
    }
}

/// True iff the inner products `x* y` of basis elements span the whole algebra.
pub fn fullness_check(e: &ConcreteHilbertModule, tol: &Tolerance) -> Result<bool> {
    Ok(inner_product_span_dim(e, tol)? == e.algebra().dim())
}

pub(crate) fn inner_product_span_dim(e: &ConcreteHilbertModule, tol: &Tolerance) -> Result<usize> {
    let m = e.algebra().dim();
    if e.dim() == 0 {
        return Ok(0);
    }
    let mut coeffs = zeros(m, e.dim() * e.dim());
    for (i, x) in e.basis().iter().enumerate() {
        for (j, y) in e.basis().iter().enumerate() {
            let c = e.algebra().coordinates(&e.inner(x, y))?;
            coeffs.set_column(i * e.dim() + j, &c);
        }
    }
    Ok(rank(&coeffs, tol))
}

/// Coordinates for `E⊙ℂ^d = span{x h} ⊆ ℂ^k`.
#[derive(Debug, Clone)]
pub struct InteriorTensor {
    /// `k × dim` with orthonormal columns spanning `E⊙ℂ^d`.
    pub onb: ComplexMatrix,
}

impl InteriorTensor {
    pub fn dim(&self) -> usize {
        self.onb.ncols()
    }

    /// The operator `L_x: ℂ^d → ℂ^k`, which is `x` itself.
    pub fn l(&self, x: &ComplexMatrix) -> ComplexMatrix {
        x.clone()
    }

    /// `L_x` with its range expressed in the orthonormal coordinates.
    pub fn l_coords(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.onb.adjoint() * x
    }
}

pub fn interior_tensor_space(e: &ConcreteHilbertModule, tol: &Tolerance) -> Result<InteriorTensor> {
    if e.dim() == 0 {
        return Ok(InteriorTensor {
            onb: zeros(e.rows(), 0),
        });
    }
    let columns = hstack(e.basis(), e.rows());
    Ok(InteriorTensor {
        onb: column_space(&columns, tol)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, identity, matrix_unit};
    use proptest::prelude::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn m2() -> Arc<ConcreteCStarAlgebra> {
        ConcreteCStarAlgebra::full(2).into_arc()
    }

    #[test]
    fn algebra_over_itself_is_full() {
        let e = ConcreteHilbertModule::free(m2(), 1, &tol()).unwrap();
        assert!(fullness_check(&e, &tol()).unwrap());
        let h = interior_tensor_space(&e, &tol()).unwrap();
        assert_eq!(h.dim(), 2);
    }

    #[test]
    fn row_vectors_over_m2_are_full() {
        // x*y for rows x, y are the rank-one matrices, which span M2
        let basis = vec![matrix_unit(1, 2, 0, 0), matrix_unit(1, 2, 0, 1)];
        let e = ConcreteHilbertModule::validate(m2(), 1, basis, &tol()).unwrap();
        assert!(fullness_check(&e, &tol()).unwrap());
        // the top-row 2×2 matrices span{e11, e12} are the same module
        let top = vec![matrix_unit(2, 2, 0, 0), matrix_unit(2, 2, 0, 1)];
        let e = ConcreteHilbertModule::validate(m2(), 2, top, &tol()).unwrap();
        assert!(fullness_check(&e, &tol()).unwrap());
    }

    #[test]
    fn row_vectors_over_diagonal_are_rejected() {
        // ⟨(1,0), (0,1)⟩ = e12 is not diagonal
        let diag = ConcreteCStarAlgebra::diagonal(2, &tol()).unwrap().into_arc();
        let basis = vec![matrix_unit(1, 2, 0, 0), matrix_unit(1, 2, 0, 1)];
        let err = ConcreteHilbertModule::validate(diag, 1, basis, &tol()).unwrap_err();
        assert!(matches!(err, Error::Invalid { what: "inner product", .. }));
    }

    #[test]
    fn single_row_vector_is_not_a_module_over_m2() {
        // (1,0)·e12 = (0,1) leaves span{(1,0)}
        let basis = vec![matrix_unit(1, 2, 0, 0)];
        let err = ConcreteHilbertModule::validate(m2(), 1, basis, &tol()).unwrap_err();
        assert!(matches!(err, Error::Invalid { what: "right action", .. }));
    }

    #[test]
    fn zero_module_is_not_full() {
        let e = ConcreteHilbertModule::zero(m2(), 2);
        assert!(!fullness_check(&e, &tol()).unwrap());
        assert_eq!(interior_tensor_space(&e, &tol()).unwrap().dim(), 0);
    }

    #[test]
    fn stacked_module_tensor_dimension_scales() {
        let diag = ConcreteCStarAlgebra::diagonal(2, &tol()).unwrap().into_arc();
        for n in 1..=3 {
            let e = ConcreteHilbertModule::free(diag.clone(), n, &tol()).unwrap();
            let h = interior_tensor_space(&e, &tol()).unwrap();
            // block-diagonal oracle: each block contributes span{f_μ h} = ℂ^2
            assert_eq!(h.dim(), n * 2);
            assert!(h.dim() <= e.rows().min(e.dim() * 2));
        }
    }

    #[test]
    fn l_operators_reproduce_inner_products() {
        let e = ConcreteHilbertModule::free(m2(), 2, &tol()).unwrap();
        let h = interior_tensor_space(&e, &tol()).unwrap();
        for x in e.basis() {
            for y in e.basis() {
                assert_eq!(h.l(x).adjoint() * h.l(y), e.inner(x, y));
                let coordinatized = h.l_coords(x).adjoint() * h.l_coords(y);
                assert!(tol().close(&coordinatized, &e.inner(x, y)));
            }
        }
    }

    #[test]
    fn corner_module_over_diagonal_is_not_full() {
        // ⟨x, y⟩ for x, y ∈ span{e11} only reaches e11
        let diag = ConcreteCStarAlgebra::diagonal(2, &tol()).unwrap().into_arc();
        let e = ConcreteHilbertModule::validate(diag, 2, vec![matrix_unit(2, 2, 0, 0)], &tol()).unwrap();
        assert!(!fullness_check(&e, &tol()).unwrap());
    }

    fn element(e: &ConcreteHilbertModule, seed: &[(f64, f64)]) -> ComplexMatrix {
        let coords = DVector::from_fn(e.dim(), |k, _| {
            let (re, im) = seed[k % seed.len()];
            c(re, im)
        });
        e.combine(&coords)
    }

    proptest! {
        #[test]
        fn cauchy_schwarz(xs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8),
                          ys in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8)) {
            let e = ConcreteHilbertModule::free(m2(), 2, &tol()).unwrap();
            let (x, y) = (element(&e, &xs), element(&e, &ys));
            let op_norm = |m: &ComplexMatrix| crate::linalg::singular_values(m)[0];
            let lhs = op_norm(&e.inner(&x, &y)).powi(2);
            let rhs = op_norm(&e.inner(&x, &x)) * op_norm(&e.inner(&y, &y));
            prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
        }
    }

    #[test]
    fn identity_is_in_free_module_of_rank_one() {
        let e = ConcreteHilbertModule::free(m2(), 1, &tol()).unwrap();
        assert!(e.contains(&identity(2), &tol()));
    }
}
