use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{AlgebraViolation, Error, Result};
use crate::linalg::{
    combine_images, identity, matrix_unit, relative_residual, ComplexMatrix, SpanBasis, Tolerance, C64,
};

/// A unital *-subalgebra of `d × d` complex matrices, given by a basis.
#[derive(Debug, Clone)]
pub struct ConcreteCStarAlgebra {
    ambient_dim: usize,
    basis: Vec<ComplexMatrix>,
    span: SpanBasis,
    unit_coords: DVector<C64>,
}

impl ConcreteCStarAlgebra {
    /// Checks linear independence, *-closure, multiplicative closure and the
    /// presence of the identity; every failure is collected, not just the first.
    pub fn validate(ambient_dim: usize, basis: Vec<ComplexMatrix>, tol: &Tolerance) -> Result<Self> {
        for b in &basis {
            if b.shape() != (ambient_dim, ambient_dim) {
                return Err(Error::DimensionMismatch {
                    context: "algebra basis element",
                    expected: (ambient_dim, ambient_dim),
                    found: b.shape(),
                });
            }
        }
        let (span, rank) = SpanBasis::new(ambient_dim, ambient_dim, &basis, tol);
        let mut violations = Vec::new();
        if rank < basis.len() {
            violations.push(AlgebraViolation::LinearlyDependentBasis {
                len: basis.len(),
                rank,
            });
        }
        for (index, b) in basis.iter().enumerate() {
            let residual = span.membership_residual(&b.adjoint())?;
            if residual > tol.abs_eps {
                violations.push(AlgebraViolation::NotStarClosed { index, residual });
            }
        }
        for (left, x) in basis.iter().enumerate() {
            for (right, y) in basis.iter().enumerate() {
                let residual = span.membership_residual(&(x * y))?;
                if residual > tol.abs_eps {
                    violations.push(AlgebraViolation::NotMultiplicativelyClosed { left, right, residual });
                }
            }
        }
        let one = identity(ambient_dim);
        let (unit_coords, unit_residual) = span.coordinates(&one)?;
        let unit_residual = unit_residual / (1.0 + one.norm());
        if unit_residual > tol.abs_eps {
            violations.push(AlgebraViolation::NoUnit {
                residual: unit_residual,
            });
        }
        if !violations.is_empty() {
            return Err(Error::InvalidAlgebra(violations));
        }
        Ok(Self {
            ambient_dim,
            basis,
            span,
            unit_coords,
        })
    }

    /// The full matrix algebra `M_n` with its matrix-unit basis (row-major).
    pub fn full(n: usize) -> Self {
        let basis = (0..n * n).map(|k| matrix_unit(n, n, k / n, k % n)).collect();
        let unit_coords = DVector::from_fn(n * n, |k, _| {
            if k / n == k % n {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self {
            ambient_dim: n,
            basis,
            span: SpanBasis::matrix_units(n, n),
            unit_coords,
        }
    }

    /// Diagonal `n × n` matrices, `ℂ ⊕ … ⊕ ℂ`.
    pub fn diagonal(n: usize, tol: &Tolerance) -> Result<Self> {
        Self::validate(n, (0..n).map(|i| matrix_unit(n, n, i, i)).collect(), tol)
    }

    pub fn into_arc(self) -> Arc<Self> {
        Arc::new(self)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Dimension as a vector space.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    pub fn is_full(&self) -> bool {
        self.span.is_matrix_units()
    }

    pub fn unit(&self) -> ComplexMatrix {
        identity(self.ambient_dim)
    }

    pub fn unit_coordinates(&self) -> &DVector<C64> {
        &self.unit_coords
    }

    /// Least-squares coordinates in the basis (no membership check).
    pub fn coordinates(&self, a: &ComplexMatrix) -> Result<DVector<C64>> {
        self.span.project(a)
    }

    pub fn coordinates_in_span(&self, a: &ComplexMatrix, tol: &Tolerance) -> Result<DVector<C64>> {
        self.span.coordinates_in_span(a, tol)
    }

    /// Residual of `a` against the algebra, normalized by `1 + ‖a‖`.
    pub fn membership_residual(&self, a: &ComplexMatrix) -> Result<f64> {
        self.span.membership_residual(a)
    }

    pub fn contains(&self, a: &ComplexMatrix, tol: &Tolerance) -> bool {
        self.membership_residual(a).is_ok_and(|r| r <= tol.abs_eps)
    }

    pub fn combine(&self, coords: &DVector<C64>) -> ComplexMatrix {
        self.span.combine(coords)
    }

    /// Whether two algebras have the same ambient space and span.
    pub fn same_as(&self, other: &Self, tol: &Tolerance) -> bool {
        self.ambient_dim == other.ambient_dim
            && self.dim() == other.dim()
            && other.basis.iter().all(|b| self.contains(b, tol))
    }
}

/// A *-homomorphism between concrete algebras, given by images of the domain basis.
#[derive(Debug, Clone)]
pub struct StarHomomorphism {
    domain: Arc<ConcreteCStarAlgebra>,
    codomain: Arc<ConcreteCStarAlgebra>,
    images: Vec<ComplexMatrix>,
    unital: bool,
}

impl StarHomomorphism {
    pub fn new(
        domain: Arc<ConcreteCStarAlgebra>,
        codomain: Arc<ConcreteCStarAlgebra>,
        images: Vec<ComplexMatrix>,
        tol: &Tolerance,
    ) -> Result<Self> {
        if images.len() != domain.dim() {
            return Err(Error::DimensionMismatch {
                context: "homomorphism images",
                expected: (domain.dim(), 1),
                found: (images.len(), 1),
            });
        }
        for (k, img) in images.iter().enumerate() {
            let residual = codomain.membership_residual(img)?;
            if residual > tol.abs_eps {
                return Err(Error::Invalid {
                    what: "homomorphism image",
                    property: "codomain element",
                    residual,
                    witness: Some(format!("basis[{k}]")),
                });
            }
        }
        let hom = Self {
            domain,
            codomain,
            images,
            unital: false,
        };
        let d = hom.codomain.ambient_dim();
        for (i, x) in hom.domain.basis().iter().enumerate() {
            let residual = relative_residual(&hom.apply(&x.adjoint())?, &hom.images[i].adjoint());
            if residual > tol.abs_eps {
                return Err(Error::Invalid {
                    what: "map",
                    property: "*-preserving map",
                    residual,
                    witness: Some(format!("basis[{i}]")),
                });
            }
            for (j, y) in hom.domain.basis().iter().enumerate() {
                let lhs = hom.apply(&(x * y))?;
                let rhs = &hom.images[i] * &hom.images[j];
                let residual = relative_residual(&lhs, &rhs);
                if residual > tol.abs_eps {
                    return Err(Error::Invalid {
                        what: "map",
                        property: "multiplicative map",
                        residual,
                        witness: Some(format!("basis pair ({i}, {j})")),
                    });
                }
            }
        }
        let unit_image = combine_images(&hom.images, hom.domain.unit_coordinates(), d, d);
        let unital = tol.close(&unit_image, &identity(d));
        Ok(Self { unital, ..hom })
    }

    /// The identity automorphism.
    pub fn identity(algebra: Arc<ConcreteCStarAlgebra>) -> Self {
        Self {
            images: algebra.basis().to_vec(),
            domain: algebra.clone(),
            codomain: algebra,
            unital: true,
        }
    }

    pub fn domain(&self) -> &Arc<ConcreteCStarAlgebra> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<ConcreteCStarAlgebra> {
        &self.codomain
    }

    pub fn images(&self) -> &[ComplexMatrix] {
        &self.images
    }

    pub fn is_unital(&self) -> bool {
        self.unital
    }

    pub fn apply(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        let coords = self.domain.coordinates(a)?;
        let d = self.codomain.ambient_dim();
        Ok(combine_images(&self.images, &coords, d, d))
    }
}
