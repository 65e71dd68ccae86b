use std::sync::Arc;

use nalgebra::DVector;

use crate::algebra::ConcreteCStarAlgebra;
use crate::error::{Error, Result};
use crate::linalg::{combine_images, psd_report, zeros, ComplexMatrix, Tolerance, C64};

/// A linear map between concrete algebras given by the images of the
/// domain basis. Complete positivity is checked at construction unless
/// built with [`CPMap::linear`].
#[derive(Debug, Clone)]
pub struct CPMap {
    domain: Arc<ConcreteCStarAlgebra>,
    codomain: Arc<ConcreteCStarAlgebra>,
    images: Vec<ComplexMatrix>,
    cp_checked: bool,
}

impl CPMap {
    /// A linear map landing in `codomain`; complete positivity is not checked.
    pub fn linear(
        domain: Arc<ConcreteCStarAlgebra>,
        codomain: Arc<ConcreteCStarAlgebra>,
        images: Vec<ComplexMatrix>,
        tol: &Tolerance,
    ) -> Result<Self> {
        if images.len() != domain.dim() {
            return Err(Error::DimensionMismatch {
                context: "linear map images",
                expected: (domain.dim(), 1),
                found: (images.len(), 1),
            });
        }
        for (k, img) in images.iter().enumerate() {
            let residual = codomain.membership_residual(img)?;
            if residual > tol.abs_eps {
                return Err(Error::Invalid {
                    what: "map image",
                    property: "codomain element",
                    residual,
                    witness: Some(format!("basis[{k}]")),
                });
            }
        }
        Ok(Self {
            domain,
            codomain,
            images,
            cp_checked: false,
        })
    }

    pub fn new(
        domain: Arc<ConcreteCStarAlgebra>,
        codomain: Arc<ConcreteCStarAlgebra>,
        images: Vec<ComplexMatrix>,
        tol: &Tolerance,
    ) -> Result<Self> {
        Self::linear(domain, codomain, images, tol)?.checked(tol)
    }

    /// Runs [`verify_cp`] and marks the map as checked, or fails with `NotCp`.
    pub fn checked(mut self, tol: &Tolerance) -> Result<Self> {
        let report = verify_cp(&self, tol)?;
        if !report.is_cp {
            return Err(Error::NotCp {
                min_eigenvalue: report.min_eigenvalue,
            });
        }
        self.cp_checked = true;
        Ok(self)
    }

    pub fn from_fn(
        domain: Arc<ConcreteCStarAlgebra>,
        codomain: Arc<ConcreteCStarAlgebra>,
        f: impl Fn(&ComplexMatrix) -> ComplexMatrix,
        tol: &Tolerance,
    ) -> Result<Self> {
        let images = domain.basis().iter().map(f).collect();
        Self::new(domain, codomain, images, tol)
    }

    /// `a ↦ Σ_i K_i* a K_i` with each `K_i` of shape `d_A × d_B`.
    pub fn from_kraus(
        domain: Arc<ConcreteCStarAlgebra>,
        codomain: Arc<ConcreteCStarAlgebra>,
        kraus: &[ComplexMatrix],
        tol: &Tolerance,
    ) -> Result<Self> {
        let shape = (domain.ambient_dim(), codomain.ambient_dim());
        if let Some(k) = kraus.iter().find(|k| k.shape() != shape) {
            return Err(Error::DimensionMismatch {
                context: "Kraus operator",
                expected: shape,
                found: k.shape(),
            });
        }
        let b = codomain.ambient_dim();
        Self::from_fn(
            domain,
            codomain,
            |a| kraus.iter().fold(zeros(b, b), |acc, k| acc + k.adjoint() * a * k),
            tol,
        )
    }

    pub fn identity(algebra: Arc<ConcreteCStarAlgebra>) -> Self {
        Self {
            images: algebra.basis().to_vec(),
            domain: algebra.clone(),
            codomain: algebra,
            cp_checked: true,
        }
    }

    pub fn zero(domain: Arc<ConcreteCStarAlgebra>, codomain: Arc<ConcreteCStarAlgebra>) -> Self {
        let b = codomain.ambient_dim();
        Self {
            images: vec![zeros(b, b); domain.dim()],
            domain,
            codomain,
            cp_checked: true,
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

    pub fn is_cp_checked(&self) -> bool {
        self.cp_checked
    }

    pub fn apply(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        let coords = self.domain.coordinates(a)?;
        Ok(self.apply_coords(&coords))
    }

    pub fn apply_coords(&self, coords: &DVector<C64>) -> ComplexMatrix {
        let b = self.codomain.ambient_dim();
        combine_images(&self.images, coords, b, b)
    }
}

/// Outcome of [`verify_cp`].
#[derive(Debug, Clone)]
pub struct CpReport {
    pub is_cp: bool,
    pub min_eigenvalue: f64,
    pub max_abs_eigenvalue: f64,
    pub hermitian_defect: f64,
    /// Eigenvector of the most negative eigenvalue of the block matrix
    /// `[τ(f_μ* f_ν)]`, when the map is not CP.
    pub witness: Option<DVector<C64>>,
}

/// Complete positivity via positivity of the block matrix `[τ(f_μ* f_ν)]_{μν}`
/// over the domain basis.
pub fn verify_cp(tau: &CPMap, tol: &Tolerance) -> Result<CpReport> {
    let basis = tau.domain.basis();
    let m = basis.len();
    let b = tau.codomain.ambient_dim();
    let mut block = zeros(m * b, m * b);
    for (mu, f) in basis.iter().enumerate() {
        let f_star = f.adjoint();
        for (nu, g) in basis.iter().enumerate() {
            let img = tau.apply(&(&f_star * g))?;
            block.view_mut((mu * b, nu * b), (b, b)).copy_from(&img);
        }
    }
    let hermitian_defect = (&block - block.adjoint()).norm();
    if hermitian_defect > tol.abs_eps * (1.0 + block.norm()) {
        return Ok(CpReport {
            is_cp: false,
            min_eigenvalue: f64::NAN,
            max_abs_eigenvalue: f64::NAN,
            hermitian_defect,
            witness: None,
        });
    }
    let report = psd_report(&block, tol)?;
    Ok(CpReport {
        is_cp: report.is_psd,
        min_eigenvalue: report.min_eigenvalue,
        max_abs_eigenvalue: report.max_abs_eigenvalue,
        hermitian_defect,
        witness: (!report.is_psd).then_some(report.witness),
    })
}
