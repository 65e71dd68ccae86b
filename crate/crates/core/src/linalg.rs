//! Dense complex linear-algebra kernels shared by every construction.
//!
//! Everything here works on [`ComplexMatrix`] (a dynamically sized
//! `nalgebra` matrix of `Complex<f64>`). Equality checks throughout the
//! crate use one norm (Frobenius) and one rule: two matrices agree when
//! `‖X − Y‖ ≤ abs_eps · (1 + max(‖X‖, ‖Y‖))`.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Double-precision complex scalar.
pub type C64 = Complex<f64>;

/// Dense complex matrix, the universal carrier for algebra elements,
/// module elements and operators.
pub type ComplexMatrix = DMatrix<C64>;

/// Numerical tolerances used by validations and constructions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Absolute part of every equality check.
    pub abs_eps: f64,
    /// Gram eigenvalues below `gram_cutoff_rel · λ_max` are treated as null.
    pub gram_cutoff_rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs_eps: 1e-9,
            gram_cutoff_rel: 1e-10,
        }
    }
}

impl Tolerance {
    pub fn new(abs_eps: f64, gram_cutoff_rel: f64) -> Result<Self> {
        if !(abs_eps > 0.0 && abs_eps.is_finite()) || !(gram_cutoff_rel > 0.0 && gram_cutoff_rel.is_finite()) {
            return Err(Error::InvalidTolerance {
                abs_eps,
                gram_cutoff_rel,
            });
        }
        Ok(Self {
            abs_eps,
            gram_cutoff_rel,
        })
    }

    /// The same tolerance with `abs_eps` scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            abs_eps: self.abs_eps * factor,
            gram_cutoff_rel: self.gram_cutoff_rel,
        }
    }

    /// Tolerance used by constructions to check their own outputs.
    pub fn construction(&self) -> Self {
        self.scaled(10.0)
    }

    pub fn close(&self, x: &ComplexMatrix, y: &ComplexMatrix) -> bool {
        relative_residual(x, y) <= self.abs_eps
    }
}

/// `‖X − Y‖ / (1 + max(‖X‖, ‖Y‖))`; infinite on shape mismatch.
pub fn relative_residual(x: &ComplexMatrix, y: &ComplexMatrix) -> f64 {
    if x.shape() != y.shape() {
        return f64::INFINITY;
    }
    let scale = 1.0 + x.norm().max(y.norm());
    (x - y).norm() / scale
}

/// Plain Frobenius distance; infinite on shape mismatch.
pub fn distance(x: &ComplexMatrix, y: &ComplexMatrix) -> f64 {
    if x.shape() != y.shape() {
        return f64::INFINITY;
    }
    (x - y).norm()
}

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(rows, cols)
}

/// The matrix unit `e_{ij}` of the given shape.
pub fn matrix_unit(rows: usize, cols: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = zeros(rows, cols);
    m[(i, j)] = c(1.0, 0.0);
    m
}

/// Builds a matrix from real row-major entries.
pub fn real_matrix(rows: usize, cols: usize, entries: &[f64]) -> ComplexMatrix {
    assert_eq!(entries.len(), rows * cols, "entry count must equal rows × cols");
    ComplexMatrix::from_fn(rows, cols, |i, j| c(entries[i * cols + j], 0.0))
}

/// Row-major flattening, the vectorization used for span computations.
pub fn vectorize(m: &ComplexMatrix) -> DVector<C64> {
    let (rows, cols) = m.shape();
    DVector::from_fn(rows * cols, |k, _| m[(k / cols, k % cols)])
}

pub fn unvectorize(v: &DVector<C64>, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |i, j| v[i * cols + j])
}

/// Block-diagonal direct sum.
pub fn direct_sum(blocks: &[&ComplexMatrix]) -> ComplexMatrix {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let (mut r, mut k) = (0, 0);
    for b in blocks {
        out.view_mut((r, k), b.shape()).copy_from(*b);
        r += b.nrows();
        k += b.ncols();
    }
    out
}

/// Vertical concatenation of equally wide matrices.
pub fn vstack(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        out.view_mut((r, 0), b.shape()).copy_from(b);
        r += b.nrows();
    }
    out
}

/// Horizontal concatenation of equally tall matrices.
pub fn hstack(blocks: &[ComplexMatrix], rows: usize) -> ComplexMatrix {
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let mut k = 0;
    for b in blocks {
        out.view_mut((0, k), b.shape()).copy_from(b);
        k += b.ncols();
    }
    out
}

/// Kronecker product `x ⊗ y`.
pub fn kron(x: &ComplexMatrix, y: &ComplexMatrix) -> ComplexMatrix {
    x.kronecker(y)
}

fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

fn check_hermitian(m: &ComplexMatrix, tol: &Tolerance) -> Result<()> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let defect = (m - m.adjoint()).norm();
    if defect > tol.abs_eps * (1.0 + m.norm()) {
        return Err(Error::NotHermitian { defect });
    }
    Ok(())
}

/// Ascending eigenvalues and matching eigenvectors of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Outcome of a positivity test, with the most negative direction.
#[derive(Debug, Clone)]
pub struct PsdReport {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
    pub max_abs_eigenvalue: f64,
    /// Eigenvector of the minimal eigenvalue.
    pub witness: DVector<C64>,
}

pub fn psd_report(m: &ComplexMatrix, tol: &Tolerance) -> Result<PsdReport> {
    check_hermitian(m, tol)?;
    let (values, vectors) = hermitian_eigen(m);
    let Some(&min) = values.first() else {
        return Ok(PsdReport {
            is_psd: true,
            min_eigenvalue: 0.0,
            max_abs_eigenvalue: 0.0,
            witness: DVector::zeros(0),
        });
    };
    let max_abs = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    Ok(PsdReport {
        is_psd: min >= -tol.abs_eps * (1.0 + max_abs),
        min_eigenvalue: min,
        max_abs_eigenvalue: max_abs,
        witness: vectors.column(0).into_owned(),
    })
}

pub fn is_positive_semidefinite(m: &ComplexMatrix, tol: &Tolerance) -> Result<bool> {
    Ok(psd_report(m, tol)?.is_psd)
}

/// Orthonormalization of a spanning family given only through its Gram matrix.
#[derive(Debug, Clone)]
pub struct GramBasis {
    pub rank: usize,
    /// `n × rank`; column `k` holds the coefficients of the `k`-th orthonormal vector.
    pub coeffs: ComplexMatrix,
    pub lambda_max: f64,
    pub cutoff: f64,
    pub smallest_kept: Option<f64>,
    pub largest_dropped: Option<f64>,
}

impl GramBasis {
    /// True when a kept or dropped eigenvalue sits within a factor 10 of the cutoff.
    pub fn near_cutoff(&self) -> bool {
        let kept = self.smallest_kept.is_some_and(|v| v < 10.0 * self.cutoff);
        let dropped = self.largest_dropped.is_some_and(|v| v > self.cutoff / 10.0);
        kept || dropped
    }
}

/// Quotients a spanning family by its null space: returns coefficients `C`
/// with `C* G C = I_rank`.
pub fn onb_from_gram(gram: &ComplexMatrix, tol: &Tolerance) -> Result<GramBasis> {
    let report = psd_report(gram, tol)?;
    if !report.is_psd {
        return Err(Error::NotPsd {
            min_eigenvalue: report.min_eigenvalue,
        });
    }
    let n = gram.nrows();
    let (values, vectors) = hermitian_eigen(gram);
    let lambda_max = values.last().copied().unwrap_or(0.0).max(0.0);
    let cutoff = tol.gram_cutoff_rel * lambda_max;
    let kept: Vec<usize> = (0..n)
        .rev()
        .filter(|&k| lambda_max > 0.0 && values[k] > cutoff)
        .collect();
    let mut coeffs = zeros(n, kept.len());
    for (col, &k) in kept.iter().enumerate() {
        let scale = 1.0 / values[k].sqrt();
        for i in 0..n {
            coeffs[(i, col)] = vectors[(i, k)] * scale;
        }
    }
    let smallest_kept = kept.last().map(|&k| values[k]);
    let largest_dropped = (0..n)
        .rev()
        .find(|k| !kept.contains(k))
        .map(|k| values[k].max(0.0));
    Ok(GramBasis {
        rank: kept.len(),
        coeffs,
        lambda_max,
        cutoff,
        smallest_kept,
        largest_dropped,
    })
}

/// Orthonormal basis (as columns) of the span of the columns of `m`:
/// eigenvectors of `m m*` whose eigenvalue clears the Gram cutoff.
pub fn column_space(m: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    if m.is_empty() {
        return Ok(zeros(m.nrows(), 0));
    }
    let (values, vectors) = hermitian_eigen(&(m * m.adjoint()));
    let keep = kept_gram_values(&values, tol);
    let mut q = zeros(m.nrows(), keep.len());
    for (col, &k) in keep.iter().rev().enumerate() {
        q.set_column(col, &vectors.column(k));
    }
    Ok(q)
}

fn kept_gram_values(values: &[f64], tol: &Tolerance) -> Vec<usize> {
    let lmax = values.iter().fold(0.0_f64, |a, &s| a.max(s));
    if lmax == 0.0 {
        return Vec::new();
    }
    let cutoff = tol.gram_cutoff_rel * lmax;
    (0..values.len()).filter(|&k| values[k] > cutoff).collect()
}

/// Singular values of `m` in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    // Each singular value appears twice in the real form.
    let sigma = real_form(m).singular_values();
    let mut sorted: Vec<f64> = sigma.iter().copied().collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted.into_iter().step_by(2).collect()
}

/// Numerical rank of `m`, with the same cutoff as [`column_space`].
pub fn rank(m: &ComplexMatrix, tol: &Tolerance) -> usize {
    if m.is_empty() {
        return 0;
    }
    let gram = if m.nrows() <= m.ncols() { m * m.adjoint() } else { m.adjoint() * m };
    kept_gram_values(&hermitian_eigen(&gram).0, tol).len()
}

/// `[[Re m, −Im m], [Im m, Re m]]`, the realification of `m`. It is a
/// *-homomorphism, so pseudo-inverses and SVDs can be taken there.
fn real_form(m: &ComplexMatrix) -> DMatrix<f64> {
    let (r, c) = m.shape();
    DMatrix::from_fn(2 * r, 2 * c, |i, j| {
        let z = m[(i % r, j % c)];
        match (i / r, j / c) {
            (0, 0) | (1, 1) => z.re,
            (1, 0) => z.im,
            _ => -z.im,
        }
    })
}

/// Orthogonal projection of `ℂ^ambient_dim` onto the span of `vectors`.
pub fn projection_onto_span(
    vectors: &[DVector<C64>],
    ambient_dim: usize,
    tol: &Tolerance,
) -> Result<ComplexMatrix> {
    if let Some(bad) = vectors.iter().find(|v| v.len() != ambient_dim) {
        return Err(Error::DimensionMismatch {
            context: "projection_onto_span",
            expected: (ambient_dim, 1),
            found: (bad.len(), 1),
        });
    }
    let mut m = zeros(ambient_dim, vectors.len());
    for (k, v) in vectors.iter().enumerate() {
        m.set_column(k, v);
    }
    let q = column_space(&m, tol)?;
    Ok(&q * q.adjoint())
}

/// Moore–Penrose pseudo-inverse with singular values below
/// `√gram_cutoff_rel · σ_max` discarded.
///
/// Built from the eigendecomposition of the smaller Gram matrix: nalgebra's
/// SVD loses accuracy on heavily clustered spectra.
pub fn pseudo_inverse(m: &ComplexMatrix, tol: &Tolerance) -> ComplexMatrix {
    if m.is_empty() {
        return zeros(m.ncols(), m.nrows());
    }
    let wide = m.nrows() <= m.ncols();
    let gram = if wide { m * m.adjoint() } else { m.adjoint() * m };
    let (values, vectors) = hermitian_eigen(&gram);
    let n = values.len();
    let mut inv = zeros(n, n);
    for k in kept_gram_values(&values, tol) {
        let v = vectors.column(k);
        inv += v * v.adjoint() * c(1.0 / values[k], 0.0);
    }
    if wide {
        m.adjoint() * inv
    } else {
        inv * m.adjoint()
    }
}

/// A linearly independent family of equally shaped matrices with fast
/// coordinate extraction.
#[derive(Debug, Clone)]
pub struct SpanBasis {
    rows: usize,
    cols: usize,
    kind: SpanKind,
}

#[derive(Debug, Clone)]
enum SpanKind {
    /// Row-major matrix units: coordinates are the entries themselves.
    MatrixUnits,
    General {
        /// Vectorized basis, one column per element.
        stacked: ComplexMatrix,
        /// Left inverse of `stacked` (coordinates of a vector in the span).
        solver: ComplexMatrix,
    },
}

impl SpanBasis {
    /// All `rows × cols` matrices, with the matrix-unit basis.
    pub fn matrix_units(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            kind: SpanKind::MatrixUnits,
        }
    }

    /// Returns the span together with its numerical rank; callers decide
    /// whether a rank deficit is fatal.
    pub fn new(rows: usize, cols: usize, basis: &[ComplexMatrix], tol: &Tolerance) -> (Self, usize) {
        let mut stacked = zeros(rows * cols, basis.len());
        for (k, b) in basis.iter().enumerate() {
            stacked.set_column(k, &vectorize(b));
        }
        let r = rank(&stacked, tol);
        let solver = pseudo_inverse(&stacked, tol);
        (
            Self {
                rows,
                cols,
                kind: SpanKind::General { stacked, solver },
            },
            r,
        )
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        match &self.kind {
            SpanKind::MatrixUnits => self.rows * self.cols,
            SpanKind::General { stacked, .. } => stacked.ncols(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_matrix_units(&self) -> bool {
        matches!(self.kind, SpanKind::MatrixUnits)
    }

    pub fn element(&self, k: usize) -> ComplexMatrix {
        match &self.kind {
            SpanKind::MatrixUnits => matrix_unit(self.rows, self.cols, k / self.cols, k % self.cols),
            SpanKind::General { stacked, .. } => {
                unvectorize(&stacked.column(k).into_owned(), self.rows, self.cols)
            }
        }
    }

    /// Least-squares coordinates of `x`, without the residual.
    pub fn project(&self, x: &ComplexMatrix) -> Result<DVector<C64>> {
        if x.shape() != (self.rows, self.cols) {
            return Err(Error::DimensionMismatch {
                context: "span coordinates",
                expected: (self.rows, self.cols),
                found: x.shape(),
            });
        }
        let v = vectorize(x);
        Ok(match &self.kind {
            SpanKind::MatrixUnits => v,
            SpanKind::General { solver, .. } => solver * v,
        })
    }

    /// Least-squares coordinates of `x` and the residual `‖x − Σ c_k b_k‖`.
    pub fn coordinates(&self, x: &ComplexMatrix) -> Result<(DVector<C64>, f64)> {
        if x.shape() != (self.rows, self.cols) {
            return Err(Error::DimensionMismatch {
                context: "span coordinates",
                expected: (self.rows, self.cols),
                found: x.shape(),
            });
        }
        let v = vectorize(x);
        match &self.kind {
            SpanKind::MatrixUnits => Ok((v, 0.0)),
            SpanKind::General { stacked, solver } => {
                let coords = solver * &v;
                let residual = (stacked * &coords - v).norm();
                Ok((coords, residual))
            }
        }
    }

    /// Coordinates, failing when the residual exceeds `abs_eps · (1 + ‖x‖)`.
    pub fn coordinates_in_span(&self, x: &ComplexMatrix, tol: &Tolerance) -> Result<DVector<C64>> {
        let (coords, residual) = self.coordinates(x)?;
        if residual > tol.abs_eps * (1.0 + x.norm()) {
            return Err(Error::NotInSpan { residual });
        }
        Ok(coords)
    }

    /// Residual of `x` against the span, normalized by `1 + ‖x‖`.
    pub fn membership_residual(&self, x: &ComplexMatrix) -> Result<f64> {
        let (_, residual) = self.coordinates(x)?;
        Ok(residual / (1.0 + x.norm()))
    }

    pub fn combine(&self, coords: &DVector<C64>) -> ComplexMatrix {
        match &self.kind {
            SpanKind::MatrixUnits => unvectorize(coords, self.rows, self.cols),
            SpanKind::General { stacked, .. } => unvectorize(&(stacked * coords), self.rows, self.cols),
        }
    }
}

/// Applies the linear map with the given basis images to `coords`.
pub fn combine_images(images: &[ComplexMatrix], coords: &DVector<C64>, rows: usize, cols: usize) -> ComplexMatrix {
    let mut out = zeros(rows, cols);
    for (img, &w) in images.iter().zip(coords.iter()) {
        if w != C64::new(0.0, 0.0) {
            out += img * w;
        }
    }
    out
}
