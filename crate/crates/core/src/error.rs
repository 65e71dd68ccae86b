use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A single reason a candidate algebra basis was rejected.
#[derive(Debug, Clone, PartialEq)]
pub enum AlgebraViolation {
    LinearlyDependentBasis { len: usize, rank: usize },
    NotStarClosed { index: usize, residual: f64 },
    NotMultiplicativelyClosed { left: usize, right: usize, residual: f64 },
    NoUnit { residual: f64 },
}

impl fmt::Display for AlgebraViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::LinearlyDependentBasis { len, rank } => {
                write!(f, "LinearlyDependentBasis: {len} elements span only rank {rank}")
            }
            Self::NotStarClosed { index, residual } => {
                write!(f, "NotStarClosed: adjoint of basis[{index}] leaves the span (residual {residual:.3e})")
            }
            Self::NotMultiplicativelyClosed { left, right, residual } => write!(
                f,
                "NotMultiplicativelyClosed: basis[{left}]·basis[{right}] leaves the span (residual {residual:.3e})"
            ),
            Self::NoUnit { residual } => write!(f, "NoUnit: identity not in span (residual {residual:.3e})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GroupViolation {
    Empty,
    NotSquareTable { order: usize },
    EntryOutOfRange { row: usize, col: usize, value: usize },
    NotLatinSquare { row: Option<usize>, col: Option<usize> },
    IdentityNotFirst,
    NotAssociative { a: usize, b: usize, c: usize },
}

impl fmt::Display for GroupViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Empty => write!(f, "empty Cayley table"),
            Self::NotSquareTable { order } => write!(f, "Cayley table is not {order}×{order}"),
            Self::EntryOutOfRange { row, col, value } => {
                write!(f, "entry ({row},{col}) = {value} is not a group element")
            }
            Self::NotLatinSquare { row: Some(r), .. } => write!(f, "LatinSquare: row {r} repeats an element"),
            Self::NotLatinSquare { col: Some(k), .. } => write!(f, "LatinSquare: column {k} repeats an element"),
            Self::NotLatinSquare { .. } => write!(f, "LatinSquare violated"),
            Self::IdentityNotFirst => write!(f, "element 0 is not the identity"),
            Self::NotAssociative { a, b, c } => write!(f, "({a}·{b})·{c} ≠ {a}·({b}·{c})"),
        }
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("tolerances must be positive and finite (abs_eps {abs_eps}, gram_cutoff_rel {gram_cutoff_rel})")]
    InvalidTolerance { abs_eps: f64, gram_cutoff_rel: f64 },

    #[error("matrix is not square ({rows}×{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (‖m − m*‖ = {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("Gram matrix is not positive semidefinite (minimal eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("{context}: expected shape {expected:?}, found {found:?}")]
    DimensionMismatch {
        context: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("element is not in the span (residual {residual:.3e})")]
    NotInSpan { residual: f64 },

    #[error("invalid algebra: {}", join(.0))]
    InvalidAlgebra(Vec<AlgebraViolation>),

    #[error("invalid group: {0}")]
    InvalidGroup(GroupViolation),

    #[error("{what} is not a {property} (residual {residual:.3e}{})", witness_suffix(.witness))]
    Invalid {
        what: &'static str,
        property: &'static str,
        residual: f64,
        witness: Option<String>,
    },

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("module is not full: inner products span dimension {spanned} of {algebra_dim}")]
    NotFull { spanned: usize, algebra_dim: usize },

    #[error("η does not induce a well-defined automorphism at group element {element} (residual {residual:.3e})")]
    InconsistentAction { element: usize, residual: f64 },

    #[error("map is not completely positive (minimal block eigenvalue {min_eigenvalue:.3e})")]
    NotCp { min_eigenvalue: f64 },

    #[error("Ψ is ill-defined for basis element {element} (residual {residual:.3e})")]
    IllDefinedPsi { element: usize, residual: f64 },

    #[error("τ-map is not (u′,u)-covariant at group element {element}, module basis {basis} (residual {residual:.3e})")]
    NotCovariantTauMap { element: usize, basis: usize, residual: f64 },

    #[error("τ is not u-covariant for the induced action at group element {element} (residual {residual:.3e})")]
    InducedCovarianceBroken { element: usize, residual: f64 },

    #[error("u′ does not leave [T(E)B]⊙H invariant at group element {element} (residual {residual:.3e})")]
    FprimeNotInvariant { element: usize, residual: f64 },

    #[error("integrated form violates {identity} at {witness} (residual {residual:.3e})")]
    LemmaViolation {
        identity: &'static str,
        witness: String,
        residual: f64,
    },

    #[error("convolution disagrees with the regular representation on basis ({left}, {right}) (residual {residual:.3e})")]
    RepresentationMismatch { left: usize, right: usize, residual: f64 },

    #[error("crossed τ̃-map violates covariance condition ({condition}) at group element {element} (residual {residual:.3e})")]
    NotCovariantCrossed {
        condition: char,
        element: usize,
        residual: f64,
    },

    #[error("α_t ∘ ⟨m,m′⟩^l_t ≠ ⟨m^r_(t⁻¹), m′⟩ at group element {element} (residual {residual:.3e})")]
    IdentityViolation { element: usize, residual: f64 },

    #[error("post-construction check {check} failed (residual {residual:.3e} > {threshold:.3e})")]
    ConstructionCheck {
        check: &'static str,
        residual: f64,
        threshold: f64,
    },
}

fn witness_suffix(w: &Option<String>) -> String {
    w.as_ref().map(|w| format!(", at {w}")).unwrap_or_default()
}

impl Error {
    /// Verification failures (as opposed to malformed input or internal errors).
    pub fn is_verification_failure(&self) -> bool {
        matches!(
            self,
            Error::NotCp { .. }
                | Error::NotCovariantTauMap { .. }
                | Error::InducedCovarianceBroken { .. }
                | Error::FprimeNotInvariant { .. }
                | Error::IllDefinedPsi { .. }
                | Error::NotCovariantCrossed { .. }
                | Error::IdentityViolation { .. }
                | Error::NotFull { .. }
                | Error::InconsistentAction { .. }
        )
    }

    /// Failures of a construction's own post-checks.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            Error::ConstructionCheck { .. } | Error::LemmaViolation { .. } | Error::RepresentationMismatch { .. }
        )
    }
}
