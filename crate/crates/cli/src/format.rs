//! The JSON problem-file format.
//!
//! Every object is named, and later sections refer to earlier ones by name.
//! Matrices carry explicit `rows`/`cols` and row-major `[re, im]` pairs.

use serde::{Deserialize, Serialize};
use taudilate_core::{ComplexMatrix, C64};

pub const FORMAT_VERSION: &str = "taudilate-problem/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixData {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixData {
    pub fn to_matrix(&self) -> Result<ComplexMatrix, String> {
        if self.data.len() != self.rows * self.cols {
            return Err(format!(
                "matrix declares {}×{} but carries {} entries",
                self.rows,
                self.cols,
                self.data.len()
            ));
        }
        if self.data.iter().flatten().any(|x| !x.is_finite()) {
            return Err("matrix has a non-finite entry".into());
        }
        Ok(ComplexMatrix::from_row_iterator(
            self.rows,
            self.cols,
            self.data.iter().map(|&[re, im]| C64::new(re, im)),
        ))
    }
}

impl From<&ComplexMatrix> for MatrixData {
    fn from(m: &ComplexMatrix) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                data.push([z.re, z.im]);
            }
        }
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }
}

pub fn matrices(ms: &[ComplexMatrix]) -> Vec<MatrixData> {
    ms.iter().map(MatrixData::from).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    pub abs_eps: f64,
    pub gram_cutoff_rel: f64,
}

/// A unital *-subalgebra of `M_ambient_dim`: either all of it (`full`) or
/// the span of an explicit basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    pub name: String,
    pub ambient_dim: usize,
    #[serde(default, skip_serializing_if = "is_false")]
    pub full: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub basis: Vec<MatrixData>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub name: String,
    pub order: usize,
    pub cayley: Vec<Vec<usize>>,
}

/// `images[t] = u_t`; with `algebra` set, every `u_t` must lie in it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepSpec {
    pub name: String,
    pub group: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebra: Option<String>,
    pub images: Vec<MatrixData>,
}

/// Either `inner` (the name of a representation `ρ`, giving `α_t = Ad ρ_t`)
/// or explicit `images[t][μ] = α_t(f_μ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpec {
    pub name: String,
    pub group: String,
    pub algebra: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub images: Option<Vec<Vec<MatrixData>>>,
}

/// A right module of `rows × d` matrices: all of them (`full`), the free
/// module `Aⁿ` (`free = n`), or the span of an explicit basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleSpec {
    pub name: String,
    pub algebra: String,
    pub rows: usize,
    #[serde(default, skip_serializing_if = "is_false")]
    pub full: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub free: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub basis: Vec<MatrixData>,
}

/// A module with a left algebra acting by matrix multiplication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrespondenceSpec {
    pub name: String,
    pub module: String,
    pub left_algebra: String,
}

/// A linear map given by its values on the domain basis, or by Kraus
/// operators `a ↦ Σ K* a K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CpMapSpec {
    pub name: String,
    pub domain: String,
    pub codomain: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub images: Option<Vec<MatrixData>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<MatrixData>>,
}

/// `images[j] = T(x_j)` on the basis of `source`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauMapSpec {
    pub name: String,
    pub tau: String,
    pub source: String,
    pub target: String,
    pub images: Vec<MatrixData>,
}

/// `images[t][j] = η_t(x_j)` on the basis of `module`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub name: String,
    pub group: String,
    pub module: String,
    pub images: Vec<Vec<MatrixData>>,
}

/// A τ-map meant to be covariant for `(η, u, u′)`. With `action` set, `τ`
/// is also checked for covariance against that algebra action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovariantSpec {
    pub name: String,
    pub tau_map: String,
    pub system: String,
    pub u: String,
    pub u_prime: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<String>,
}

/// A τ̃-map on the crossed-product module of `system`: `tau_tilde` lists
/// `τ̃` on the crossed-algebra basis and `images` lists `T̃` on the
/// crossed-module basis (both indexed `t·dim + j`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossedSpec {
    pub name: String,
    pub system: String,
    pub target: String,
    pub tau_tilde: Vec<MatrixData>,
    pub images: Vec<MatrixData>,
    pub u: String,
    pub u_prime: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<ToleranceSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub groups: Vec<GroupSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub algebras: Vec<AlgebraSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reps: Vec<RepSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub actions: Vec<ActionSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub modules: Vec<ModuleSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub correspondences: Vec<CorrespondenceSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cp_maps: Vec<CpMapSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tau_maps: Vec<TauMapSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub systems: Vec<SystemSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub covariant: Vec<CovariantSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub crossed: Vec<CrossedSpec>,
}

impl Default for ProblemFile {
    fn default() -> Self {
        Self {
            version: FORMAT_VERSION.into(),
            tolerance: None,
            groups: Vec::new(),
            algebras: Vec::new(),
            reps: Vec::new(),
            actions: Vec::new(),
            modules: Vec::new(),
            correspondences: Vec::new(),
            cp_maps: Vec::new(),
            tau_maps: Vec::new(),
            systems: Vec::new(),
            covariant: Vec::new(),
            crossed: Vec::new(),
        }
    }
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        let file: Self = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if file.version != FORMAT_VERSION {
            return Err(format!("unsupported version {:?} (expected {FORMAT_VERSION:?})", file.version));
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files always serialize")
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip_is_row_major() {
        let m = ComplexMatrix::from_fn(2, 3, |i, j| C64::new(i as f64, j as f64));
        let data = MatrixData::from(&m);
        assert_eq!(data.data[1], [0.0, 1.0]);
        assert_eq!(data.data[3], [1.0, 0.0]);
        assert_eq!(data.to_matrix().unwrap(), m);
    }

    #[test]
    fn short_data_is_rejected() {
        let data = MatrixData {
            rows: 2,
            cols: 2,
            data: vec![[1.0, 0.0]; 3],
        };
        assert!(data.to_matrix().is_err());
    }

    #[test]
    fn unknown_fields_and_versions_are_rejected() {
        assert!(ProblemFile::parse(r#"{"version": "taudilate-problem/1", "extra": 1}"#).is_err());
        assert!(ProblemFile::parse(r#"{"version": "other"}"#).is_err());
        assert!(ProblemFile::parse(r#"{"version": "taudilate-problem/1"}"#).is_ok());
    }
}
