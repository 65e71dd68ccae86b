use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, GroupViolation, Result};

/// Largest order for which associativity is checked on every triple.
const EXHAUSTIVE_ASSOCIATIVITY_ORDER: usize = 24;

/// A finite group given by its Cayley table. Element `0` is the identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    cayley: Vec<Vec<usize>>,
    inverses: Vec<usize>,
}

impl FiniteGroup {
    pub fn from_cayley(cayley: Vec<Vec<usize>>) -> Result<Self> {
        let n = cayley.len();
        let fail = |v| Err(Error::InvalidGroup(v));
        if n == 0 {
            return fail(GroupViolation::Empty);
        }
        if cayley.iter().any(|row| row.len() != n) {
            return fail(GroupViolation::NotSquareTable { order: n });
        }
        for (row, entries) in cayley.iter().enumerate() {
            if let Some((col, &value)) = entries.iter().enumerate().find(|(_, &v)| v >= n) {
                return fail(GroupViolation::EntryOutOfRange { row, col, value });
            }
        }
        for i in 0..n {
            let mut seen_row = vec![false; n];
            let mut seen_col = vec![false; n];
            for j in 0..n {
                if std::mem::replace(&mut seen_row[cayley[i][j]], true) {
                    return fail(GroupViolation::NotLatinSquare {
                        row: Some(i),
                        col: None,
                    });
                }
                if std::mem::replace(&mut seen_col[cayley[j][i]], true) {
                    return fail(GroupViolation::NotLatinSquare {
                        row: None,
                        col: Some(i),
                    });
                }
            }
        }
        if (0..n).any(|t| cayley[0][t] != t || cayley[t][0] != t) {
            return fail(GroupViolation::IdentityNotFirst);
        }
        let assoc = |a: usize, b: usize, c: usize| cayley[cayley[a][b]][c] == cayley[a][cayley[b][c]];
        if n <= EXHAUSTIVE_ASSOCIATIVITY_ORDER {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if !assoc(a, b, c) {
                            return fail(GroupViolation::NotAssociative { a, b, c });
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            for _ in 0..10 * n * n {
                let (a, b, c) = (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n));
                if !assoc(a, b, c) {
                    return fail(GroupViolation::NotAssociative { a, b, c });
                }
            }
        }
        // Latin square rows guarantee a unique right inverse.
        let inverses = (0..n)
            .map(|t| cayley[t].iter().position(|&v| v == 0).unwrap_or(0))
            .collect();
        Ok(Self { cayley, inverses })
    }

    pub fn trivial() -> Self {
        Self::cyclic(1)
    }

    /// `ℤ/n`, element `k` standing for `k mod n`.
    pub fn cyclic(n: usize) -> Self {
        assert!(n > 0, "cyclic group order must be positive");
        let cayley = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        let inverses = (0..n).map(|a| (n - a) % n).collect();
        Self { cayley, inverses }
    }

    /// `S₃` as permutations of `{0,1,2}`, composed right to left.
    /// Elements in order: e, (0 1 2), (0 2 1), (0 1), (1 2), (0 2).
    pub fn symmetric3() -> Self {
        let perms = Self::symmetric3_permutations();
        let index = |p: [usize; 3]| perms.iter().position(|&q| q == p).unwrap();
        let cayley = perms
            .iter()
            .map(|a| perms.iter().map(|b| index([a[b[0]], a[b[1]], a[b[2]]])).collect())
            .collect();
        Self::from_cayley(cayley).expect("S3 table is a group")
    }

    /// The permutations used by [`FiniteGroup::symmetric3`], as images of `0, 1, 2`.
    pub fn symmetric3_permutations() -> [[usize; 3]; 6] {
        [[0, 1, 2], [1, 2, 0], [2, 0, 1], [1, 0, 2], [0, 2, 1], [2, 1, 0]]
    }

    pub fn order(&self) -> usize {
        self.cayley.len()
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.cayley[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverses[a]
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order()
    }

    pub fn cayley(&self) -> &[Vec<usize>] {
        &self.cayley
    }
}
