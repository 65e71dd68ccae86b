//! Residual bookkeeping shared by the verification operations.

use std::fmt;

/// One named residual check: the worst residual observed, the threshold it
/// was held to, and where the worst case occurred.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub residual: f64,
    pub threshold: f64,
    pub witness: Option<String>,
}

impl Check {
    pub fn new(name: &'static str, threshold: f64) -> Self {
        Self {
            name,
            residual: 0.0,
            threshold,
            witness: None,
        }
    }

    /// Records `residual`, keeping the worst one and its witness.
    pub fn observe(&mut self, residual: f64, witness: impl FnOnce() -> String) {
        if residual > self.residual || residual.is_nan() {
            self.residual = residual;
            self.witness = Some(witness());
        }
    }

    pub fn passed(&self) -> bool {
        self.residual <= self.threshold
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "pass" } else { "FAIL" };
        write!(f, "{verdict} {}: {:.3e} (≤ {:.1e})", self.name, self.residual, self.threshold)?;
        if let (false, Some(w)) = (self.passed(), &self.witness) {
            write!(f, " at {w}")?;
        }
        Ok(())
    }
}

/// A list of checks with a conjunctive verdict.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed())
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().fold(0.0, |acc, c| acc.max(c.residual))
    }

    /// Turns the first failing check of a construction's self-test into an error.
    pub(crate) fn require(&self) -> crate::error::Result<()> {
        match self.first_failure() {
            Some(failed) => Err(crate::error::Error::ConstructionCheck {
                check: failed.name,
                residual: failed.residual,
                threshold: failed.threshold,
            }),
            None => Ok(()),
        }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}
