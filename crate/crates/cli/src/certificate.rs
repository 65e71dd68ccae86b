//! Machine-readable verification certificates.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};
use taudilate_core::{Check, Report, Tolerance};

use crate::format::ToleranceSpec;
use crate::load::Failure;

pub const CERTIFICATE_SCHEMA: &str = "taudilate-certificate/1";

/// One residual check as printed: three significant digits, with the
/// verdict taken from the unrounded values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub anchor: String,
    pub residual: String,
    pub threshold: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, anchor: &str, residual: f64, threshold: f64, witness: Option<String>) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            residual: sig3(residual),
            threshold: sig3(threshold),
            pass: residual <= threshold,
            witness,
        }
    }

    pub fn from_check(check: &Check, anchor: &str) -> Self {
        Self::new(check.name, anchor, check.residual, check.threshold, check.witness.clone())
    }
}

/// `1.23e-4`-style rendering with three significant digits.
pub fn sig3(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.2e}")
    } else {
        x.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRecord {
    pub class: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub schema: &'static str,
    pub toolkit_version: &'static str,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    pub instance_digest: String,
    pub tolerance: ToleranceSpec,
    pub quantities: BTreeMap<String, serde_json::Value>,
    pub checks: Vec<CheckRecord>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorRecord>,
    pub wall_time_ms: f64,
}

impl Certificate {
    /// Exit status: 0 on pass, otherwise that of the recorded error
    /// (a plain failed check counts as a verification failure).
    pub fn exit_code(&self, failure: Option<&Failure>) -> i32 {
        match (self.verdict, failure) {
            (Verdict::Pass, _) => 0,
            (Verdict::Fail, Some(f)) => f.exit_code(),
            (Verdict::Fail, None) => 1,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates always serialize")
    }

    /// A short human summary, one line per check.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let mark = if c.pass { "pass" } else { "FAIL" };
            out.push_str(&format!("{mark} {} [{}]: {} (≤ {})", c.name, c.anchor, c.residual, c.threshold));
            if let (false, Some(w)) = (c.pass, &c.witness) {
                out.push_str(&format!(" at {w}"));
            }
            out.push('\n');
        }
        let verdict = match self.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        };
        match &self.target {
            Some(t) => out.push_str(&format!("{} {t}: {verdict}", self.command)),
            None => out.push_str(&format!("{}: {verdict}", self.command)),
        }
        if let Some(e) = &self.error {
            out.push_str(&format!(" ({}: {})", e.class, e.message));
        }
        out.push('\n');
        out
    }
}

/// Accumulates checks while a command runs.
#[derive(Debug)]
pub struct CertificateBuilder {
    command: String,
    target: Option<String>,
    digest: String,
    tolerance: ToleranceSpec,
    quantities: BTreeMap<String, serde_json::Value>,
    checks: Vec<CheckRecord>,
    failure: Option<Failure>,
    started: Instant,
}

impl CertificateBuilder {
    pub fn new(command: &str, target: Option<&str>, digest: String, tol: &Tolerance) -> Self {
        Self {
            command: command.into(),
            target: target.map(Into::into),
            digest,
            tolerance: ToleranceSpec {
                abs_eps: tol.abs_eps,
                gram_cutoff_rel: tol.gram_cutoff_rel,
            },
            quantities: BTreeMap::new(),
            checks: Vec::new(),
            failure: None,
            started: Instant::now(),
        }
    }

    pub fn quantity(&mut self, key: &str, value: impl Into<serde_json::Value>) {
        self.quantities.insert(key.into(), value.into());
    }

    pub fn push(&mut self, record: CheckRecord) {
        self.checks.push(record);
    }

    pub fn report(&mut self, report: &Report, anchor: &str) {
        for c in &report.checks {
            self.push(CheckRecord::from_check(c, anchor));
        }
    }

    /// Records a failure as a failing check named after the step that hit it.
    /// Only the first failure decides the exit code.
    pub fn fail(&mut self, step: &str, anchor: &str, failure: Failure) {
        let residual = match &failure {
            Failure::Verification { residual, .. } => *residual,
            _ => f64::INFINITY,
        };
        let residual = if residual.is_nan() { f64::INFINITY } else { residual };
        self.push(CheckRecord::new(
            step,
            anchor,
            residual.max(f64::MIN_POSITIVE),
            0.0,
            Some(failure.message().to_string()),
        ));
        if self.failure.is_none() {
            self.failure = Some(failure);
        }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn finish(self) -> (Certificate, Option<Failure>) {
        let verdict = if self.all_passed() { Verdict::Pass } else { Verdict::Fail };
        let cert = Certificate {
            schema: CERTIFICATE_SCHEMA,
            toolkit_version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            target: self.target,
            instance_digest: self.digest,
            tolerance: self.tolerance,
            quantities: self.quantities,
            checks: self.checks,
            verdict,
            error: self.failure.as_ref().map(|f| ErrorRecord {
                class: f.class(),
                message: f.message().to_string(),
            }),
            wall_time_ms: self.started.elapsed().as_secs_f64() * 1e3,
        };
        (cert, self.failure)
    }
}

/// `sha256:` digest of `bytes`.
pub fn digest(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}
