//! The verification commands. Each returns a certificate and, when the run
//! stopped on an error, the failure that decides the exit code.

use taudilate_core::algebra::verify_covariant_cp;
use taudilate_core::crossed::{
    build_crossed_module, integrated_form, restrict_tau_map, roundtrip_check, RoundtripInstance,
};
use taudilate_core::dilation::{
    covariant_dilate, decompose_with_base, gns_construct, verify_covariant_tau_map, verify_tau_map, CPMap,
    CovariantStinespringData, StinespringData,
};
use taudilate_core::Tolerance;

use crate::certificate::{digest, Certificate, CertificateBuilder, CheckRecord};
use crate::format::ProblemFile;
use crate::load::{cp_validation, effective_tolerance, Failure, Registry};

const ANCHOR_INPUT: &str = "input";
const ANCHOR_VALIDATION: &str = "object validation";
const ANCHOR_CP: &str = "complete positivity";
const ANCHOR_STINESPRING: &str = "τ(a) = V*π(a)V";
const ANCHOR_TAU: &str = "T(x) = S*Ψ(x)V";
const ANCHOR_COVARIANCE: &str = "T(η_t x) = u′_t T(x) u_t*";
const ANCHOR_COVARIANT_DILATION: &str = "v_t V = V u_t";
const ANCHOR_INTEGRATED: &str = "integrated form";
const ANCHOR_ROUNDTRIP: &str = "lift/restrict bijection";

/// Tolerance overrides from the command line.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub abs_eps: Option<f64>,
    pub gram_cutoff: Option<f64>,
}

pub type Outcome = (Certificate, Option<Failure>);

/// Parses the file and settles the tolerance; on failure the returned
/// builder already holds the failing check.
fn prepare(
    command: &str,
    target: Option<&str>,
    text: &str,
    overrides: Overrides,
) -> Result<(ProblemFile, Tolerance, CertificateBuilder), Box<CertificateBuilder>> {
    let file = match ProblemFile::parse(text) {
        Ok(f) => f,
        Err(msg) => {
            let mut b = CertificateBuilder::new(command, target, digest(text.as_bytes()), &Tolerance::default());
            b.fail("parse problem file", ANCHOR_INPUT, Failure::Malformed(msg));
            return Err(Box::new(b));
        }
    };
    let mut canonical = serde_json::to_vec(&file).expect("problem files always serialize");
    if let Some(t) = target {
        canonical.push(b'\n');
        canonical.extend_from_slice(t.as_bytes());
    }
    let d = digest(&canonical);
    match effective_tolerance(file.tolerance.as_ref(), overrides.abs_eps, overrides.gram_cutoff) {
        Ok(tol) => {
            let b = CertificateBuilder::new(command, target, d, &tol);
            Ok((file, tol, b))
        }
        Err(f) => {
            let mut b = CertificateBuilder::new(command, target, d, &Tolerance::default());
            b.fail("tolerance", ANCHOR_INPUT, f);
            Err(Box::new(b))
        }
    }
}

fn load_strict(
    command: &str,
    target: &str,
    text: &str,
    overrides: Overrides,
) -> Result<(Registry, Tolerance, CertificateBuilder), Box<Outcome>> {
    let (file, tol, mut b) = prepare(command, Some(target), text, overrides).map_err(|b| Box::new(b.finish()))?;
    match Registry::load_strict(&file, &tol) {
        Ok(reg) => Ok((reg, tol, b)),
        Err(f) => {
            b.fail("load problem file", ANCHOR_INPUT, f);
            Err(Box::new(b.finish()))
        }
    }
}

/// Loads and validates every object, one check per object.
pub fn validate(text: &str, overrides: Overrides) -> Outcome {
    let (file, tol, mut b) = match prepare("validate", None, text, overrides) {
        Ok(x) => x,
        Err(b) => return b.finish(),
    };
    let (_, records) = Registry::load(&file, &tol);
    b.quantity("objects", records.len());
    for r in records {
        let name = format!("{} {}", r.kind, r.name);
        match r.outcome {
            Ok(v) => b.push(CheckRecord::new(name, ANCHOR_VALIDATION, v.residual, v.threshold, v.witness)),
            Err(f) => b.fail(&name, ANCHOR_VALIDATION, f),
        }
    }
    b.finish()
}

/// Stinespring dilation of a CP map, or of the CP map under a τ-map
/// followed by the τ-map decomposition.
pub fn dilate(text: &str, name: &str, overrides: Overrides) -> Outcome {
    let (reg, tol, mut b) = match load_strict("dilate", name, text, overrides) {
        Ok(x) => x,
        Err(out) => return *out,
    };
    let (tau, t) = if let Some(tau) = reg.cp_maps.get(name) {
        (tau.clone(), None)
    } else if let Some(t) = reg.tau_maps.get(name) {
        (t.tau().clone(), Some(t))
    } else {
        b.fail("find map", ANCHOR_INPUT, Failure::Malformed(format!("no cp_map or tau_map named {name:?}")));
        return b.finish();
    };
    b.quantity("kind", if t.is_some() { "tau_map" } else { "cp_map" });
    let Some(base) = dilate_cp(&tau, &tol, &mut b) else {
        return b.finish();
    };
    let Some(t) = t else {
        return b.finish();
    };
    let check = match verify_tau_map(t, &tol) {
        Ok(c) => c,
        Err(e) => {
            b.fail("verify τ-map", ANCHOR_TAU, e.into());
            return b.finish();
        }
    };
    b.push(CheckRecord::from_check(&check, ANCHOR_TAU));
    if !check.passed() {
        return b.finish();
    }
    match decompose_with_base(t, base, &tol) {
        Ok(dec) => {
            b.quantity("fpp_dim", dec.fpp_space().ncols());
            b.quantity("epp_dim", dec.epp_space().ncols());
            b.report(dec.report(), ANCHOR_TAU);
        }
        Err(e) => b.fail("decompose τ-map", ANCHOR_TAU, e.into()),
    }
    b.finish()
}

/// Positivity and the Stinespring construction; `None` when the map is not
/// CP or the construction failed.
fn dilate_cp(tau: &CPMap, tol: &Tolerance, b: &mut CertificateBuilder) -> Option<StinespringData> {
    let v = match cp_validation(tau, tol) {
        Ok(v) => v,
        Err(f) => {
            b.fail("verify_cp", ANCHOR_CP, f);
            return None;
        }
    };
    let passed = v.passed();
    b.push(CheckRecord::new("τ completely positive", ANCHOR_CP, v.residual, v.threshold, v.witness));
    if !passed {
        return None;
    }
    match gns_construct(tau, tol) {
        Ok(base) => {
            b.quantity("dilation_dim", base.dim());
            b.quantity("rank_unstable", base.rank_unstable());
            b.report(base.report(), ANCHOR_STINESPRING);
            Some(base)
        }
        Err(e) => {
            b.fail("gns_construct", ANCHOR_STINESPRING, e.into());
            None
        }
    }
}

/// Covariance of a τ-map and its covariant dilation.
pub fn covariant(text: &str, name: &str, overrides: Overrides) -> Outcome {
    let (reg, tol, mut b) = match load_strict("covariant", name, text, overrides) {
        Ok(x) => x,
        Err(out) => return *out,
    };
    let Some(entry) = reg.covariant.get(name) else {
        b.fail("find instance", ANCHOR_INPUT, Failure::Malformed(format!("no covariant instance named {name:?}")));
        return b.finish();
    };
    b.quantity("group_order", entry.sys.group().order());
    if let Some(action) = &entry.action {
        match verify_covariant_cp(entry.t.tau(), action, &entry.u, &tol) {
            Ok(c) => b.push(CheckRecord::from_check(&c, ANCHOR_COVARIANCE)),
            Err(e) => b.fail("verify_covariant_cp", ANCHOR_COVARIANCE, e.into()),
        }
    }
    match verify_covariant_tau_map(&entry.t, &entry.sys, &entry.u, &entry.u_prime, &tol) {
        Ok(r) => b.report(&r, ANCHOR_COVARIANCE),
        Err(e) => b.fail("verify_covariant_tau_map", ANCHOR_COVARIANCE, e.into()),
    }
    if !b.all_passed() {
        return b.finish();
    }
    match covariant_dilate(&entry.t, &entry.sys, &entry.u, &entry.u_prime, &tol) {
        Ok(data) => {
            b.quantity("dilation_dim", data.base().dim());
            b.quantity("fpp_dim", data.decomposition().fpp_space().ncols());
            b.report(data.report(), ANCHOR_COVARIANT_DILATION);
        }
        Err(e) => b.fail("covariant_dilate", ANCHOR_COVARIANT_DILATION, e.into()),
    }
    b.finish()
}

/// Lift/restrict round trip plus both integrated-form identities.
pub fn roundtrip(text: &str, name: &str, overrides: Overrides) -> Outcome {
    let (reg, tol, mut b) = match load_strict("roundtrip", name, text, overrides) {
        Ok(x) => x,
        Err(out) => return *out,
    };
    if let Some(entry) = reg.covariant.get(name) {
        b.quantity("kind", "covariant");
        let instance = RoundtripInstance::Covariant {
            t: entry.t.clone(),
            sys: entry.sys.clone(),
            u: entry.u.clone(),
            u_prime: entry.u_prime.clone(),
        };
        b.report(&roundtrip_check(&instance, &tol), ANCHOR_ROUNDTRIP);
        let inputs = covariant_dilate(&entry.t, &entry.sys, &entry.u, &entry.u_prime, &tol)
            .and_then(|data| Ok((data, std::sync::Arc::new(build_crossed_module(&entry.sys, &tol)?))));
        integrated_checks(inputs, &tol, &mut b);
    } else if let Some(ct) = reg.crossed.get(name) {
        b.quantity("kind", "crossed");
        b.report(&roundtrip_check(&RoundtripInstance::Crossed(ct.clone()), &tol), ANCHOR_ROUNDTRIP);
        let inputs = restrict_tau_map(ct, &tol).and_then(|r| {
            let data = covariant_dilate(r.tau_map(), r.sys(), r.u(), r.u_prime(), &tol)?;
            Ok((data, ct.module().clone()))
        });
        integrated_checks(inputs, &tol, &mut b);
    } else {
        b.fail(
            "find instance",
            ANCHOR_INPUT,
            Failure::Malformed(format!("no covariant or crossed instance named {name:?}")),
        );
    }
    b.finish()
}

type IntegratedInput = (CovariantStinespringData, std::sync::Arc<taudilate_core::crossed::CrossedProductModule>);

fn integrated_checks(input: taudilate_core::Result<IntegratedInput>, tol: &Tolerance, b: &mut CertificateBuilder) {
    match input.and_then(|(data, module)| integrated_form(&data, &module, tol)) {
        Ok(form) => b.report(form.report(), ANCHOR_INTEGRATED),
        Err(e) => b.fail("integrated form", ANCHOR_INTEGRATED, e.into()),
    }
}
