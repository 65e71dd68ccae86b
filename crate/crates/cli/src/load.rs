//! Turns a parsed problem file into validated core objects.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use taudilate_core::algebra::{AlgebraAction, ConcreteCStarAlgebra, FiniteGroup, UnitaryRep};
use taudilate_core::crossed::{build_crossed_module, CrossedTauMap};
use taudilate_core::dilation::{verify_cp, verify_tau_map, CPMap, TauMap};
use taudilate_core::linalg::{identity, relative_residual};
use taudilate_core::module::{ConcreteHilbertModule, Correspondence, ModuleDynamicalSystem};
use taudilate_core::{ComplexMatrix, Error, Tolerance};

use crate::format::*;

/// Why an object could not be produced, classified by exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    /// Unreadable or inconsistent input: bad JSON, unresolved names, wrong shapes.
    Malformed(String),
    /// Well-formed input that fails a mathematical check.
    Verification { message: String, residual: f64 },
    /// A construction failed one of its own post-checks.
    Internal(String),
}

impl Failure {
    pub fn message(&self) -> &str {
        match self {
            Failure::Malformed(m) | Failure::Internal(m) => m,
            Failure::Verification { message, .. } => message,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Verification { .. } => 1,
            Failure::Malformed(_) => 2,
            Failure::Internal(_) => 3,
        }
    }

    pub fn class(&self) -> &'static str {
        match self {
            Failure::Verification { .. } => "verification",
            Failure::Malformed(_) => "malformed-input",
            Failure::Internal(_) => "internal",
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        if e.is_internal() {
            return Failure::Internal(message);
        }
        match e {
            Error::DimensionMismatch { .. }
            | Error::NotSquare { .. }
            | Error::DomainMismatch(_)
            | Error::InvalidTolerance { .. } => Failure::Malformed(message),
            other => Failure::Verification {
                message,
                residual: error_residual(&other),
            },
        }
    }
}

/// The residual an error reports, or infinity when it carries none.
fn error_residual(e: &Error) -> f64 {
    use taudilate_core::error::AlgebraViolation;
    match e {
        Error::NotInSpan { residual }
        | Error::Invalid { residual, .. }
        | Error::InconsistentAction { residual, .. }
        | Error::IllDefinedPsi { residual, .. }
        | Error::NotCovariantTauMap { residual, .. }
        | Error::InducedCovarianceBroken { residual, .. }
        | Error::FprimeNotInvariant { residual, .. }
        | Error::NotCovariantCrossed { residual, .. }
        | Error::IdentityViolation { residual, .. } => *residual,
        Error::NotCp { min_eigenvalue } | Error::NotPsd { min_eigenvalue } => min_eigenvalue.abs(),
        Error::InvalidAlgebra(vs) => vs
            .iter()
            .map(|v| match v {
                AlgebraViolation::NotStarClosed { residual, .. }
                | AlgebraViolation::NotMultiplicativelyClosed { residual, .. }
                | AlgebraViolation::NoUnit { residual } => *residual,
                AlgebraViolation::LinearlyDependentBasis { .. } => f64::INFINITY,
            })
            .fold(0.0, f64::max),
        _ => f64::INFINITY,
    }
}

fn malformed(msg: impl Into<String>) -> Failure {
    Failure::Malformed(msg.into())
}

/// The residual of a successfully loaded object, with where it peaked.
#[derive(Debug, Clone, PartialEq)]
pub struct Validation {
    pub residual: f64,
    pub threshold: f64,
    pub witness: Option<String>,
}

impl Validation {
    fn exact() -> Self {
        Self {
            residual: 0.0,
            threshold: 0.0,
            witness: None,
        }
    }

    fn worst(threshold: f64, items: impl IntoIterator<Item = (f64, String)>) -> Self {
        let mut v = Self {
            residual: 0.0,
            threshold,
            witness: None,
        };
        for (r, w) in items {
            if r > v.residual || r.is_nan() {
                v.residual = r;
                v.witness = Some(w);
            }
        }
        v
    }

    pub fn passed(&self) -> bool {
        self.residual <= self.threshold
    }
}

/// One loaded (or rejected) object.
#[derive(Debug, Clone)]
pub struct LoadRecord {
    pub kind: &'static str,
    pub name: String,
    pub outcome: Result<Validation, Failure>,
}

/// A covariant τ-map together with the data it is covariant for.
#[derive(Debug, Clone)]
pub struct CovariantEntry {
    pub t: TauMap,
    pub sys: ModuleDynamicalSystem,
    pub u: UnitaryRep,
    pub u_prime: UnitaryRep,
    pub action: Option<AlgebraAction>,
}

/// All objects of a problem file, by name.
#[derive(Debug, Default)]
pub struct Registry {
    pub groups: BTreeMap<String, Arc<FiniteGroup>>,
    pub algebras: BTreeMap<String, Arc<ConcreteCStarAlgebra>>,
    pub reps: BTreeMap<String, UnitaryRep>,
    pub actions: BTreeMap<String, AlgebraAction>,
    pub modules: BTreeMap<String, Arc<ConcreteHilbertModule>>,
    pub correspondences: BTreeMap<String, Arc<Correspondence>>,
    pub cp_maps: BTreeMap<String, CPMap>,
    pub tau_maps: BTreeMap<String, TauMap>,
    pub systems: BTreeMap<String, ModuleDynamicalSystem>,
    pub covariant: BTreeMap<String, CovariantEntry>,
    pub crossed: BTreeMap<String, CrossedTauMap>,
    failed: BTreeSet<String>,
}

fn lookup<'a, T>(
    failed: &BTreeSet<String>,
    map: &'a BTreeMap<String, T>,
    kind: &str,
    name: &str,
) -> Result<&'a T, Failure> {
    map.get(name).ok_or_else(|| {
        if failed.contains(name) {
            Failure::Verification {
                message: format!("depends on {kind} {name:?}, which failed to load"),
                residual: f64::INFINITY,
            }
        } else {
            malformed(format!("{kind} {name:?} is not defined"))
        }
    })
}

fn to_matrices(ms: &[MatrixData]) -> Result<Vec<ComplexMatrix>, Failure> {
    ms.iter().map(|m| m.to_matrix().map_err(Failure::Malformed)).collect()
}

/// The tolerance in force: command-line overrides beat the file's, which beat the defaults.
pub fn effective_tolerance(
    file: Option<&ToleranceSpec>,
    abs_eps: Option<f64>,
    gram_cutoff: Option<f64>,
) -> Result<Tolerance, Failure> {
    let base = Tolerance::default();
    let abs = abs_eps.or(file.map(|t| t.abs_eps)).unwrap_or(base.abs_eps);
    let cutoff = gram_cutoff.or(file.map(|t| t.gram_cutoff_rel)).unwrap_or(base.gram_cutoff_rel);
    Tolerance::new(abs, cutoff).map_err(Failure::from)
}

impl Registry {
    /// Loads every object in file order, recording one outcome per object.
    /// An object whose dependencies failed to load fails too.
    pub fn load(file: &ProblemFile, tol: &Tolerance) -> (Self, Vec<LoadRecord>) {
        let mut reg = Self::default();
        let mut records = Vec::new();
        macro_rules! section {
            ($kind:literal, $specs:expr, $build:ident) => {
                for spec in &$specs {
                    let outcome = if reg.defines(&spec.name) {
                        Err(malformed(format!("name {:?} is used twice", spec.name)))
                    } else {
                        reg.$build(spec, tol)
                    };
                    if outcome.is_err() {
                        reg.failed.insert(spec.name.clone());
                    }
                    records.push(LoadRecord {
                        kind: $kind,
                        name: spec.name.clone(),
                        outcome,
                    });
                }
            };
        }
        section!("group", file.groups, load_group);
        section!("algebra", file.algebras, load_algebra);
        section!("rep", file.reps, load_rep);
        section!("action", file.actions, load_action);
        section!("module", file.modules, load_module);
        section!("correspondence", file.correspondences, load_correspondence);
        section!("cp_map", file.cp_maps, load_cp_map);
        section!("tau_map", file.tau_maps, load_tau_map);
        section!("system", file.systems, load_system);
        section!("covariant", file.covariant, load_covariant);
        section!("crossed", file.crossed, load_crossed);
        (reg, records)
    }

    /// Loads everything, failing on the first object that does not load.
    pub fn load_strict(file: &ProblemFile, tol: &Tolerance) -> Result<Self, Failure> {
        let (reg, records) = Self::load(file, tol);
        for r in records {
            if let Err(f) = r.outcome {
                return Err(prefix(f, &format!("{} {:?}: ", r.kind, r.name)));
            }
        }
        Ok(reg)
    }

    fn defines(&self, name: &str) -> bool {
        self.failed.contains(name)
            || self.groups.contains_key(name)
            || self.algebras.contains_key(name)
            || self.reps.contains_key(name)
            || self.actions.contains_key(name)
            || self.modules.contains_key(name)
            || self.correspondences.contains_key(name)
            || self.cp_maps.contains_key(name)
            || self.tau_maps.contains_key(name)
            || self.systems.contains_key(name)
            || self.covariant.contains_key(name)
            || self.crossed.contains_key(name)
    }

    fn load_group(&mut self, spec: &GroupSpec, _tol: &Tolerance) -> Result<Validation, Failure> {
        if spec.cayley.len() != spec.order {
            return Err(malformed(format!(
                "order {} but the Cayley table has {} rows",
                spec.order,
                spec.cayley.len()
            )));
        }
        let group = FiniteGroup::from_cayley(spec.cayley.clone()).map_err(group_failure)?;
        self.groups.insert(spec.name.clone(), Arc::new(group));
        Ok(Validation::exact())
    }

    fn load_algebra(&mut self, spec: &AlgebraSpec, tol: &Tolerance) -> Result<Validation, Failure> {
        let (algebra, validation) = match (spec.full, spec.basis.is_empty()) {
            (true, true) => (ConcreteCStarAlgebra::full(spec.ambient_dim), Validation::exact()),
            (false, false) => {
                let basis = to_matrices(&spec.basis)?;
                let algebra = ConcreteCStarAlgebra::validate(spec.ambient_dim, basis, tol)?;
                let b = algebra.basis();
                let mut items = Vec::new();
                for (i, x) in b.iter().enumerate() {
                    items.push((algebra.membership_residual(&x.adjoint())?, format!("basis[{i}]*")));
                    for (j, y) in b.iter().enumerate() {
                        items.push((algebra.membership_residual(&(x * y))?, format!("basis[{i}]·basis[{j}]")));
                    }
                }
                (algebra, Validation::worst(tol.abs_eps, items))
            }
            _ => return Err(malformed("an algebra needs exactly one of `full` or `basis`")),
        };
        self.algebras.insert(spec.name.clone(), algebra.into_arc());
        Ok(validation)
    }

    fn load_rep(&mut self, spec: &RepSpec, tol: &Tolerance) -> Result<Validation, Failure> {
        let group = lookup(&self.failed, &self.groups, "group", &spec.group)?.clone();
        let images = to_matrices(&spec.images)?;
        if images.is_empty() {
            return Err(malformed("a representation needs one image per group element"));
        }
        let rep = match &spec.algebra {
            Some(a) => UnitaryRep::in_algebra(group.clone(), lookup(&self.failed, &self.algebras, "algebra", a)?, images, tol)?,
            None => UnitaryRep::new(group.clone(), images, tol)?,
        };
        let one = identity(rep.dim());
        let mut items = Vec::new();
        for s in group.elements() {
            let us = rep.image(s);
            items.push((relative_residual(&(us.adjoint() * us), &one), format!("u_{s}*u_{s}")));
            for t in group.elements() {
                let lhs = us * rep.image(t);
                items.push((relative_residual(&lhs, rep.image(group.mul(s, t))), format!("u_{s}u_{t}")));
            }
        }
        self.reps.insert(spec.name.clone(), rep);
        Ok(Validation::worst(tol.abs_eps, items))
    }

    fn load_action(&mut self, spec: &ActionSpec, tol: &Tolerance) -> Result<Validation, Failure> {
        let group = lookup(&self.failed, &self.groups, "group", &spec.group)?.clone();
        let algebra = lookup(&self.failed, &self.algebras, "algebra", &spec.algebra)?.clone();
        let action = match (&spec.inner, &spec.images) {
            (Some(rho), None) => {
                let rho = lookup(&self.failed, &self.reps, "rep", rho)?;
                if rho.group() != &group {
                    return Err(malformed("the inner representation is over a different group"));
                }
                AlgebraAction::inner(algebra.clone(), rho, tol)?
            }
            (None, Some(images)) => {
                let images = images.iter().map(|row| to_matrices(row)).collect::<Result<Vec<_>, _>>()?;
                AlgebraAction::new(group.clone(), algebra.clone(), images, tol)?
            }
            _ => return Err(malformed("an action needs exactly one of `inner` or `images`")),
        };
        let mut items = Vec::new();
        for s in group.elements() {
            for t in group.elements() {
                for (mu, f) in algebra.basis().iter().enumerate() {
                    let lhs = action.apply(s, &action.apply(t, f)?)?;
                    let rhs = action.apply(group.mul(s, t), f)?;
                    items.push((relative_residual(&lhs, &rhs), format!("α_{s}α_{t}(basis[{mu}])")));
                }
            }
        }
        self.actions.insert(spec.name.clone(), action);
        Ok(Validation::worst(tol.abs_eps, items))
    }

    fn load_module(&mut self, spec: &ModuleSpec, tol: &Tolerance) -> Result<Validation, Failure> {
        let algebra = lookup(&self.failed, &self.algebras, "algebra", &spec.algebra)?.clone();
        let d = algebra.ambient_dim();
        let module = match (spec.full, spec.free, spec.basis.is_empty()) {
            (true, None, true) => ConcreteHilbertModule::full(algebra, spec.rows)?,
            (false, Some(n), true) => {
                if n * d != spec.rows {
                    return Err(malformed(format!("free module of rank {n} has {} rows, not {}", n * d, spec.rows)));
                }
                ConcreteHilbertModule::free(algebra, n, tol)?
            }
            (false, None, false) => ConcreteHilbertModule::validate(algebra, spec.rows, to_matrices(&spec.basis)?, tol)?,
            _ => return Err(malformed("a module needs exactly one of `full`, `free` or `basis`")),
        };
        self.modules.insert(spec.name.clone(), module.into_arc());
        Ok(Validation::exact())
    }

    fn load_correspondence(&mut self, spec: &CorrespondenceSpec, tol: &Tolerance) -> Result<Validation, Failure> {
        let module = lookup(&self.failed, &self.modules, "module", &spec.module)?.clone();
        let left = lookup(&self.failed, &self.algebras, "algebra", &spec.left_algebra)?.clone();
        let corr = Correspondence::new(module, left, tol)?;
        self.correspondences.insert(spec.name.clone(), Arc::new(corr));
        Ok(Validation::exact())
    }

    /// Loads the map as a linear map; complete positivity is reported as the
    /// residual, not enforced, so that a non-CP map still loads.
    fn load_cp_map(&mut self, spec: &CpMapSpec, tol: &Tolerance) -> Result<Validation, Failure> {
        let domain = lookup(&self.failed, &self.algebras, "algebra", &spec.domain)?.clone();
        let codomain = lookup(&self.failed, &self.algebras, "algebra", &spec.codomain)?.clone();
        let map = match (&spec.images, &spec.kraus) {
            (Some(images), None) => CPMap::linear(domain, codomain, to_matrices(images)?, tol)?,
            (None, Some(kraus)) => CPMap::from_kraus(domain, codomain, &to_matrices(kraus)?, tol)?,
            _ => return Err(malformed("a map needs exactly one of `images` or `kraus`")),
        };
        let validation = cp_validation(&map, tol)?;
        self.cp_maps.insert(spec.name.clone(), map);
        Ok(validation)
    }

    fn load_tau_map(&mut self, spec: &TauMapSpec, tol: &Tolerance) -> Result<Validation, Failure> {
        let tau = lookup(&self.failed, &self.cp_maps, "cp_map", &spec.tau)?.clone();
        let source = lookup(&self.failed, &self.modules, "module", &spec.source)?.clone();
        let target = lookup(&self.failed, &self.correspondences, "correspondence", &spec.target)?.clone();
        let t = TauMap::new(tau, source, target, to_matrices(&spec.images)?, tol)?;
        let check = verify_tau_map(&t, tol)?;
        self.tau_maps.insert(spec.name.clone(), t);
        Ok(Validation {
            residual: check.residual,
            threshold: check.threshold,
            witness: check.witness,
        })
    }

    fn load_system(&mut self, spec: &SystemSpec, tol: &Tolerance) -> Result<Validation, Failure> {
        let group = lookup(&self.failed, &self.groups, "group", &spec.group)?.clone();
        let module = lookup(&self.failed, &self.modules, "module", &spec.module)?.clone();
        let images = spec.images.iter().map(|row| to_matrices(row)).collect::<Result<Vec<_>, _>>()?;
        let sys = ModuleDynamicalSystem::new(group, module, images, tol)?;
        let check = sys.compatibility(tol)?;
        self.systems.insert(spec.name.clone(), sys);
        Ok(Validation {
            residual: check.residual,
            threshold: check.threshold,
            witness: check.witness,
        })
    }

    fn load_covariant(&mut self, spec: &CovariantSpec, _tol: &Tolerance) -> Result<Validation, Failure> {
        let entry = CovariantEntry {
            t: lookup(&self.failed, &self.tau_maps, "tau_map", &spec.tau_map)?.clone(),
            sys: lookup(&self.failed, &self.systems, "system", &spec.system)?.clone(),
            u: lookup(&self.failed, &self.reps, "rep", &spec.u)?.clone(),
            u_prime: lookup(&self.failed, &self.reps, "rep", &spec.u_prime)?.clone(),
            action: match &spec.action {
                Some(a) => Some(lookup(&self.failed, &self.actions, "action", a)?.clone()),
                None => None,
            },
        };
        self.covariant.insert(spec.name.clone(), entry);
        Ok(Validation::exact())
    }

    fn load_crossed(&mut self, spec: &CrossedSpec, tol: &Tolerance) -> Result<Validation, Failure> {
        let sys = lookup(&self.failed, &self.systems, "system", &spec.system)?;
        let target = lookup(&self.failed, &self.correspondences, "correspondence", &spec.target)?.clone();
        let u = lookup(&self.failed, &self.reps, "rep", &spec.u)?.clone();
        let u_prime = lookup(&self.failed, &self.reps, "rep", &spec.u_prime)?.clone();
        let module = Arc::new(build_crossed_module(sys, tol)?);
        let tau_tilde = CPMap::linear(
            module.algebra().concrete().clone(),
            target.module().algebra().clone(),
            to_matrices(&spec.tau_tilde)?,
            tol,
        )?
        .checked(tol)?;
        let ct = CrossedTauMap::new(tau_tilde, module, target, to_matrices(&spec.images)?, u, u_prime, tol)?;
        let validation = Validation::worst(
            tol.abs_eps,
            ct.report().checks.iter().map(|c| (c.residual, c.name.to_string())),
        );
        self.crossed.insert(spec.name.clone(), ct);
        Ok(validation)
    }
}

fn group_failure(e: Error) -> Failure {
    match e {
        Error::InvalidGroup(_) => Failure::Verification {
            message: e.to_string(),
            residual: f64::INFINITY,
        },
        other => other.into(),
    }
}

/// CP residual: how far the smallest Choi-block eigenvalue falls below
/// zero, relative to `1 + max |λ|` as in the positivity test.
pub fn cp_validation(map: &CPMap, tol: &Tolerance) -> Result<Validation, Failure> {
    let report = verify_cp(map, tol)?;
    let item = if report.min_eigenvalue.is_nan() {
        (f64::INFINITY, format!("block matrix not Hermitian (defect {:.2e})", report.hermitian_defect))
    } else {
        (
            (-report.min_eigenvalue).max(0.0) / (1.0 + report.max_abs_eigenvalue),
            format!("λ_min = {:.3e}", report.min_eigenvalue),
        )
    };
    Ok(Validation::worst(tol.abs_eps, [item]))
}

fn prefix(f: Failure, p: &str) -> Failure {
    match f {
        Failure::Malformed(m) => Failure::Malformed(format!("{p}{m}")),
        Failure::Internal(m) => Failure::Internal(format!("{p}{m}")),
        Failure::Verification { message, residual } => Failure::Verification {
            message: format!("{p}{message}"),
            residual,
        },
    }
}
