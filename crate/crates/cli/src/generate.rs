//! Seeded random instances, written out as problem files.

use taudilate_core::algebra::{ConcreteCStarAlgebra, FiniteGroup, UnitaryRep};
use taudilate_core::dilation::{CPMap, TauMap};
use taudilate_core::instances::{
    canonical_covariant, direct_crossed, identity_tau_map, random_cp_map, random_tau_map, rng_from_seed, GroupKind,
};
use taudilate_core::module::{ConcreteHilbertModule, ModuleDynamicalSystem};
use taudilate_core::Tolerance;

use crate::format::*;
use crate::load::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Kind {
    Cp,
    Tau,
    Covariant,
    Crossed,
}

/// Size parameters; each kind reads the ones it needs.
#[derive(Debug, Clone, Copy)]
pub struct Params {
    pub seed: u64,
    pub group: GroupKind,
    pub n: usize,
    pub kraus: usize,
    pub dim_a: usize,
    pub dim_b: usize,
    pub junk: usize,
    pub identity: bool,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            seed: 0,
            group: GroupKind::Z2,
            n: 1,
            kraus: 2,
            dim_a: 2,
            dim_b: 2,
            junk: 0,
            identity: false,
        }
    }
}

pub fn generate(kind: Kind, p: &Params, tol: &Tolerance) -> Result<ProblemFile, Failure> {
    if p.n == 0 || p.kraus == 0 || p.dim_a == 0 || p.dim_b == 0 {
        return Err(Failure::Malformed("sizes must be positive".into()));
    }
    let mut rng = rng_from_seed(p.seed);
    let mut file = ProblemFile::default();
    match kind {
        Kind::Cp => {
            let tau = if p.identity {
                CPMap::identity(ConcreteCStarAlgebra::full(p.dim_a).into_arc())
            } else {
                random_cp_map(&mut rng, p.dim_a, p.dim_b, p.kraus, tol)?
            };
            push_cp(&mut file, "tau", "A", "B", &tau);
        }
        Kind::Tau => {
            let t = if p.identity {
                identity_tau_map(p.dim_a, p.n)?
            } else {
                random_tau_map(&mut rng, p.dim_a, p.dim_b, p.kraus, p.n, p.junk, tol)?
            };
            push_tau_map(&mut file, "T", &t);
        }
        Kind::Covariant => {
            let inst = canonical_covariant(&mut rng, p.group, p.n, p.kraus, p.junk, tol)?;
            file.groups.push(group_spec("G", inst.sys.group()));
            push_tau_map(&mut file, "T", &inst.t);
            file.systems.push(system_spec("eta", "G", "E", &inst.sys));
            file.reps.push(rep_spec("u", "G", &inst.u));
            file.reps.push(rep_spec("u_prime", "G", &inst.u_prime));
            // α = Ad u on the domain of τ
            file.actions.push(ActionSpec {
                name: "alpha".into(),
                group: "G".into(),
                algebra: "A".into(),
                inner: Some("u".into()),
                images: None,
            });
            file.covariant.push(CovariantSpec {
                name: "instance".into(),
                tau_map: "T".into(),
                system: "eta".into(),
                u: "u".into(),
                u_prime: "u_prime".into(),
                action: Some("alpha".into()),
            });
        }
        Kind::Crossed => {
            let ct = direct_crossed(&mut rng, p.group, tol)?;
            let sys = ct.module().sys();
            let target = ct.tau_map().target();
            file.groups.push(group_spec("G", sys.group()));
            file.algebras.push(algebra_spec("A", sys.module().algebra()));
            file.algebras.push(algebra_spec("B", target.module().algebra()));
            file.algebras.push(algebra_spec("C", target.left_algebra()));
            file.modules.push(module_spec("E", "A", sys.module()));
            file.modules.push(module_spec("Eprime", "B", target.module()));
            file.correspondences.push(correspondence_spec("target", "Eprime", "C"));
            file.systems.push(system_spec("eta", "G", "E", sys));
            file.reps.push(rep_spec("u", "G", ct.u()));
            file.reps.push(rep_spec("u_prime", "G", ct.u_prime()));
            file.crossed.push(CrossedSpec {
                name: "instance".into(),
                system: "eta".into(),
                target: "target".into(),
                tau_tilde: matrices(ct.tau_tilde().images()),
                images: matrices(ct.tau_map().images()),
                u: "u".into(),
                u_prime: "u_prime".into(),
            });
        }
    }
    Ok(file)
}

fn push_cp(file: &mut ProblemFile, name: &str, domain: &str, codomain: &str, tau: &CPMap) {
    file.algebras.push(algebra_spec(domain, tau.domain()));
    file.algebras.push(algebra_spec(codomain, tau.codomain()));
    file.cp_maps.push(CpMapSpec {
        name: name.into(),
        domain: domain.into(),
        codomain: codomain.into(),
        images: Some(matrices(tau.images())),
        kraus: None,
    });
}

/// `T` with its `τ: A → B`, source `E`, and target `Eprime` with left algebra `C`.
fn push_tau_map(file: &mut ProblemFile, name: &str, t: &TauMap) {
    push_cp(file, "tau", "A", "B", t.tau());
    file.algebras.push(algebra_spec("C", t.target().left_algebra()));
    file.modules.push(module_spec("E", "A", t.source()));
    file.modules.push(module_spec("Eprime", "B", t.target().module()));
    file.correspondences.push(correspondence_spec("target", "Eprime", "C"));
    file.tau_maps.push(TauMapSpec {
        name: name.into(),
        tau: "tau".into(),
        source: "E".into(),
        target: "target".into(),
        images: matrices(t.images()),
    });
}

pub fn algebra_spec(name: &str, a: &ConcreteCStarAlgebra) -> AlgebraSpec {
    AlgebraSpec {
        name: name.into(),
        ambient_dim: a.ambient_dim(),
        full: a.is_full(),
        basis: if a.is_full() { Vec::new() } else { matrices(a.basis()) },
    }
}

pub fn group_spec(name: &str, g: &FiniteGroup) -> GroupSpec {
    GroupSpec {
        name: name.into(),
        order: g.order(),
        cayley: g.cayley().to_vec(),
    }
}

pub fn rep_spec(name: &str, group: &str, u: &UnitaryRep) -> RepSpec {
    RepSpec {
        name: name.into(),
        group: group.into(),
        algebra: None,
        images: matrices(u.images()),
    }
}

/// The full module is written as `full`; anything else by its basis.
pub fn module_spec(name: &str, algebra: &str, e: &ConcreteHilbertModule) -> ModuleSpec {
    let full = e.algebra().is_full() && e.dim() == e.rows() * e.cols();
    ModuleSpec {
        name: name.into(),
        algebra: algebra.into(),
        rows: e.rows(),
        full,
        free: None,
        basis: if full { Vec::new() } else { matrices(e.basis()) },
    }
}

fn correspondence_spec(name: &str, module: &str, left: &str) -> CorrespondenceSpec {
    CorrespondenceSpec {
        name: name.into(),
        module: module.into(),
        left_algebra: left.into(),
    }
}

pub fn system_spec(name: &str, group: &str, module: &str, sys: &ModuleDynamicalSystem) -> SystemSpec {
    let images = sys
        .group()
        .elements()
        .map(|t| {
            sys.module()
                .basis()
                .iter()
                .map(|x| MatrixData::from(&sys.apply(t, x).expect("basis elements lie in the module")))
                .collect()
        })
        .collect();
    SystemSpec {
        name: name.into(),
        group: group.into(),
        module: module.into(),
        images,
    }
}
