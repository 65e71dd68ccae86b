//! Seeded random instances: Kraus CP maps, τ-maps, canonical covariant
//! τ-maps over `ℤ/2`, `ℤ/3`, `S₃`, crossed τ̃-maps, and negative controls.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{group_average_cp, AlgebraAction, ConcreteCStarAlgebra, FiniteGroup, UnitaryRep};
use crate::crossed::{build_crossed_module, CrossedTauMap};
use crate::dilation::{gns_construct, stinespring_unitaries, CPMap, TauMap};
use crate::error::{Error, Result};
use crate::linalg::{c, direct_sum, hermitian_eigen, identity, kron, vstack, zeros, ComplexMatrix, Tolerance, C64};
use crate::module::{ConcreteHilbertModule, Correspondence, ModuleDynamicalSystem};

/// Draws are retried this many times when they come out numerically degenerate.
const MAX_ATTEMPTS: usize = 16;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries i.i.d. standard complex Gaussian.
pub fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im) / std::f64::consts::SQRT_2
    })
}

/// Haar-ish unitary from the QR factor of a Gaussian matrix.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    gaussian_matrix(rng, n, n).qr().q()
}

/// `count` Kraus operators `d_A × d_B` normalised so that `Σ K_i* K_i = 1`,
/// i.e. the map `a ↦ Σ K_i* a K_i` is unital. When `count·d_A < d_B` that sum
/// cannot be invertible and the family is only scaled to `‖Σ K_i* K_i‖ = 1`.
pub fn random_kraus(rng: &mut impl Rng, dim_a: usize, dim_b: usize, count: usize) -> Result<Vec<ComplexMatrix>> {
    let unital = count * dim_a >= dim_b;
    for _ in 0..MAX_ATTEMPTS {
        let kraus: Vec<_> = (0..count).map(|_| gaussian_matrix(rng, dim_a, dim_b)).collect();
        let sum = kraus.iter().fold(zeros(dim_b, dim_b), |acc, k| acc + k.adjoint() * k);
        let (values, vectors) = hermitian_eigen(&sum);
        let hi = values[values.len() - 1];
        if !unital {
            let scale = c(1.0 / hi.sqrt(), 0.0);
            return Ok(kraus.iter().map(|k| k * scale).collect());
        }
        if values[0] < 1e-3 * hi {
            continue;
        }
        let inv_sqrt = &vectors
            * ComplexMatrix::from_diagonal(&values.iter().map(|v| c(1.0 / v.sqrt(), 0.0)).collect::<Vec<_>>().into())
            * vectors.adjoint();
        return Ok(kraus.iter().map(|k| k * &inv_sqrt).collect());
    }
    Err(Error::DomainMismatch("could not draw a well-conditioned Kraus family".into()))
}

pub fn random_cp_map(
    rng: &mut impl Rng,
    dim_a: usize,
    dim_b: usize,
    count: usize,
    tol: &Tolerance,
) -> Result<CPMap> {
    let kraus = random_kraus(rng, dim_a, dim_b, count)?;
    CPMap::from_kraus(
        ConcreteCStarAlgebra::full(dim_a).into_arc(),
        ConcreteCStarAlgebra::full(dim_b).into_arc(),
        &kraus,
        tol,
    )
}

/// `T(x) = W [π(x_1)V; …; π(x_n)V; 0]` on `E = Aⁿ` over a random Kraus map
/// `τ: M_{dim_a} → M_{dim_b}`, with `junk` zero rows and a random unitary `W`
/// mixing all rows of `E′`.
pub fn random_tau_map(
    rng: &mut impl Rng,
    dim_a: usize,
    dim_b: usize,
    kraus: usize,
    n: usize,
    junk: usize,
    tol: &Tolerance,
) -> Result<TauMap> {
    for _ in 0..MAX_ATTEMPTS {
        let tau = random_cp_map(rng, dim_a, dim_b, kraus, tol)?;
        let base = gns_construct(&tau, tol)?;
        if base.rank_unstable() {
            continue;
        }
        let rows = n * base.dim() + junk;
        let w = random_unitary(rng, rows);
        let a = tau.domain().clone();
        let e = ConcreteHilbertModule::free(a, n, tol)?.into_arc();
        let target = Arc::new(Correspondence::full(tau.codomain().clone(), rows)?);
        let images = e
            .basis()
            .iter()
            .map(|x| Ok(&w * stacked(&base, x, n, dim_a, junk)?))
            .collect::<Result<Vec<_>>>()?;
        return TauMap::new(tau, e, target, images, tol);
    }
    Err(Error::DomainMismatch("could not draw a τ with a stable dilation rank".into()))
}

/// `[π(x_1)V; …; π(x_n)V; 0_{junk × b}]` for `x` stacked from `d × d` blocks.
fn stacked(
    base: &crate::dilation::StinespringData,
    x: &ComplexMatrix,
    n: usize,
    d: usize,
    junk: usize,
) -> Result<ComplexMatrix> {
    let b = base.v().ncols();
    let mut blocks = (0..n)
        .map(|i| Ok(base.pi(&x.rows(i * d, d).into_owned())? * base.v()))
        .collect::<Result<Vec<_>>>()?;
    blocks.push(zeros(junk, b));
    Ok(vstack(&blocks))
}

/// `T = id` on `E = M_{n·d × d}` over `τ = id` on `M_d`.
pub fn identity_tau_map(d: usize, n: usize) -> Result<TauMap> {
    let a = ConcreteCStarAlgebra::full(d).into_arc();
    let e = ConcreteHilbertModule::full(a.clone(), n * d)?.into_arc();
    let target = Arc::new(Correspondence::full(a.clone(), n * d)?);
    TauMap::new(CPMap::identity(a), e.clone(), target, e.basis().to_vec(), &Tolerance::default())
}

/// The finite groups the generators know about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    Trivial,
    Z2,
    Z3,
    S3,
}

impl GroupKind {
    pub const ALL: [GroupKind; 3] = [GroupKind::Z2, GroupKind::Z3, GroupKind::S3];

    pub fn group(self) -> FiniteGroup {
        match self {
            GroupKind::Trivial => FiniteGroup::trivial(),
            GroupKind::Z2 => FiniteGroup::cyclic(2),
            GroupKind::Z3 => FiniteGroup::cyclic(3),
            GroupKind::S3 => FiniteGroup::symmetric3(),
        }
    }

    /// A faithful 2-dimensional representation: `diag(1, −1)` for `ℤ/2`,
    /// `diag(1, ω^k)` for `ℤ/3`, and the standard irreducible one for `S₃`.
    pub fn rho_images(self) -> Vec<ComplexMatrix> {
        let diag = |z: C64| ComplexMatrix::from_diagonal(&vec![c(1.0, 0.0), z].into());
        match self {
            GroupKind::Trivial => vec![identity(2)],
            GroupKind::Z2 => vec![identity(2), diag(c(-1.0, 0.0))],
            GroupKind::Z3 => {
                let w = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
                (0..3).map(|k| diag(w.powi(k))).collect()
            }
            GroupKind::S3 => {
                // restriction of the permutation action to (1,1,1)^⊥
                let s2 = std::f64::consts::SQRT_2;
                let s6 = 6.0_f64.sqrt();
                let f = ComplexMatrix::from_fn(3, 2, |i, j| {
                    let col = if j == 0 { [1.0 / s2, -1.0 / s2, 0.0] } else { [1.0 / s6, 1.0 / s6, -2.0 / s6] };
                    c(col[i], 0.0)
                });
                FiniteGroup::symmetric3_permutations()
                    .iter()
                    .map(|p| f.adjoint() * permutation_matrix(p) * &f)
                    .collect()
            }
        }
    }
}

/// `P e_i = e_{p(i)}`.
fn permutation_matrix(p: &[usize]) -> ComplexMatrix {
    let mut m = zeros(p.len(), p.len());
    for (i, &j) in p.iter().enumerate() {
        m[(j, i)] = c(1.0, 0.0);
    }
    m
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupKind::Trivial => "trivial",
            GroupKind::Z2 => "z2",
            GroupKind::Z3 => "z3",
            GroupKind::S3 => "s3",
        })
    }
}

impl FromStr for GroupKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "trivial" | "e" | "1" => Ok(GroupKind::Trivial),
            "z2" => Ok(GroupKind::Z2),
            "z3" => Ok(GroupKind::Z3),
            "s3" => Ok(GroupKind::S3),
            other => Err(format!("unknown group {other:?} (expected trivial, z2, z3 or s3)")),
        }
    }
}

/// A τ-map with a module dynamical system and the unitary representations
/// it is meant to be covariant for.
#[derive(Debug, Clone)]
pub struct CovariantInstance {
    pub t: TauMap,
    pub sys: ModuleDynamicalSystem,
    pub u: UnitaryRep,
    pub u_prime: UnitaryRep,
}

/// Block permutation `σ_t` of the `n` summands of `E = Aⁿ`: the natural
/// action for `S₃` on three summands, the sign (swap when `det ρ_t = −1`)
/// on two summands, otherwise trivial.
fn block_permutation(kind: GroupKind, t: usize, rho_t: &ComplexMatrix, n: usize) -> ComplexMatrix {
    if kind == GroupKind::S3 && n == 3 {
        return permutation_matrix(&FiniteGroup::symmetric3_permutations()[t]);
    }
    if n == 2 && (rho_t.determinant() + c(1.0, 0.0)).norm() < 1e-9 {
        return permutation_matrix(&[1, 0]);
    }
    identity(n)
}

/// The canonical covariant instance over `A = M₂` with `α = Ad ρ`:
/// `τ` a group average of a random Kraus map, `E = Aⁿ` with
/// `η_t(x) = (σ_t ⊗ ρ_t) x ρ_t*`, `T(x) = [π(x_i)V]_i ⊕ 0_junk`,
/// `u = ρ` and `u′ = (σ ⊗ v) ⊕ 1_junk` with `v` the Stinespring unitaries.
pub fn canonical_covariant(
    rng: &mut impl Rng,
    kind: GroupKind,
    n: usize,
    kraus: usize,
    junk: usize,
    tol: &Tolerance,
) -> Result<CovariantInstance> {
    let d = 2;
    let a = ConcreteCStarAlgebra::full(d).into_arc();
    let group = Arc::new(kind.group());
    let rho = UnitaryRep::new(group.clone(), kind.rho_images(), tol)?;
    let alpha = AlgebraAction::inner(a.clone(), &rho, tol)?;
    for _ in 0..MAX_ATTEMPTS {
        let phi = random_cp_map(rng, d, d, kraus, tol)?;
        let tau = group_average_cp(&phi, &alpha, &rho, tol)?;
        let base = gns_construct(&tau, tol)?;
        if base.rank_unstable() {
            continue;
        }
        let v = stinespring_unitaries(&base, &alpha, &rho)?;
        let sigma: Vec<_> = group.elements().map(|t| block_permutation(kind, t, rho.image(t), n)).collect();

        let e = ConcreteHilbertModule::free(a.clone(), n, tol)?.into_arc();
        let sys = ModuleDynamicalSystem::from_fn(
            group.clone(),
            e.clone(),
            |t, x| kron(&sigma[t], rho.image(t)) * x * rho.image(t).adjoint(),
            tol,
        )?;
        let rows = n * base.dim() + junk;
        let u_prime_images = group
            .elements()
            .map(|t| direct_sum(&[&kron(&sigma[t], &v[t]), &identity(junk)]))
            .collect();
        let u_prime = UnitaryRep::new(group.clone(), u_prime_images, &tol.construction())?;
        let target = Arc::new(Correspondence::full(a.clone(), rows)?);
        let images = e
            .basis()
            .iter()
            .map(|x| stacked(&base, x, n, d, junk))
            .collect::<Result<Vec<_>>>()?;
        let t = TauMap::new(tau, e, target, images, tol)?;
        return Ok(CovariantInstance { t, sys, u: rho, u_prime });
    }
    Err(Error::DomainMismatch("could not draw a τ with a stable dilation rank".into()))
}

/// A covariant τ̃-map built directly on `A ×_α G` with `E = A = M₂`, `η = α`:
/// `T̃(l) = L(l) Y` and `τ̃(f) = Y* rep(f) Y` where `Y = (1/|G|) Σ_t i_G(t) Y₀ u_t*`
/// for a random `Y₀`, so that `i_G(t) Y = Y u_t`.
pub fn direct_crossed(rng: &mut impl Rng, kind: GroupKind, tol: &Tolerance) -> Result<CrossedTauMap> {
    let d = 2;
    let a = ConcreteCStarAlgebra::full(d).into_arc();
    let group = Arc::new(kind.group());
    let n = group.order();
    let rho = UnitaryRep::new(group.clone(), kind.rho_images(), tol)?;
    let e = ConcreteHilbertModule::full(a.clone(), d)?.into_arc();
    let sys = ModuleDynamicalSystem::from_fn(
        group.clone(),
        e,
        |t, x| rho.image(t) * x * rho.image(t).adjoint(),
        tol,
    )?;
    let module = Arc::new(build_crossed_module(&sys, tol)?);
    let cp = module.algebra().clone();

    let y0 = gaussian_matrix(rng, d * n, d);
    let weight = c(1.0 / n as f64, 0.0);
    let y = group
        .elements()
        .fold(zeros(d * n, d), |acc, t| acc + cp.i_g(t) * &y0 * rho.image(t).adjoint() * weight);

    let tau_images = cp.concrete().basis().iter().map(|f| y.adjoint() * f * &y).collect();
    let tau_tilde = CPMap::new(cp.concrete().clone(), a.clone(), tau_images, tol)?;
    let images = module.concrete().basis().iter().map(|l| l * &y).collect();
    let target = Arc::new(Correspondence::full(a, d * n)?);
    let u_prime = UnitaryRep::new(group.clone(), group.elements().map(|t| cp.i_g(t)).collect(), tol)?;
    CrossedTauMap::new(tau_tilde, module, target, images, rho, u_prime, tol)
}

/// The transpose on `M_d`, positive but not completely positive.
pub fn transpose_map(d: usize) -> Result<CPMap> {
    let a = ConcreteCStarAlgebra::full(d).into_arc();
    let images = a.basis().iter().map(|x| x.transpose()).collect();
    CPMap::linear(a.clone(), a, images, &Tolerance::default())
}

/// `u` with every non-identity element's image negated. For `ℤ/2` this is
/// still a representation, but the instance is no longer covariant.
pub fn sign_corrupted(u: &UnitaryRep) -> UnitaryRep {
    u.map_images_unchecked(|t, x| if t == 0 { x.clone() } else { -x })
}

/// The same instance with `η` replaced by `η_t ∘ η_t`; over `ℤ/3` this is a
/// valid system (`t ↦ 2t` is an automorphism) for which `T` is not covariant.
pub fn doubled_eta(inst: &CovariantInstance, tol: &Tolerance) -> Result<ModuleDynamicalSystem> {
    let sys = &inst.sys;
    ModuleDynamicalSystem::from_fn(
        sys.group().clone(),
        sys.module().clone(),
        |t, x| {
            let once = sys.apply(t, x).expect("basis element of E");
            sys.apply(t, &once).expect("η maps E into E")
        },
        tol,
    )
}
