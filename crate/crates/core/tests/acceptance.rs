//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::sync::Arc;
use std::time::{Duration, Instant};

use taudilate_core::algebra::{AlgebraAction, ConcreteCStarAlgebra, UnitaryRep};
use taudilate_core::crossed::{
    build_crossed_algebra, build_crossed_module, integrated_form, roundtrip_check, CrossedProductAlgebra,
    RoundtripInstance, Tuple,
};
use taudilate_core::dilation::{covariant_dilate, decompose_tau_map, gns_construct, verify_covariant_tau_map, verify_cp};
use taudilate_core::instances::{
    canonical_covariant, direct_crossed, gaussian_matrix, random_cp_map, random_tau_map, rng_from_seed,
    sign_corrupted, transpose_map, CovariantInstance, GroupKind,
};
use taudilate_core::linalg::{c, direct_sum, identity};
use taudilate_core::{ComplexMatrix as M, Tolerance};

fn tol() -> Tolerance {
    Tolerance::default()
}

fn diff(x: &M, y: &M) -> f64 {
    (x - y).norm()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Worst `‖τ(a) − V*π(a)V‖` over matrix units, 200 seeded Kraus maps.
fn c1_reconstruction() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for seed in 0..200u64 {
        let dim_a = 2 + (seed % 2) as usize;
        let dim_b = 2 + ((seed / 2) % 2) as usize;
        let kraus = 1 + (seed % 3) as usize;
        let tau = random_cp_map(&mut rng_from_seed(seed), dim_a, dim_b, kraus, &tol()).unwrap();
        let data = gns_construct(&tau, &tol()).unwrap();
        for (k, a) in tau.domain().basis().iter().enumerate() {
            let rebuilt = data.v().adjoint() * data.pi(a).unwrap() * data.v();
            worst = worst.max(diff(&rebuilt, &tau.images()[k]));
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-9 && elapsed < Duration::from_secs(60),
        format!("max residual {worst:.2e}, {elapsed:.2?}"),
    )
}

/// Choi rank from `C = Σ e_ij ⊗ τ(e_ij)`, counted against the largest eigenvalue.
fn choi_rank(tau_of_unit: impl Fn(usize, usize) -> M, n: usize, b: usize) -> usize {
    let mut choi = M::zeros(n * b, n * b);
    for i in 0..n {
        for j in 0..n {
            choi.view_mut((i * b, j * b), (b, b)).copy_from(&tau_of_unit(i, j));
        }
    }
    let values = choi.symmetric_eigenvalues();
    let max = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    values.iter().filter(|v| **v > 1e-8 * max).count()
}

fn c2_minimal_dimension() -> Outcome {
    let mut mismatches = Vec::new();
    for seed in 0..100u64 {
        let n = 2 + (seed % 2) as usize;
        let b = 2 + ((seed / 3) % 2) as usize;
        let kraus = 1 + (seed % 4) as usize;
        let tau = random_cp_map(&mut rng_from_seed(1000 + seed), n, b, kraus, &tol()).unwrap();
        let rank = choi_rank(
            |i, j| {
                let mut e = M::zeros(n, n);
                e[(i, j)] = c(1.0, 0.0);
                tau.apply(&e).unwrap()
            },
            n,
            b,
        );
        let dim = gns_construct(&tau, &tol()).unwrap().dim();
        if dim != n * rank {
            mismatches.push(format!("seed {seed}: {dim} ≠ {n}·{rank}"));
        }
    }
    outcome(mismatches.is_empty(), format!("100 seeds, mismatches: {mismatches:?}"))
}

fn c3_decomposition() -> Outcome {
    let (mut recon, mut coiso) = (0.0_f64, 0.0_f64);
    for seed in 0..100u64 {
        let n = 1 + (seed % 2) as usize;
        let junk = (seed % 3) as usize;
        let t = random_tau_map(&mut rng_from_seed(2000 + seed), 2, 2, 1 + (seed % 3) as usize, n, junk, &tol()).unwrap();
        let dec = decompose_tau_map(&t, &tol()).unwrap();
        let s = dec.s();
        for (x, img) in t.source().basis().iter().zip(t.images()) {
            let rebuilt = s.adjoint() * dec.psi(x).unwrap() * dec.base().v();
            recon = recon.max(diff(&rebuilt, img));
        }
        coiso = coiso.max(diff(&(&s * s.adjoint()), &identity(s.nrows())));
    }
    outcome(
        recon <= 1e-8 && coiso <= 1e-9,
        format!("reconstruction {recon:.2e}, ‖SS* − 1‖ {coiso:.2e}"),
    )
}

fn covariant_instances() -> Vec<(GroupKind, u64, CovariantInstance)> {
    let mut out = Vec::new();
    for kind in GroupKind::ALL {
        for seed in 0..30u64 {
            let n = 1 + (seed % 2) as usize;
            let junk = (seed % 2) as usize;
            let inst = canonical_covariant(&mut rng_from_seed(3000 + seed), kind, n, 1 + (seed % 3) as usize, junk, &tol())
                .unwrap();
            out.push((kind, seed, inst));
        }
    }
    out
}

/// The four covariance identities, recomputed from the returned data, and
/// both integrated-form identities on the same instances.
fn c4_c6_covariant(instances: &[(GroupKind, u64, CovariantInstance)]) -> (Outcome, Outcome) {
    let start = Instant::now();
    let mut worst = [0.0_f64; 4];
    let mut integrated = [0.0_f64; 2];
    let mut lemma_time = Duration::ZERO;
    for (_, _, inst) in instances {
        let data = covariant_dilate(&inst.t, &inst.sys, &inst.u, &inst.u_prime, &tol()).unwrap();
        let base = data.base();
        let dec = data.decomposition();
        let s = dec.s();
        for g in inst.sys.group().elements() {
            let (vg, wg, ug) = (data.v().image(g), data.w().image(g), inst.u.image(g));
            let upg = inst.t.target().act(inst.u_prime.image(g)).unwrap();
            for a in base.domain().basis() {
                let moved = inst.sys.induced().apply(g, a).unwrap();
                worst[0] = worst[0].max(diff(&base.pi(&moved).unwrap(), &(vg * base.pi(a).unwrap() * vg.adjoint())));
            }
            worst[1] = worst[1].max(diff(&(vg * base.v()), &(base.v() * ug)));
            worst[2] = worst[2].max(diff(&(wg * &s), &(&s * &upg)));
            for x in inst.t.source().basis() {
                let lhs = dec.psi(&inst.sys.apply(g, x).unwrap()).unwrap();
                worst[3] = worst[3].max(diff(&lhs, &(wg * dec.psi(x).unwrap() * vg.adjoint())));
            }
        }

        let t0 = Instant::now();
        let module = Arc::new(build_crossed_module(&inst.sys, &tol()).unwrap());
        let form = integrated_form(&data, &module, &tol()).unwrap();
        let cp = module.algebra();
        let m_tuples: Vec<Tuple> = (0..module.dim()).map(|k| module.basis_tuple(k)).collect();
        let a_tuples: Vec<Tuple> = (0..cp.dim()).map(|k| cp.basis_tuple(k)).collect();
        for l in &m_tuples {
            let psi_l = form.psi(l).unwrap();
            for g in &a_tuples {
                let lhs = form.psi(&module.right_action(l, g).unwrap()).unwrap();
                integrated[0] = integrated[0].max(diff(&lhs, &(&psi_l * form.pi(g).unwrap())));
            }
            for m in &m_tuples {
                let lhs = form.psi(m).unwrap().adjoint() * &psi_l;
                integrated[1] = integrated[1].max(diff(&lhs, &form.pi(&module.inner(m, l).unwrap()).unwrap()));
            }
        }
        lemma_time += t0.elapsed();
    }
    let elapsed = start.elapsed() - lemma_time;
    let c4 = outcome(
        worst.iter().all(|r| *r <= 1e-8) && elapsed < Duration::from_secs(120),
        format!(
            "π-cov {:.2e}, vV=Vu {:.2e}, wS=Su′ {:.2e}, Ψ-cov {:.2e} over {} instances, {elapsed:.2?}",
            worst[0],
            worst[1],
            worst[2],
            worst[3],
            instances.len()
        ),
    );
    let c6 = outcome(
        integrated.iter().all(|r| *r <= 1e-8),
        format!("module law {:.2e}, inner-product law {:.2e}", integrated[0], integrated[1]),
    );
    (c4, c6)
}

/// Crossed algebra of `A` under `Ad ρ`, where `A` is `M₂` or `M₂ ⊕ M₂`.
fn crossed_for(kind: GroupKind, doubled: bool) -> CrossedProductAlgebra {
    let group = Arc::new(kind.group());
    let rho: Vec<M> = kind
        .rho_images()
        .into_iter()
        .map(|r| if doubled { direct_sum(&[&r, &r]) } else { r })
        .collect();
    let a = if doubled {
        let mut basis = Vec::new();
        for block in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let mut e = M::zeros(4, 4);
                    e[(2 * block + i, 2 * block + j)] = c(1.0, 0.0);
                    basis.push(e);
                }
            }
        }
        ConcreteCStarAlgebra::validate(4, basis, &tol()).unwrap().into_arc()
    } else {
        ConcreteCStarAlgebra::full(2).into_arc()
    };
    let u = UnitaryRep::new(group, rho.clone(), &tol()).unwrap();
    let action = AlgebraAction::inner(a, &u, &tol()).unwrap();
    build_crossed_algebra(&action, &tol()).unwrap()
}

fn tuple_residual(x: &[M], y: &[M]) -> f64 {
    x.iter().zip(y).map(|(a, b)| diff(a, b)).fold(0.0, f64::max)
}

fn c5_crossed_structure() -> Outcome {
    let (mut assoc, mut star) = (0.0_f64, 0.0_f64);
    let mut dims = Vec::new();
    let cases = [
        (GroupKind::Z2, false),
        (GroupKind::Z3, false),
        (GroupKind::S3, false),
        (GroupKind::S3, true),
    ];
    for (kind, doubled) in cases {
        let cp = crossed_for(kind, doubled);
        dims.push(cp.dim());
        let basis: Vec<Tuple> = (0..cp.dim()).map(|k| cp.basis_tuple(k)).collect();
        for f in &basis {
            let rep_star = cp.rep(&cp.involution(f).unwrap()).unwrap();
            star = star.max(diff(&rep_star, &cp.rep(f).unwrap().adjoint()));
            for g in &basis {
                let fg = cp.convolve(f, g).unwrap();
                for h in &basis {
                    let left = cp.convolve(&fg, h).unwrap();
                    let right = cp.convolve(f, &cp.convolve(g, h).unwrap()).unwrap();
                    assoc = assoc.max(tuple_residual(&left, &right));
                }
            }
        }
    }

    // crossed-module inner products against a direct double sum that
    // applies α as conjugation by ρ and reads the group table directly
    let mut inner = 0.0_f64;
    for kind in GroupKind::ALL {
        let inst = canonical_covariant(&mut rng_from_seed(77), kind, 2, 2, 0, &tol()).unwrap();
        let module = build_crossed_module(&inst.sys, &tol()).unwrap();
        let group = kind.group();
        let rho = kind.rho_images();
        let n = group.order();
        let mut rng = rng_from_seed(78);
        for _ in 0..5 {
            let l: Tuple = (0..n).map(|_| gaussian_matrix(&mut rng, 4, 2)).collect();
            let m: Tuple = (0..n).map(|_| gaussian_matrix(&mut rng, 4, 2)).collect();
            let got = module.inner(&l, &m).unwrap();
            for s in 0..n {
                let mut want = M::zeros(2, 2);
                for t in 0..n {
                    let ti = (0..n).find(|&r| group.mul(t, r) == 0).unwrap();
                    let ip = l[t].adjoint() * &m[group.mul(t, s)];
                    want += &rho[ti] * ip * rho[ti].adjoint();
                }
                inner = inner.max(diff(&got[s], &want));
            }
        }
    }
    outcome(
        assoc <= 1e-10 && star <= 1e-10 && inner <= 1e-12,
        format!("dims {dims:?}: associativity {assoc:.2e}, involution {star:.2e}, inner products {inner:.2e}"),
    )
}

fn c7_roundtrip() -> (Outcome, Outcome) {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    let mut failures = Vec::new();
    for kind in GroupKind::ALL {
        for seed in 0..30u64 {
            let n = 1 + (seed % 2) as usize;
            let inst = canonical_covariant(&mut rng_from_seed(4000 + seed), kind, n, 1 + (seed % 3) as usize, 0, &tol())
                .unwrap();
            let report = roundtrip_check(
                &RoundtripInstance::Covariant {
                    t: inst.t,
                    sys: inst.sys,
                    u: inst.u,
                    u_prime: inst.u_prime,
                },
                &tol(),
            );
            worst = worst.max(report.max_residual());
            if !report.passed() {
                failures.push(format!("{kind} seed {seed}"));
            }
        }
        for seed in 0..10u64 {
            let ct = direct_crossed(&mut rng_from_seed(5000 + seed), kind, &tol()).unwrap();
            let report = roundtrip_check(&RoundtripInstance::Crossed(ct), &tol());
            worst = worst.max(report.max_residual());
            if !report.passed() {
                failures.push(format!("{kind} crossed seed {seed}"));
            }
        }
    }
    let elapsed = start.elapsed();
    let main = outcome(
        worst <= 1e-8 && failures.is_empty() && elapsed < Duration::from_secs(300),
        format!("max residual {worst:.2e}, failures {failures:?}, {elapsed:.2?}"),
    );

    let start = Instant::now();
    let inst = canonical_covariant(&mut rng_from_seed(6000), GroupKind::S3, 3, 2, 1, &tol()).unwrap();
    let report = roundtrip_check(
        &RoundtripInstance::Covariant {
            t: inst.t,
            sys: inst.sys,
            u: inst.u,
            u_prime: inst.u_prime,
        },
        &tol(),
    );
    let elapsed = start.elapsed();
    let stress = outcome(
        report.passed() && report.max_residual() <= 1e-7 && elapsed < Duration::from_secs(10),
        format!("S₃, E = A³: max residual {:.2e}, {elapsed:.2?}", report.max_residual()),
    );
    (main, stress)
}

fn c8_negative_controls() -> Outcome {
    let start = Instant::now();
    let report = verify_cp(&transpose_map(2).unwrap(), &tol()).unwrap();
    let transpose_min = report.min_eigenvalue;
    let transpose_ok = !report.is_cp && transpose_min < -0.5;
    let transpose_time = start.elapsed();

    let start = Instant::now();
    let inst = canonical_covariant(&mut rng_from_seed(8), GroupKind::Z2, 1, 2, 0, &tol()).unwrap();
    let bad = sign_corrupted(&inst.u);
    let report = verify_covariant_tau_map(&inst.t, &inst.sys, &bad, &inst.u_prime, &tol()).unwrap();
    let failed = report.first_failure().cloned();
    let corrupted_time = start.elapsed();
    let witness = failed.as_ref().and_then(|c| c.witness.clone()).unwrap_or_default();
    let localized = witness.starts_with("t = 1");
    outcome(
        transpose_ok
            && localized
            && transpose_time < Duration::from_secs(1)
            && corrupted_time < Duration::from_secs(1),
        format!(
            "transpose min eigenvalue {transpose_min:.2e} ({transpose_time:.2?}); corrupted u caught at [{witness}] ({corrupted_time:.2?})"
        ),
    )
}

fn main() {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("1 Stinespring reconstruction", c1_reconstruction()));
    results.push(("2 minimal dilation dimension", c2_minimal_dimension()));
    results.push(("3 τ-map decomposition", c3_decomposition()));
    let instances = covariant_instances();
    let (c4, c6) = c4_c6_covariant(&instances);
    results.push(("4 covariant dilation", c4));
    results.push(("5 crossed-product structure", c5_crossed_structure()));
    results.push(("6 integrated forms", c6));
    let (c7, stress) = c7_roundtrip();
    results.push(("7 round trip", c7));
    results.push(("7 round trip, S₃ stress", stress));
    results.push(("8 negative controls", c8_negative_controls()));

    let mut all = true;
    for (name, o) in &results {
        println!("criterion {name}: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        all &= o.pass;
    }
    if !all {
        std::process::exit(1);
    }
}
