//! Every generated instance must pass `validate` and the verification for its kind.

use taudilate_cli::certificate::Verdict;
use taudilate_cli::commands::{self, Outcome, Overrides};
use taudilate_cli::generate::{generate, Kind, Params};
use taudilate_core::instances::GroupKind;
use taudilate_core::Tolerance;

const SEEDS: u64 = 100;

fn assert_pass((cert, failure): Outcome, context: &str) {
    assert_eq!(cert.verdict, Verdict::Pass, "{context}: {}", cert.summary());
    assert!(failure.is_none(), "{context}");
}

fn sweep(kind: Kind, params: impl Fn(u64) -> Params, verify: impl Fn(&str) -> Outcome) {
    let tol = Tolerance::default();
    let ov = Overrides::default();
    for seed in 0..SEEDS {
        let p = params(seed);
        let text = generate(kind, &p, &tol).unwrap_or_else(|f| panic!("seed {seed}: {}", f.message())).to_json();
        let context = format!("{kind:?} seed {seed}");
        assert_pass(commands::validate(&text, ov), &context);
        assert_pass(verify(&text), &context);
    }
}

fn group_for(seed: u64) -> GroupKind {
    GroupKind::ALL[(seed % 3) as usize]
}

#[test]
fn cp_generator_is_sound() {
    sweep(
        Kind::Cp,
        |seed| Params {
            seed,
            dim_a: 2 + (seed % 2) as usize,
            dim_b: 2 + (seed / 2 % 2) as usize,
            kraus: 1 + (seed % 3) as usize,
            ..Params::default()
        },
        |text| commands::dilate(text, "tau", Overrides::default()),
    );
}

#[test]
fn tau_generator_is_sound() {
    sweep(
        Kind::Tau,
        |seed| Params {
            seed,
            n: 1 + (seed % 2) as usize,
            junk: (seed / 2 % 2) as usize,
            ..Params::default()
        },
        |text| commands::dilate(text, "T", Overrides::default()),
    );
}

#[test]
fn covariant_generator_is_sound() {
    sweep(
        Kind::Covariant,
        |seed| Params {
            seed,
            group: group_for(seed),
            n: 1 + (seed / 3 % 2) as usize,
            ..Params::default()
        },
        |text| commands::covariant(text, "instance", Overrides::default()),
    );
}

#[test]
fn crossed_generator_is_sound() {
    sweep(
        Kind::Crossed,
        |seed| Params {
            seed,
            group: group_for(seed),
            ..Params::default()
        },
        |text| commands::roundtrip(text, "instance", Overrides::default()),
    );
}

#[test]
fn generation_depends_only_on_the_seed() {
    let tol = Tolerance::default();
    for kind in [Kind::Cp, Kind::Tau, Kind::Covariant, Kind::Crossed] {
        let p = Params { seed: 7, ..Params::default() };
        let a = generate(kind, &p, &tol).unwrap().to_json();
        let b = generate(kind, &p, &tol).unwrap().to_json();
        assert_eq!(a, b, "{kind:?}");
    }
}

#[test]
fn zero_sizes_are_rejected() {
    let p = Params { n: 0, ..Params::default() };
    let err = generate(Kind::Tau, &p, &Tolerance::default()).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}
