use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use taudilate_cli::certificate::Certificate;
use taudilate_cli::commands::{self, Outcome, Overrides};
use taudilate_cli::generate::{generate, Kind, Params};
use taudilate_cli::load::{effective_tolerance, Failure};
use taudilate_core::instances::GroupKind;

/// Verify Stinespring-type dilations of CP maps and τ-maps described in
/// JSON problem files.
#[derive(Debug, Parser)]
#[command(name = "taudilate", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Absolute part of every equality check.
    #[arg(long, global = true, value_name = "FLOAT")]
    tol: Option<f64>,
    /// Relative Gram-eigenvalue cutoff for numerical rank.
    #[arg(long, global = true, value_name = "FLOAT")]
    gram_cutoff: Option<f64>,
    /// Seed for `generate`.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the certificate (or generated file) here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Suppress the human-readable summary on stderr.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load and validate every object in a problem file.
    Validate { file: PathBuf },
    /// Stinespring dilation of a named CP map or τ-map.
    Dilate { file: PathBuf, map: String },
    /// Covariance checks and covariant dilation of a named instance.
    Covariant { file: PathBuf, instance: String },
    /// Lift/restrict round trip through the crossed product.
    Roundtrip { file: PathBuf, instance: String },
    /// Emit a random instance that passes its own verification.
    Generate {
        #[arg(value_enum)]
        kind: Kind,
        #[arg(long, default_value = "z2")]
        group: GroupKind,
        /// Rank of the free module `Aⁿ`.
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Number of Kraus operators.
        #[arg(long, default_value_t = 2)]
        kraus: usize,
        #[arg(long, default_value_t = 2)]
        dim_a: usize,
        #[arg(long, default_value_t = 2)]
        dim_b: usize,
        /// Extra zero rows in the target module.
        #[arg(long, default_value_t = 0)]
        junk: usize,
        /// Use the identity map instead of a random one (`cp`, `tau`).
        #[arg(long)]
        identity: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = &cli.common;
    let overrides = Overrides {
        abs_eps: common.tol,
        gram_cutoff: common.gram_cutoff,
    };
    let code = match &cli.command {
        Command::Validate { file } => run(common, file, |text| commands::validate(text, overrides)),
        Command::Dilate { file, map } => run(common, file, |text| commands::dilate(text, map, overrides)),
        Command::Covariant { file, instance } => run(common, file, |text| commands::covariant(text, instance, overrides)),
        Command::Roundtrip { file, instance } => run(common, file, |text| commands::roundtrip(text, instance, overrides)),
        Command::Generate {
            kind,
            group,
            n,
            kraus,
            dim_a,
            dim_b,
            junk,
            identity,
        } => {
            let params = Params {
                seed: common.seed,
                group: *group,
                n: *n,
                kraus: *kraus,
                dim_a: *dim_a,
                dim_b: *dim_b,
                junk: *junk,
                identity: *identity,
            };
            run_generate(common, *kind, &params, overrides)
        }
    };
    ExitCode::from(code as u8)
}

fn run(common: &Common, path: &Path, command: impl FnOnce(&str) -> Outcome) -> i32 {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return 2;
        }
    };
    let (cert, failure): (Certificate, Option<Failure>) = command(&text);
    if !common.quiet {
        eprint!("{}", cert.summary());
    }
    if let Err(code) = emit(common.out.as_deref(), &cert.to_json()) {
        return code;
    }
    cert.exit_code(failure.as_ref())
}

fn run_generate(common: &Common, kind: Kind, params: &Params, overrides: Overrides) -> i32 {
    let generated = effective_tolerance(None, overrides.abs_eps, overrides.gram_cutoff)
        .and_then(|tol| generate(kind, params, &tol));
    match generated {
        Ok(file) => {
            if !common.quiet {
                eprintln!("generated {kind:?} instance from seed {}", params.seed);
            }
            emit(common.out.as_deref(), &file.to_json()).err().unwrap_or(0)
        }
        Err(f) => {
            eprintln!("error ({}): {}", f.class(), f.message());
            f.exit_code()
        }
    }
}

fn emit(out: Option<&Path>, json: &str) -> Result<(), i32> {
    match out {
        Some(path) => std::fs::write(path, format!("{json}\n")).map_err(|e| {
            eprintln!("error: cannot write {}: {e}", path.display());
            2
        }),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}
