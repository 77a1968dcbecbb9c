use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mms_core::calibration::{self, Family as Lemma};
use mms_core::gen::{self, Family};
use mms_core::oracle::DEFAULT_ORACLE_LIMIT;
use mms_core::pipeline::{self, RunConfig};
use mms_core::verify::verify_allocation_with_limit;
use mms_core::{rational, Allocation, Error, Instance, Rational, Result};

#[derive(Parser)]
#[command(name = "mms", version, about = "Approximate maximin-share allocation with exact rationals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance.
    Gen {
        /// uniform, clustered, paper-example-1 or paper-example-2
        #[arg(long, default_value = "uniform")]
        family: String,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 12)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute an allocation.
    Run {
        instance: PathBuf,
        #[arg(long, default_value = "10/13", value_parser = parse_rational)]
        alpha: Rational,
        #[arg(long, default_value_t = DEFAULT_ORACLE_LIMIT)]
        oracle_limit: usize,
        /// Allocation output (stdout if absent).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Check an allocation against the exact shares.
    Verify {
        instance: PathBuf,
        allocation: PathBuf,
        #[arg(long, default_value = "10/13", value_parser = parse_rational)]
        alpha: Rational,
        #[arg(long, default_value_t = DEFAULT_ORACLE_LIMIT)]
        oracle_limit: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep one calibrated share bound over random instances.
    LemmaCheck {
        /// F, H, W or Z
        #[arg(long)]
        lemma: String,
        #[arg(long, default_value_t = 300)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "10/13", value_parser = parse_rational)]
        alpha: Rational,
        #[arg(long, default_value_t = DEFAULT_ORACLE_LIMIT)]
        oracle_limit: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_rational(s: &str) -> std::result::Result<Rational, String> {
    rational::parse(s).map_err(|e| e.to_string())
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, format!("{text}\n"))?,
        None => println!("{text}"),
    }
    Ok(())
}

/// Ok(true) means the command's check passed.
fn execute(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Gen {
            family,
            n,
            m,
            seed,
            out,
        } => {
            let family: Family = family.parse()?;
            let inst = gen::generate(family, n, m, seed)?;
            emit(&inst.to_json()?, out.as_deref())?;
            Ok(true)
        }
        Command::Run {
            instance,
            alpha,
            oracle_limit,
            out,
            trace,
        } => {
            let inst = Instance::load(&instance)?;
            let cfg = RunConfig {
                alpha,
                oracle_limit,
            };
            let result = pipeline::run(&inst, &cfg)?;
            if let Some(p) = trace {
                emit(&result.trace.to_json()?, Some(&p))?;
            }
            emit(&result.allocation.to_json()?, out.as_deref())?;
            Ok(true)
        }
        Command::Verify {
            instance,
            allocation,
            alpha,
            oracle_limit,
            out,
        } => {
            let inst = Instance::load(&instance)?;
            let alloc = Allocation::load(&allocation)?;
            let report = verify_allocation_with_limit(&inst, &alloc, &alpha, oracle_limit)?;
            emit(&report.to_json()?, out.as_deref())?;
            Ok(report.pass)
        }
        Command::LemmaCheck {
            lemma,
            trials,
            seed,
            alpha,
            oracle_limit,
            out,
        } => {
            let lemma: Lemma = lemma.parse()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let report = calibration::lemma_sweep(lemma, &alpha, trials, oracle_limit, &mut rng)?;
            emit(&serde_json::to_string_pretty(&report)?, out.as_deref())?;
            Ok(report.violations.is_empty())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_status(&e))
        }
    }
}

fn exit_status(e: &Error) -> u8 {
    e.exit_code() as u8
}
