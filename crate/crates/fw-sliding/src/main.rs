//! Command-line interface: single runs, benchmark suites, the fixed demo
//! trajectory, and randomized oracle checks.
//!
//! Exit codes: 0 on success (for `run`, a certified solve), 2 when a run hits
//! an iteration or time cap or a suite has failing rows/comparisons, 1 on
//! configuration or runtime errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fw_sliding::harness::{self, RunConfig, SuiteConfig};
use fw_sliding::instances::Family;
use fw_sliding::Termination;

#[derive(Parser)]
#[command(
    name = "fw-sliding",
    version,
    about = "Projection-free convex optimization: conditional gradient sliding with linesearch, plus baselines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one configured run; writes its trace CSV and summary JSON.
    Run {
        /// Path to a run config (JSON).
        config: PathBuf,
    },
    /// Execute a suite of runs; writes an aggregate CSV and a report JSON.
    Bench {
        /// Path to a suite config (JSON).
        suite: PathBuf,
        /// Number of runs to execute concurrently (each run stays sequential).
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
    /// Print the fixed three-step trajectory of the classical method on the
    /// 2-simplex and check it against hand-computed values.
    DemoSegment,
    /// Check a linear-minimization oracle against brute-force enumeration on
    /// randomized inputs.
    LmoCheck {
        family: FamilyArg,
        /// Problem size (matrix order or cycle length; must stay within the
        /// brute-force range for the family).
        size: usize,
        /// Number of randomized trials.
        trials: u64,
        /// RNG seed for the trial inputs.
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    Simplex,
    Spectrahedron,
    Hamiltonian,
}

impl From<FamilyArg> for Family {
    fn from(arg: FamilyArg) -> Self {
        match arg {
            FamilyArg::Simplex => Family::Simplex,
            FamilyArg::Spectrahedron => Family::Spectrahedron,
            FamilyArg::Hamiltonian => Family::Hamiltonian,
        }
    }
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn cli_run(config_path: &Path) -> ExitCode {
    let outcome = load_json::<RunConfig>(config_path)
        .and_then(|cfg| harness::execute_run(&cfg).map_err(|e| e.to_string()));
    match outcome {
        Ok(artifacts) => {
            let s = &artifacts.summary;
            println!("termination: {:?}", s.termination);
            println!("outer_iters: {}", s.outer_iters);
            println!("inner_lmo: {}", s.inner_lmo);
            println!("grad_evals: {}", s.grad_evals);
            println!("backtracks: {}", s.backtracks);
            println!("f_final: {}", s.f_final);
            match (s.cert_gap, s.wolfe_gap) {
                (Some(g), _) => println!("cert_gap: {g}"),
                (None, Some(g)) => println!("wolfe_gap: {g}"),
                (None, None) => {}
            }
            println!("elapsed_seconds: {:.6}", s.elapsed_seconds);
            let failed: Vec<&str> = s
                .bound_checks
                .iter()
                .filter(|(_, c)| !c.pass)
                .map(|(n, _)| n.as_str())
                .collect();
            if !failed.is_empty() {
                eprintln!("bound checks failed: {}", failed.join(", "));
            }
            match s.termination {
                Termination::Certified => ExitCode::SUCCESS,
                Termination::MaxOuter | Termination::MaxTime => ExitCode::from(2),
            }
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn cli_bench(suite_path: &Path, parallel: usize) -> ExitCode {
    let suite: SuiteConfig = match load_json(suite_path) {
        Ok(s) => s,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    match harness::run_suite(&suite, parallel) {
        Ok(outcome) => {
            for run in &outcome.report.runs {
                match (&run.error, run.termination) {
                    (Some(err), _) => println!("run {}: error: {err}", run.index),
                    (None, term) => {
                        let inst = run
                            .instance
                            .as_ref()
                            .expect("successful runs echo their instance");
                        println!(
                            "run {}: {:?} {:?} m={} n={} -> {:?}",
                            run.index,
                            run.algorithm.expect("successful runs echo their algorithm"),
                            inst.family,
                            inst.m,
                            inst.n,
                            term.expect("successful runs record a termination")
                        )
                    }
                }
            }
            for cmp in &outcome.report.comparisons {
                println!(
                    "comparison '{}' on {:?} m={} n={}: {} vs {} -> {}",
                    cmp.name,
                    cmp.instance.family,
                    cmp.instance.m,
                    cmp.instance.n,
                    cmp.lhs_value,
                    cmp.rhs_value,
                    if cmp.pass { "pass" } else { "FAIL" }
                );
            }
            if outcome.report.all_passed {
                println!("suite: all runs and comparisons passed");
                ExitCode::SUCCESS
            } else {
                println!("suite: failures recorded (see report)");
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(
        env_logger::Env::new().filter_or("FW_SLIDING_LOG", "error"),
    )
    .init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => cli_run(&config),
        Command::Bench { suite, parallel } => cli_bench(&suite, parallel),
        Command::DemoSegment => match harness::demo_segment() {
            Ok(()) => ExitCode::SUCCESS,
            Err(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
        },
        Command::LmoCheck { family, size, trials, seed } => {
            match harness::lmo_check(family.into(), size, trials, seed) {
                Ok(()) => {
                    println!("lmo-check: {trials} trials passed");
                    ExitCode::SUCCESS
                }
                Err(msg) => {
                    eprintln!("error: {msg}");
                    ExitCode::from(1)
                }
            }
        }
    }
}
