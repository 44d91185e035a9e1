use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lwr_junction::scenario::{run_comparison, run_scenario, run_table1, ScenarioConfig, Scheme};
use lwr_junction::table1::Variant;
use lwr_junction::validation::{run_suite, Suite};
use lwr_junction::Error;

#[derive(Parser)]
#[command(name = "lwr-junction", version, about = "LWR junction solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One-shot generalized Riemann problem with the scenario's constant data.
    Solve {
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = OneShot::Riemann)]
        method: OneShot,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time-dependent run on the truncated roads.
    Simulate {
        config: PathBuf,
        /// Overrides `solver.scheme`.
        #[arg(long, value_enum)]
        scheme: Option<Evolution>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// BGK models for every `solver.epsilons` against one Godunov run.
    Compare {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded property suite.
    Validate {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reference two-in, two-out junction in both entropy variants.
    Table1 {
        #[arg(long, default_value = "out/table1")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OneShot {
    Riemann,
    EntropyOpt,
}

#[derive(Clone, Copy, ValueEnum)]
enum Evolution {
    Godunov,
    Bgk,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Contraction,
    Conservation,
    Germ,
    Equivalence,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Contraction => Suite::Contraction,
            SuiteArg::Conservation => Suite::Conservation,
            SuiteArg::Germ => Suite::Germ,
            SuiteArg::Equivalence => Suite::Equivalence,
        }
    }
}

enum Failure {
    Lib(Error),
    Suite,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn out_dir(config: &ScenarioConfig, out: Option<PathBuf>) -> PathBuf {
    out.or_else(|| config.output.dir.clone()).unwrap_or_else(|| PathBuf::from("out"))
}

fn load(path: &Path) -> Result<ScenarioConfig, Error> {
    let config = ScenarioConfig::from_path(path)?;
    for w in config.validate()? {
        eprintln!("warning: {w}");
    }
    Ok(config)
}

fn print_traces(run: &lwr_junction::scenario::RunSummary) {
    println!("{:>8} {:>22} {:>22} {:>22}", "road", "rho_trace", "flux_trace", "hat_rho");
    for (id, rho, flux, hat) in &run.traces {
        println!("{id:>8} {rho:>22.16e} {flux:>22.16e} {hat:>22.16e}");
    }
    println!("artifacts in {}", run.dir.display());
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve { config, method, out } => {
            let mut config = load(&config)?;
            config.solver.scheme = match method {
                OneShot::Riemann => Scheme::Riemann,
                OneShot::EntropyOpt => Scheme::EntropyOpt,
            };
            let dir = out_dir(&config, out);
            print_traces(&run_scenario(&config, &dir)?);
        }
        Command::Simulate { config, scheme, out } => {
            let mut config = load(&config)?;
            match scheme {
                Some(Evolution::Godunov) => config.solver.scheme = Scheme::Godunov,
                Some(Evolution::Bgk) => config.solver.scheme = Scheme::Bgk,
                None if matches!(config.solver.scheme, Scheme::Godunov | Scheme::Bgk) => {}
                None => {
                    return Err(Error::config("solver.scheme", "simulate needs `godunov` or `bgk` (or pass --scheme)").into())
                }
            }
            let dir = out_dir(&config, out);
            let run = run_scenario(&config, &dir)?;
            let r = &run.report["results"];
            println!(
                "{} steps, max mass drift {:.3e}, max balance residual {:.3e}",
                r["steps"], r["max_mass_drift"].as_f64().unwrap_or(f64::NAN), r["max_balance_residual"].as_f64().unwrap_or(f64::NAN)
            );
            print_traces(&run);
        }
        Command::Compare { config, out } => {
            let config = load(&config)?;
            let dir = out_dir(&config, out);
            let c = run_comparison(&config, &dir)?;
            println!("{:>10} {:>22}", "epsilon", "l1_distance");
            for d in &c.distances {
                println!("{:>10.1e} {:>22.16e}", d.epsilon, d.distance);
            }
            println!("godunov dx vs dx/2: {:.16e}", c.refinement);
            println!("strictly decreasing: {}", c.strictly_decreasing);
            println!("report in {}", dir.join("compare.json").display());
        }
        Command::Validate { suite, samples, seed, out } => {
            let report = run_suite(suite.into(), samples, seed)?;
            for c in &report.checks {
                println!(
                    "{} {:<40} value {:>12.4e}  tolerance {:.1e}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.tolerance
                );
            }
            if let Some(path) = out {
                let text = serde_json::to_string_pretty(&report).expect("reports serialize");
                std::fs::write(&path, text + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            }
            if !report.passed() {
                return Err(Failure::Suite);
            }
        }
        Command::Table1 { out } => {
            let runs = run_table1(&out)?;
            let (common, neg) = (&runs[0].1, &runs[1].1);
            println!("{:>5} | {:^26} | {:^26}", "", Variant::Common.name(), Variant::NegFlux.name());
            println!(
                "{:>5} | {:>8} {:>8} {:>8} | {:>8} {:>8} {:>8}",
                "road", "rho", "flux", "hat", "rho", "flux", "hat"
            );
            for (a, b) in common.traces.iter().zip(&neg.traces) {
                println!(
                    "{:>5} | {:>8.5} {:>8.5} {:>8.5} | {:>8.5} {:>8.5} {:>8.5}",
                    a.0, a.1, a.2, a.3, b.1, b.2, b.3
                );
            }
            println!("artifacts in {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Suite) => ExitCode::from(1),
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Numerical(_) => 3,
                Error::Io(_) => 1,
                _ => 2,
            })
        }
    }
}
