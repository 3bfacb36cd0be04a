use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use qslab::config::{Experiment, ExperimentConfig};
use qslab::{experiments, selftest};

#[derive(Parser)]
#[command(name = "qslab", version, about = "Cellular automata on quasisturmian partitions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Directory for report.json and series.csv.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Bits for reported certified intervals.
    #[arg(long)]
    precision: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    Chopping(RunArgs),
    Rigidity(RunArgs),
    Expansiveness(RunArgs),
    Nonrandomization(RunArgs),
    Suites(RunArgs),
    /// Run the acceptance criteria.
    Selftest,
}

fn run(kind: Experiment, args: RunArgs) -> Result<bool> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(k) = cfg.experiment {
        anyhow::ensure!(k == kind, "config is for {}, not {}", k.name(), kind.name());
    }
    cfg.experiment = Some(kind);
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    if args.precision.is_some() {
        cfg.precision = args.precision;
    }
    let rep = experiments::run(&cfg)?;
    rep.write(&args.out)?;
    for a in &rep.assertions {
        println!("[{}] {}: {}", if a.passed { "PASS" } else { "FAIL" }, a.name, a.detail);
    }
    if rep.inconclusive {
        println!("inconclusive within budget");
    }
    println!("wrote {}", args.out.display());
    Ok(rep.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Chopping(a) => run(Experiment::Chopping, a),
        Command::Rigidity(a) => run(Experiment::Rigidity, a),
        Command::Expansiveness(a) => run(Experiment::Expansiveness, a),
        Command::Nonrandomization(a) => run(Experiment::Nonrandomization, a),
        Command::Suites(a) => run(Experiment::Suites, a),
        Command::Selftest => {
            let mut ok = true;
            for f in selftest::all() {
                let r = f();
                println!("{}", r.line());
                ok &= r.passed;
            }
            Ok(ok)
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
