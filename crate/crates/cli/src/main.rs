use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nematic_core::io::run::resolve_out_dir;
use nematic_core::io::{run, RunOptions, Suite, Verb};

/// Environment variable that overrides `output.dir`.
const OUT_DIR_VAR: &str = "NEMATIC_OUT_DIR";

#[derive(Parser)]
#[command(name = "nematic", version, about = "Mild-solution iteration, certificate and diagnostics for the simplified liquid-crystal flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Picard iteration and write summary.csv and trace.json.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Overrides data.seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate the smallness conditions and write certificate.json.
    Certify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run one diagnostics suite.
    Diagnose {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Phi,
    Smoothing,
    Scaling,
    Maxprinciple,
    Sqrt,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Suite {
        match s {
            SuiteArg::Phi => Suite::Phi,
            SuiteArg::Smoothing => Suite::Smoothing,
            SuiteArg::Scaling => Suite::Scaling,
            SuiteArg::Maxprinciple => Suite::MaxPrinciple,
            SuiteArg::Sqrt => Suite::Sqrt,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (verb, path, seed) = match cli.command {
        Command::Solve { config, seed } => (Verb::Solve, config, seed),
        Command::Certify { config } => (Verb::Certify, config, None),
        Command::Diagnose { suite, config } => (Verb::Diagnose(suite.into()), config, None),
    };
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", path.display());
            return ExitCode::from(2);
        }
    };
    let env = std::env::var(OUT_DIR_VAR).ok();
    let options = RunOptions { seed, out_dir: resolve_out_dir(env.as_deref()) };
    let outcome = run(verb, &text, &options);
    for m in &outcome.messages {
        eprintln!("{m}");
    }
    for f in &outcome.files {
        println!("{}", f.display());
    }
    ExitCode::from(outcome.code as u8)
}
