use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use iqc_cli::commands::{self, Overrides, Session};
use iqc_cli::config::{BackendKind, ExperimentConfig};
use iqc_cli::CliError;
use iqc_core::lmi::AnalysisMode;

#[derive(Parser)]
#[command(name = "iqc", version, about = "Amplitude bounds for Lur'e loops with convex nonlinearities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute gamma* on the configured grid and write results.csv
    Analyze(Common),
    /// Like analyze, plus plot.csv and plot.svg; defaults to the full benchmark grid
    Sweep(Common),
    /// Run property suites and write verify.json
    Verify {
        /// Suites to run (all when omitted)
        suites: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Simulate the loop from the [simulate] table and write trajectory.csv
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Check sup_t |C_e x_t| <= gamma |x_0| along the trajectory
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Write the analysis LMIs of every grid point in text form
    DumpLmi(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: logical cores)
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, value_enum)]
    solver: Option<SolverArg>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Embedded,
    External,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Terminal,
    Hard,
    Static,
}

impl Common {
    fn session(self, fallback: Option<ExperimentConfig>) -> Result<Session, CliError> {
        let config = match (&self.config, fallback) {
            (Some(path), _) => ExperimentConfig::load(path)?,
            (None, Some(cfg)) => cfg,
            (None, None) => return Err(CliError::Config("--config is required".into())),
        };
        let overrides = Overrides {
            out: self.out,
            seed: self.seed,
            jobs: self.jobs,
            solver: self.solver.map(|s| match s {
                SolverArg::Embedded => BackendKind::Embedded,
                SolverArg::External => BackendKind::External,
            }),
            mode: self.mode.map(|m| match m {
                ModeArg::Terminal => AnalysisMode::TerminalCost,
                ModeArg::Hard => AnalysisMode::Hard,
                ModeArg::Static => AnalysisMode::Static,
            }),
        };
        Session::new(config, overrides)
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Analyze(c) => {
            let s = c.session(None)?;
            let svg = s.config.output.svg;
            commands::analyze(&s, svg, svg)
        }
        Command::Sweep(c) => {
            let explicit = c.config.is_some();
            let s = c.session(Some(ExperimentConfig::full_sweep()))?;
            let svg = !explicit || s.config.output.svg;
            commands::analyze(&s, true, svg)
        }
        Command::Verify { suites, seed, out } => commands::verify(&suites, seed, &out),
        Command::Simulate { common, gamma } => commands::simulate(&common.session(None)?, gamma),
        Command::DumpLmi(c) => commands::dump_lmi(&c.session(None)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
