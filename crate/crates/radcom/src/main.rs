use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use radcom::cli::{self, CommonArgs, EvalArgs, SweepArgs};

#[derive(Parser)]
#[command(
    name = "radcom",
    about = "Joint radar-communication precoder optimization and trade-off sweeps",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonCliArgs {
    /// Path to the JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Dotted-path overrides, e.g. --set system.reg_lambda=1e-2 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Cap on concurrent realizations.
    #[arg(long)]
    jobs: Option<usize>,
    /// Dump failing conic problem instances as JSON for offline replay.
    #[arg(long)]
    dump_conic_failures: bool,
}

impl CommonCliArgs {
    fn into_common(self) -> CommonArgs {
        CommonArgs {
            config_path: self.config,
            overrides: self.set,
            out_dir: self.out,
            seed: self.seed,
            jobs: self.jobs,
            dump_conic_failures: self.dump_conic_failures,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Optimize one channel realization and write precoder, beampattern
    /// and residual CSVs.
    Run {
        #[command(flatten)]
        common: CommonCliArgs,
    },
    /// Run the trade-off sweep over regularization weights and modes.
    Sweep {
        #[command(flatten)]
        common: CommonCliArgs,
        /// Comma-separated mode tokens (rsma, sdma, rsma_perfect, ...).
        #[arg(long)]
        modes: Option<String>,
        /// Number of channel realizations.
        #[arg(long)]
        realizations: Option<usize>,
        /// Comma-separated regularization weights.
        #[arg(long)]
        lambdas: Option<String>,
    },
    /// Re-evaluate a stored precoder CSV against the configured scenario.
    Eval {
        #[command(flatten)]
        common: CommonCliArgs,
        /// Path to a precoder CSV produced by `run`.
        #[arg(long)]
        precoder: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { common } => cli::cmd_run(&common.into_common()),
        Command::Sweep {
            common,
            modes,
            realizations,
            lambdas,
        } => cli::cmd_sweep(&SweepArgs {
            common: common.into_common(),
            modes,
            realizations,
            lambdas,
        }),
        Command::Eval { common, precoder } => cli::cmd_eval(&EvalArgs {
            common: common.into_common(),
            precoder_path: precoder,
        }),
    };
    ExitCode::from(code as u8)
}
