use alphats_cli::commands::{cmd_ablate_alpha, cmd_ablate_prior, cmd_run, cmd_validate, RunOptions, ValidateCommand};
use alphats_cli::CliError;
use alphats_core::diagnostics::Fault;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

/// Bandit experiments with symmetric alpha-stable rewards.
#[derive(Parser)]
#[command(name = "alphats", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured policy on paired replications.
    Run(ExperimentArgs),
    /// Repeat the run for each tail index in `[ablate_alpha]`.
    AblateAlpha(ExperimentArgs),
    /// Repeat the run for each prior width in `[ablate_prior]`.
    AblatePrior(ExperimentArgs),
    /// Check the sampler against closed forms and goodness-of-fit tests.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML config, or a manifest.json from an earlier run.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the master seed of the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the number of replications.
    #[arg(long)]
    reps: Option<usize>,
    /// Worker threads for replications (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    DoubleSigma,
}

#[derive(Args)]
struct ValidateArgs {
    /// Comma-separated tail indices in (1, 2].
    #[arg(long, value_delimiter = ',', default_values_t = [1.3, 1.5, 1.8, 2.0])]
    alphas: Vec<f64>,
    /// Draws per sample.
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
    /// Deliberately break the sampler to confirm the checks notice.
    #[arg(long, value_enum)]
    inject_fault: Option<FaultArg>,
    /// Directory for validation.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl From<ExperimentArgs> for RunOptions {
    fn from(a: ExperimentArgs) -> Self {
        RunOptions {
            config: a.config,
            out: a.out,
            seed: a.seed,
            reps: a.reps,
            threads: a.threads,
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run(a) => cmd_run(&a.into()).map(|_| ()),
        Command::AblateAlpha(a) => cmd_ablate_alpha(&a.into()).map(|_| ()),
        Command::AblatePrior(a) => cmd_ablate_prior(&a.into()).map(|_| ()),
        Command::Validate(a) => cmd_validate(&ValidateCommand {
            alphas: a.alphas,
            n: a.n,
            seed: a.seed,
            fault: a.inject_fault.map(|f| match f {
                FaultArg::DoubleSigma => Fault::DoubleSigma,
            }),
            out: a.out,
        })
        .map(|_| ()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("alphats: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
