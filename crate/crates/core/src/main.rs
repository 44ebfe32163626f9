use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use sepfaces::herm::TolPolicy;
use sepfaces::multilinear::SystemShape;
use sepfaces::report::{render, run, Command, Format, RunConfig};
use sepfaces::witness::BParam;

#[derive(Parser)]
#[command(name = "sepfaces", version, about = "Faces, witnesses and boundary states of the separable set")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Sampled face and subspace dimensions against closed forms
    Faces,
    /// Witness W_b checks, one value of b or the whole grid
    Witness,
    /// Named PPT states and boundary states built from the witness simplex
    Catalog,
    /// Product vectors in random generic subspaces of 2⊗m
    Enumerate,
    /// Random search on the cyclic inequality
    Cyclic,
}

#[derive(ValueEnum, Clone, Copy)]
enum FormatArg {
    Json,
    Csv,
    Md,
}

#[derive(clap::Args)]
struct Common {
    /// Shape such as 2x3 or 2x2x2; repeat for several
    #[arg(long, global = true)]
    shape: Vec<SystemShape>,

    /// Witness parameter b ≥ 0, or "inf"
    #[arg(long, global = true)]
    b: Option<BParam>,

    /// Run the witness checks over the 50-point b grid
    #[arg(long, global = true)]
    grid: bool,

    #[arg(long, global = true, env = "SEPFACES_SEED", default_value_t = 0)]
    seed: u64,

    #[arg(long, global = true)]
    samples: Option<usize>,

    #[arg(long, global = true)]
    starts: Option<usize>,

    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Relative rank tolerance
    #[arg(long, global = true, default_value_t = TolPolicy::default().rank_rtol)]
    tol: f64,

    #[arg(long, global = true, value_enum, default_value = "json")]
    format: FormatArg,

    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let command = match cli.command {
        Cmd::Faces => Command::Faces,
        Cmd::Witness => Command::Witness,
        Cmd::Catalog => Command::Catalog,
        Cmd::Enumerate => Command::Enumerate,
        Cmd::Cyclic => Command::Cyclic,
    };
    let c = cli.common;
    let format = match c.format {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
        FormatArg::Md => Format::Md,
    };
    let config = RunConfig {
        command,
        shapes: c.shape,
        b: c.b,
        grid: c.grid,
        seed: c.seed,
        samples: c.samples,
        starts: c.starts,
        trials: c.trials,
        tol: TolPolicy {
            rank_rtol: c.tol,
            ..TolPolicy::default()
        },
        format,
        out: c.out,
    };

    let report = match run(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let text = render(&report, format);
    match &config.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        for f in &report.failures {
            eprintln!("failed: {f}");
        }
        ExitCode::from(1)
    }
}
