use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dde_lambert_cli::commands::{self, Window};
use dde_lambert_cli::config::{Model, ModelConfig};
use dde_lambert_cli::CliError;

/// Spectral (Lambert W) solutions of linear delay differential equations.
#[derive(Parser, Debug)]
#[command(name = "dde-lambert", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Model description (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Branch depth K, overriding the config.
    #[arg(long, global = true)]
    branches: Option<usize>,
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Error window `a,b` (compare, error-curve); defaults to the whole grid.
    #[arg(long, global = true, value_parser = Window::parse, allow_hyphen_values = true)]
    window: Option<Window>,
    /// Print the fully resolved config and exit.
    #[arg(long, global = true)]
    dump_config: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Characteristic roots with their residues.
    Roots,
    /// Stability verdict from the rightmost root.
    Stability,
    /// Initial, forced and total response on the grid.
    Response,
    /// Spectral series against the step integrator.
    Compare,
    /// Sup error against the integrator for several depths.
    ErrorCurve {
        /// Comma-separated depths; defaults to 0..=K.
        #[arg(long, value_delimiter = ',')]
        depths: Option<Vec<usize>>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let path = cli
        .common
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut config = ModelConfig::load(path)?;
    if let Some(k) = cli.common.branches {
        config.solver.branch_depth = k;
    }

    let mut out: Box<dyn Write + Send> = match &cli.common.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    };
    if cli.common.dump_config {
        writeln!(out, "{}", config.to_json())?;
        out.flush()?;
        return Ok(());
    }

    let model: Model = config.build()?;
    let depth = model.config.solver.branch_depth;
    let window = cli.common.window.unwrap_or(Window { lo: 0.0, hi: model.config.grid.t_end });

    let mut work = move || -> Result<(), CliError> {
        match &cli.command {
            Command::Roots => commands::roots(&model, depth, &mut out),
            Command::Stability => commands::stability(&model, depth, &mut out),
            Command::Response => commands::response(&model, depth, &mut out),
            Command::Compare => {
                let sup = commands::compare(&model, depth, window, &mut out)?;
                eprintln!("sup error over [{}, {}]: {sup:e}", window.lo, window.hi);
                Ok(())
            }
            Command::ErrorCurve { depths } => {
                let depths = depths.clone().unwrap_or_else(|| (0..=depth).collect());
                commands::error_curve(&model, &depths, window, &mut out)
            }
        }?;
        out.flush()?;
        Ok(())
    };

    match cli.common.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?
            .install(work),
        None => work(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
