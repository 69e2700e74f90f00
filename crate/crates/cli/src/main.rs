use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

mod commands;
mod config;
mod error;

use config::ExperimentConfig;
use error::CliError;

/// Batch experiments for the chaoscalc white-noise calculus engine.
#[derive(Parser)]
#[command(name = "chaoscalc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (JSON). Defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for result files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads; falls back to CHAOSCALC_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Residuals of the exact calculus identities on random draws.
    IdentitySuite,
    /// Donsker delta integrability experiment with an OU kernel.
    Donsker(DonskerArgs),
    /// Discrete fBm covariance against the closed form.
    FbmCov,
    /// Monte Carlo moments against chaos-expansion values.
    McCompare,
    /// One integral per lambda with its diagnostics.
    Vmbv,
    /// Cartesian sweep over cells, times and lambdas.
    Sweep,
}

#[derive(Args)]
struct DonskerArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    /// Number of even-order terms kept.
    #[arg(long)]
    order: Option<usize>,
    /// Comma-separated lambda values.
    #[arg(long, value_delimiter = ',')]
    lambda_sweep: Option<Vec<f64>>,
    #[arg(long)]
    cells: Option<usize>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::IdentitySuite => "identity-suite",
            Command::Donsker(_) => "donsker",
            Command::FbmCov => "fbm-cov",
            Command::McCompare => "mc-compare",
            Command::Vmbv => "vmbv",
            Command::Sweep => "sweep",
        }
    }
}

fn init_threads(flag: Option<usize>) -> Result<(), CliError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("CHAOSCALC_THREADS") {
            Ok(v) => Some(
                v.parse()
                    .map_err(|_| CliError::Parse(format!("CHAOSCALC_THREADS must be an integer, got {v:?}")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Parse(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads(cli.threads)?;
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Command::Donsker(a) = &cli.command {
        let d = &mut cfg.donsker;
        d.alpha = a.alpha.unwrap_or(d.alpha);
        d.eps = a.eps.unwrap_or(d.eps);
        d.t = a.t.unwrap_or(d.t);
        d.terms = a.order.unwrap_or(d.terms);
        if let Some(l) = &a.lambda_sweep {
            cfg.lambdas = l.clone();
        }
        if let Some(m) = a.cells {
            cfg.grid = chaoscalc::Grid::new(cfg.grid.horizon(), m)?;
        }
        cfg.validate()?;
    }

    let name = cli.command.name();
    let out = match &cli.command {
        Command::IdentitySuite => commands::identity(&cfg)?,
        Command::Donsker(_) => commands::donsker(&cfg)?,
        Command::FbmCov => commands::fbm_cov(&cfg)?,
        Command::McCompare => commands::mc_compare(&cfg)?,
        Command::Vmbv => commands::vmbv(&cfg)?,
        Command::Sweep => commands::sweep(&cfg)?,
    };

    std::fs::create_dir_all(&cli.out)?;
    let csv_name = cfg.output.csv.clone().unwrap_or_else(|| format!("{name}.csv"));
    let json_name = cfg.output.json.clone().unwrap_or_else(|| format!("{name}.json"));
    std::fs::write(cli.out.join(&csv_name), &out.csv)?;
    let doc = json!({ "command": name, "config": cfg, "results": out.results });
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Parse(e.to_string()))?;
    text.push('\n');
    std::fs::write(cli.out.join(&json_name), text)?;
    eprintln!(
        "wrote {} and {}",
        cli.out.join(csv_name).display(),
        cli.out.join(json_name).display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
