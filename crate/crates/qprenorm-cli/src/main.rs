use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod error;
mod forcing;
mod output;

use commands::Status;
use config::RunConfig;
use error::CliError;
use output::Artifacts;

/// Experiments on quasi-periodic doubling renormalization.
#[derive(Parser, Debug)]
#[command(name = "qprenorm-lab", version)]
struct Cli {
    /// Run configuration (`key = value` lines under `[section]` headers).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for CSV/JSON artifacts and the manifest.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Rotation number: `golden`, `p/q`, a decimal or `[a0;a1,...]`.
    #[arg(long, global = true)]
    omega: Option<String>,
    #[arg(long, global = true)]
    nmax: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Also write two-column `.dat` files.
    #[arg(long, global = true)]
    plot_data: bool,
    /// Forcing expression, e.g. `[1]*cos(1w)+[0,0.5]*sin(2w)`.
    #[arg(long, global = true)]
    forcing: Option<String>,
    /// Worker threads.
    #[arg(long, env = "QPRENORM_THREADS", global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for the Feigenbaum fixed point and write its coefficients.
    FixedPoint,
    /// Print the Feigenbaum constant.
    Delta,
    /// Superstable parameters of the uncoupled family.
    Superstable {
        /// Only the logistic family is built in; its forced versions share the cascade.
        #[arg(long, default_value = "logistic")]
        family: String,
    },
    /// Eigenvalues of the rotation block operator.
    Spectrum {
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// `phi` or `fstar:j`.
        #[arg(long, default_value = "phi")]
        psi: String,
    },
    /// Check the Fourier diagonalization of the derivative at the fixed point.
    DtCheck,
    /// Invariant curve of the forced logistic map.
    Curve {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 1)]
        n: u32,
    },
    /// Slopes of the reducibility-loss curves.
    Slopes {
        #[arg(long)]
        family: Option<String>,
        /// `exact`, `fixed` or `both`.
        #[arg(long)]
        mode: Option<String>,
    },
    /// Numerical observations on the slope quotients.
    Observe {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        which: u8,
    },
    /// Empirical checks of the conjectural hypotheses.
    Conjecture {
        /// `h3`, `h4` or `h5`.
        #[arg(long)]
        which: String,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::FixedPoint => "fixed-point",
            Command::Delta => "delta",
            Command::Superstable { .. } => "superstable",
            Command::Spectrum { .. } => "spectrum",
            Command::DtCheck => "dt-check",
            Command::Curve { .. } => "curve",
            Command::Slopes { .. } => "slopes",
            Command::Observe { .. } => "observe",
            Command::Conjecture { .. } => "conjecture",
        }
    }
}

fn configure(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(w) = &cli.omega {
        cfg.omega = w.clone();
    }
    if let Some(n) = cli.nmax {
        cfg.nmax = n;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(f) = &cli.forcing {
        cfg.forcing = f.clone();
    }
    match &cli.command {
        Command::Slopes { family, mode } => {
            if let Some(m) = mode {
                cfg.mode = m.clone();
            }
            check_family(family.as_deref())?;
        }
        Command::Superstable { family } => check_family(Some(family))?,
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn check_family(name: Option<&str>) -> Result<(), CliError> {
    match name {
        None | Some("logistic") | Some("flm") => Ok(()),
        Some(other) => Err(CliError::Field { field: "--family".into(), msg: format!("unknown family `{other}`") }),
    }
}

fn run(cli: &Cli) -> Result<Status, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Threads(e.to_string()))?;
    }
    let cfg = configure(cli)?;
    let mut art = Artifacts::new(cli.out.as_deref(), &cfg.hash(), cli.plot_data)?;
    let status = match &cli.command {
        Command::FixedPoint => commands::fixed_point_cmd(&cfg, &mut art)?,
        Command::Delta => commands::delta_cmd(&cfg, &mut art)?,
        Command::Superstable { .. } => commands::superstable_cmd(&cfg, &mut art)?,
        Command::Spectrum { k, psi } => commands::spectrum_cmd(&cfg, &mut art, *k, psi)?,
        Command::DtCheck => commands::dt_check_cmd(&cfg, &mut art)?,
        Command::Curve { alpha, eps, n } => commands::curve_cmd(&cfg, &mut art, *alpha, *eps, *n)?,
        Command::Slopes { .. } => commands::slopes_cmd(&cfg, &mut art)?,
        Command::Observe { which } => commands::observe_cmd(&cfg, &mut art, *which)?,
        Command::Conjecture { which } => commands::conjecture_cmd(&cfg, &mut art, which)?,
    };
    art.finish(cli.command.name())?;
    Ok(status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Violation(msg)) => {
            eprintln!("violation: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
