mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

use crate::commands::{CliError, Grid};
use crate::config::{OutputFormat, RunConfig, Threads};

#[derive(Parser, Debug)]
#[command(
    name = "gpfp",
    version,
    about = "Densities, free cumulants, Hankel certificates and univalence checks for GPFP laws"
)]
struct Cli {
    /// JSON file with run settings; flags given here take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Quadrature error target.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Starting node count of the cosine rule.
    #[arg(long, global = true)]
    quad_nodes: Option<usize>,
    /// Number of probe points for ui-verify.
    #[arg(long, global = true)]
    probes: Option<usize>,
    /// Radius of the probe annulus for ui-verify.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Seed for sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    output: Option<OutputFormat>,
    /// Worker threads: a positive integer or "auto".
    #[arg(long, global = true, env = "GPFP_THREADS")]
    threads: Option<Threads>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Density on an evenly spaced grid.
    Pdf {
        spec: PathBuf,
        /// `lo:hi:n`, n points from lo to hi inclusive.
        #[arg(long, allow_hyphen_values = true)]
        grid: Grid,
    },
    /// Moments m_1..m_n and free cumulants k_1..k_n.
    Cumulants {
        spec: PathBuf,
        #[arg(long)]
        n: usize,
        /// Require exact rational moments.
        #[arg(long, conflicts_with = "quad")]
        exact: bool,
        /// Use quadrature moments even when exact ones exist.
        #[arg(long)]
        quad: bool,
    },
    /// Hankel determinants of the cumulant sequence started at k_2.
    #[command(group(ArgGroup::new("source").required(true).args(["spec", "eta", "sigma_inv"])))]
    Hankel {
        spec: Option<PathBuf>,
        /// The eta measure with this alpha_2.
        #[arg(long)]
        eta: Option<String>,
        /// The inverse of the sigma measure with this alpha_2.
        #[arg(long)]
        sigma_inv: Option<String>,
        #[arg(long, default_value_t = 2)]
        order: usize,
    },
    /// Root of the eta Hankel determinant in alpha_2.
    Threshold {
        /// Recompute from quadrature cumulants instead of exact polynomials.
        #[arg(long)]
        quad: bool,
    },
    /// Numerical univalence check of the Cauchy transform of X^r.
    UiVerify {
        spec: PathBuf,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        power: f64,
        /// Write the sampled contour image as CSV.
        #[arg(long, value_name = "FILE")]
        trace: Option<PathBuf>,
        /// Run outside the regime covered by the sector construction.
        #[arg(long)]
        force: bool,
    },
    /// Determinant sweeps behind the two Hankel figures.
    Repro { figure: Figure },
    /// Independent draws by inverse-CDF sampling.
    Sample {
        spec: PathBuf,
        #[arg(long, default_value_t = 1000)]
        count: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Figure {
    Fig2,
    Fig3,
}

fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(v) = cli.tol {
        cfg.tol = v;
    }
    if let Some(v) = cli.quad_nodes {
        cfg.quad_nodes = v;
    }
    if let Some(v) = cli.probes {
        cfg.probes = v;
    }
    if let Some(v) = cli.epsilon {
        cfg.epsilon = v;
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if cli.output.is_some() {
        cfg.output = cli.output;
    }
    if let Some(v) = cli.threads {
        cfg.threads = v;
    }
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

fn dispatch(cli: &Cli, cfg: &RunConfig) -> Result<String, CliError> {
    match &cli.command {
        Command::Pdf { spec, grid } => commands::pdf(cfg, spec, grid),
        Command::Cumulants { spec, n, exact, quad } => {
            commands::cumulants(cfg, spec, *n, commands::MomentSource::from_flags(*exact, *quad))
        }
        Command::Hankel {
            spec,
            eta,
            sigma_inv,
            order,
        } => {
            let source = match (spec, eta, sigma_inv) {
                (Some(p), _, _) => commands::HankelSource::Spec(p.clone()),
                (_, Some(a), _) => commands::HankelSource::Eta(a.clone()),
                (_, _, Some(a)) => commands::HankelSource::SigmaInverse(a.clone()),
                _ => return Err(CliError::Usage("give a spec, --eta or --sigma-inv".into())),
            };
            commands::hankel(cfg, &source, *order)
        }
        Command::Threshold { quad } => commands::threshold(cfg, *quad),
        Command::UiVerify {
            spec,
            power,
            trace,
            force,
        } => commands::ui_verify(cfg, spec, *power, trace.as_deref(), *force),
        Command::Repro { figure } => commands::repro(
            cfg,
            match figure {
                Figure::Fig2 => gpfp_core::fid::Family::SigmaInverse,
                Figure::Fig3 => gpfp_core::fid::Family::Eta,
            },
        ),
        Command::Sample { spec, count } => commands::sample(cfg, spec, *count),
    }
}

fn fail(err: &CliError) -> ExitCode {
    let msg = err.to_string().replace('\n', " ");
    eprintln!("error: code={} kind={} msg={}", err.code(), err.kind(), msg);
    ExitCode::from(err.code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let first = e.to_string();
            let first = first.lines().next().unwrap_or("invalid usage");
            let msg = first.trim_start_matches("error: ").to_string();
            return fail(&CliError::Usage(msg));
        }
    };
    let cfg = match resolve_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => return fail(&e),
    };
    if let Threads::Fixed(n) = cfg.threads {
        // Only fails if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match dispatch(&cli, &cfg) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout
                .write_all(out.as_bytes())
                .and_then(|_| stdout.flush())
                .is_err()
            {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(CliError::Verdict {
            output,
            code,
            reason,
            kind,
        }) => {
            print!("{output}");
            fail(&CliError::Verdict {
                output: String::new(),
                code,
                reason,
                kind,
            })
        }
        Err(e) => fail(&e),
    }
}
