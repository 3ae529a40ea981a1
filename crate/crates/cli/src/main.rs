use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use slidebasis_cli::{run_basis, run_compare, run_rocket, run_simulate, run_topopt, CliError, Mode, RunConfig};

#[derive(Parser)]
#[command(name = "slidebasis", version, about = "Sliding Laplacian-eigenbasis design optimization")]
struct Cli {
    /// More log output (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory [default: config `output`, else ./out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed for window initialization [default: config value, else 0].
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute and export the Laplacian eigenbasis of the configured domain.
    Basis {
        #[command(flatten)]
        common: Common,
        /// Number of eigenvectors.
        #[arg(long)]
        count: Option<usize>,
    },
    /// Forward burn of a given burn-rate field.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Uniform burn rate [default: midpoint of the bounds].
        #[arg(long, conflicts_with = "field")]
        rate: Option<f64>,
        /// Per-cell `cell,rate` CSV.
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// Thrust-profile matching.
    Rocket {
        #[command(flatten)]
        common: Common,
        /// Target kind (constant-acceleration, constant-deceleration,
        /// two-step, bucket) or a `time,thrust` CSV file.
        #[arg(long)]
        target: Option<String>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Multi-material compliance minimization.
    Topopt {
        #[command(flatten)]
        common: Common,
        /// Node and element files, comma separated.
        #[arg(long, value_delimiter = ',', num_args = 2)]
        mesh: Option<Vec<PathBuf>>,
        /// Supports CSV (`node,component,value`).
        #[arg(long)]
        bc: Option<PathBuf>,
        /// Loads CSV (`node,fx,fy,fz`).
        #[arg(long)]
        loads: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Sliding vs fixed-basis vs conventional on one configuration.
    Compare {
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common) -> Result<(RunConfig, PathBuf), CliError> {
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.sliding.rng_seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output = out.clone();
    }
    let out = cfg.output.clone();
    Ok((cfg, out))
}

fn cwd_path(p: &Path) -> PathBuf {
    if p.is_relative() {
        std::env::current_dir().map(|d| d.join(p)).unwrap_or_else(|_| p.to_path_buf())
    } else {
        p.to_path_buf()
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (artifacts, out) = match cli.command {
        Command::Basis { common, count } => {
            let (mut cfg, out) = load(&common)?;
            if count.is_some() {
                cfg.basis.count = count;
            }
            cfg.validate()?;
            (run_basis(&cfg)?, out)
        }
        Command::Simulate { common, rate, field } => {
            let (cfg, out) = load(&common)?;
            cfg.validate()?;
            if cfg.rocket.is_none() {
                return Err(CliError::Config("simulate needs a [rocket] section".into()));
            }
            (run_simulate(&cfg, rate, field.as_deref())?, out)
        }
        Command::Rocket { common, target, mode } => {
            let (mut cfg, out) = load(&common)?;
            if let Some(m) = mode {
                cfg.mode = m;
            }
            let r = cfg.rocket.as_mut().ok_or_else(|| CliError::Config("rocket needs a [rocket] section".into()))?;
            if let Some(t) = target {
                r.target.set_from_arg(&t);
                if let Some(csv) = &mut r.target.csv {
                    *csv = cwd_path(csv);
                }
            }
            cfg.validate()?;
            let (a, s) = run_rocket(&cfg)?;
            log::info!("objective {:e}, error {:?} %, {} evaluations", s.objective, s.error_percent, s.evaluations);
            (a, out)
        }
        Command::Topopt { common, mesh, bc, loads, mode } => {
            let (mut cfg, out) = load(&common)?;
            if let Some(m) = mode {
                cfg.mode = m;
            }
            let t = cfg.topopt.as_mut().ok_or_else(|| CliError::Config("topopt needs a [topopt] section".into()))?;
            if let Some(files) = mesh {
                t.nodes = Some(cwd_path(&files[0]));
                t.elements = Some(cwd_path(&files[1]));
                t.cantilever = None;
            }
            if let Some(p) = bc {
                t.bc = Some(cwd_path(&p));
            }
            if let Some(p) = loads {
                t.loads = Some(cwd_path(&p));
            }
            cfg.validate()?;
            let (a, s) = run_topopt(&cfg)?;
            log::info!("compliance {:e}, mass fraction {:?}, {} evaluations", s.objective, s.mass_fraction, s.evaluations);
            (a, out)
        }
        Command::Compare { common } => {
            let (cfg, out) = load(&common)?;
            cfg.validate()?;
            (run_compare(&cfg)?.0, out)
        }
    };
    artifacts.write(&out)?;
    println!("wrote {} files to {}", artifacts.files.len(), out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
