use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use specpool::experiments::{self, defaults, Table};
use specpool::params::{parse_users, NoiseSpec, ParamOverrides, SystemParams};
use specpool::pooling::UserLimit;
use specpool::Error;

#[derive(Parser, Debug)]
#[command(name = "specpool", version, about = "Spectrum pooling experiments: simulation and wideband closed forms")]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Flat `key = value` parameter file; flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    #[arg(long, global = true, value_name = "INT")]
    trials: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Number of sub-bands N.
    #[arg(long, global = true, value_name = "INT")]
    n: Option<usize>,
    /// Number of users L, or `auto` to add users until the band is full.
    #[arg(long, global = true, value_name = "INT|auto")]
    users: Option<String>,
    #[arg(long, global = true, value_name = "F", conflicts_with_all = ["snr_db", "ebn0_db"])]
    n0: Option<f64>,
    #[arg(long = "snr-db", global = true, value_name = "F", allow_negative_numbers = true, conflicts_with = "ebn0_db")]
    snr_db: Option<f64>,
    #[arg(long = "ebn0-db", global = true, value_name = "F", allow_negative_numbers = true)]
    ebn0_db: Option<f64>,
    /// Comma-separated sweep of the command's x-axis.
    #[arg(long, global = true, value_name = "LIST", value_delimiter = ',', allow_hyphen_values = true)]
    grid: Option<Vec<f64>>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lagrange multiplier γ₀ over a grid of noise powers (grid: n0 values).
    Gamma0,
    /// Simulated vs closed-form sum spectral efficiency (grid: SNR dB). Default N=16, L=5, 2000 trials.
    FigSumse,
    /// Maximum number of users vs Eb/N0 (grid: Eb/N0 dB). Default 200 trials.
    FigMaxusers {
        /// Comma-separated sub-band counts.
        #[arg(long = "n-list", value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
    },
    /// Asymptotic sum-efficiency gains vs Eb/N0 (grid: Eb/N0 dB). Default L=5.
    FigGains,
    /// Cognitive vs non-cognitive sum efficiency (grid: SNR dB). Default N=512, L=auto, 500 trials.
    FigNcr,
    /// Band factor gain convergence over N. Default n0=1, L=5, 1000 trials.
    FigConvergence {
        #[arg(long = "n-list", value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
    },
    /// Power-detection miss/false-alarm rates (grid: SNR dB). Default 10000 trials.
    FigSensing {
        /// Comma-separated sample counts M.
        #[arg(long = "m-list", value_delimiter = ',')]
        m_list: Option<Vec<usize>>,
        /// Decision threshold as a multiple of N0.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Closed-form report at one operating point with a Monte Carlo check.
    Report,
}

fn flag_overrides(c: &Common) -> Result<ParamOverrides, Error> {
    let mut o = ParamOverrides {
        n_subbands: c.n,
        seed: c.seed,
        trials: c.trials,
        ..Default::default()
    };
    if let Some(u) = &c.users {
        o.users = Some(parse_users(u)?);
    }
    if let Some(v) = c.n0 {
        o.set_noise(NoiseSpec::N0(v))?;
    }
    if let Some(v) = c.snr_db {
        o.set_noise(NoiseSpec::SnrDb(v))?;
    }
    if let Some(v) = c.ebn0_db {
        o.set_noise(NoiseSpec::EbN0Db(v))?;
    }
    Ok(o)
}

fn base(n: usize, users: UserLimit, noise: NoiseSpec, trials: usize) -> SystemParams {
    SystemParams {
        n_subbands: n,
        users,
        noise,
        trials,
        ..SystemParams::default()
    }
}

/// Sweep points: explicit `--grid`, else the single configured noise level,
/// else the command's default axis.
fn points(
    grid: &Option<Vec<f64>>,
    overrides: &ParamOverrides,
    axis: fn(f64) -> NoiseSpec,
    default: &[f64],
) -> Vec<NoiseSpec> {
    match (grid, overrides.noise) {
        (Some(g), _) => g.iter().map(|&v| axis(v)).collect(),
        (None, Some(n)) => vec![n],
        (None, None) => default.iter().map(|&v| axis(v)).collect(),
    }
}

fn run(cli: &Cli) -> Result<Table, Error> {
    let file = match &cli.common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config {
                    field: "config".into(),
                    message: format!("{}: {e}", path.display()),
                })?;
            ParamOverrides::parse_config(&text)?
        }
        None => ParamOverrides::default(),
    };
    let o = file.merge(flag_overrides(&cli.common)?);
    let grid = &cli.common.grid;

    match &cli.command {
        Command::Gamma0 => {
            let n0s: Vec<f64> = match (grid, o.noise) {
                (Some(g), _) => g.clone(),
                (None, Some(n)) => vec![n.resolve_n0(o.p_avg.unwrap_or(1.0))?],
                (None, None) => defaults::GAMMA0_N0.to_vec(),
            };
            experiments::cmd_gamma0(&n0s)
        }
        Command::FigSumse => {
            let p = o.apply(&base(16, UserLimit::Fixed(5), NoiseSpec::N0(1.0), 2000))?;
            let pts = points(grid, &o, NoiseSpec::SnrDb, &defaults::SUMSE_SNR_DB);
            experiments::cmd_fig_sumse(&p, &pts)
        }
        Command::FigMaxusers { n_list } => {
            let p = o.apply(&base(2048, UserLimit::Auto, NoiseSpec::EbN0Db(8.0), 200))?;
            let pts = points(grid, &o, NoiseSpec::EbN0Db, &defaults::MAXUSERS_EBN0_DB);
            let ns = match (n_list, o.n_subbands) {
                (Some(l), _) => l.clone(),
                (None, Some(n)) => vec![n],
                (None, None) => defaults::MAXUSERS_N.to_vec(),
            };
            experiments::cmd_fig_maxusers(&p, &pts, &ns)
        }
        Command::FigGains => {
            let p = o.apply(&base(16, UserLimit::Fixed(5), NoiseSpec::EbN0Db(0.0), 1))?;
            let ebn0: Vec<f64> = match (grid, o.noise) {
                (Some(g), _) => g.clone(),
                (None, Some(NoiseSpec::EbN0Db(db))) => vec![db],
                (None, Some(other)) => {
                    return Err(Error::Config {
                        field: other.key().into(),
                        message: "fig-gains is parameterized by ebn0_db".into(),
                    })
                }
                (None, None) => defaults::gains_ebn0_db(),
            };
            experiments::cmd_fig_gains(&p, &ebn0)
        }
        Command::FigNcr => {
            let p = o.apply(&base(512, UserLimit::Auto, NoiseSpec::N0(1.0), 500))?;
            let pts = points(grid, &o, NoiseSpec::SnrDb, &defaults::NCR_SNR_DB);
            experiments::cmd_fig_ncr(&p, &pts)
        }
        Command::FigConvergence { n_list } => {
            let p = o.apply(&base(16, UserLimit::Fixed(5), NoiseSpec::N0(1.0), 1000))?;
            let ns = n_list.clone().unwrap_or_else(|| defaults::CONVERGENCE_N.to_vec());
            experiments::cmd_fig_convergence(&p, &ns)
        }
        Command::FigSensing { m_list, threshold } => {
            let mut o = o.clone();
            if threshold.is_some() {
                o.sensing_threshold = *threshold;
                o.sensing_m = o.sensing_m.or(Some(1));
            }
            let p = o.apply(&base(16, UserLimit::Fixed(1), NoiseSpec::N0(1.0), 10_000))?;
            let snr: Vec<f64> = grid.clone().unwrap_or_else(|| defaults::SENSING_SNR_DB.to_vec());
            let ms = m_list.clone().unwrap_or_else(|| defaults::SENSING_M.to_vec());
            experiments::cmd_fig_sensing(&p, &snr, &ms)
        }
        Command::Report => {
            let p = o.apply(&base(16, UserLimit::Fixed(5), NoiseSpec::N0(1.0), 1000))?;
            experiments::cmd_report(&p)
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } | Error::InvalidParameter(_) | Error::Domain(_) => 2,
        Error::SolverFailure { .. } | Error::NoFeasibleAllocation => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let table = match run(&cli) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let written = match &cli.common.out {
        Some(path) => fs::File::create(path).and_then(|f| table.write_csv(io::BufWriter::new(f))),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            table.write_csv(&mut lock).and_then(|_| lock.flush())
        }
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: writing output: {e}");
            ExitCode::from(1)
        }
    }
}
