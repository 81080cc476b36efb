//! Command-line harness: reproduces each figure as a machine-readable
//! dataset, exposes the bound tables, and runs the verification suites.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O
//! error.

mod dataset;
mod figs;
mod tables;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dataset::Format;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    VerificationFailed(usize),
}

impl From<immaculate::Error> for CliError {
    fn from(e: immaculate::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "immaculate",
    version,
    about = "Probabilistic-amplifier numerics: figure datasets, bound tables, and verification"
)]
struct Cli {
    /// Directory the datasets are written into.
    #[arg(long, global = true, env = "IMMACULATE_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,

    /// Output format for datasets.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

/// Shared sweep parameters for the amplifier figures.
#[derive(Args, Debug, Clone)]
pub struct AmpSweep {
    /// Amplitude gain g (> 1).
    #[arg(long, default_value_t = 3.0)]
    g: f64,

    /// High-fidelity photon cap N.
    #[arg(long = "N", default_value_t = 9)]
    n_cap: usize,

    /// Smallest input amplitude of the sweep.
    #[arg(long, default_value_t = 0.0)]
    alpha_min: f64,

    /// Largest input amplitude; defaults to 1.5·√N.
    #[arg(long)]
    alpha_max: Option<f64>,

    /// Number of sweep points.
    #[arg(long, default_value_t = 121)]
    alpha_steps: usize,

    /// Fock-space cutoff override; must not undercut the automatic rule.
    #[arg(long)]
    cutoff: Option<usize>,
}

impl AmpSweep {
    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn n_cap(&self) -> usize {
        self.n_cap
    }

    pub fn cutoff_override(&self) -> Option<usize> {
        self.cutoff
    }

    pub fn alphas(&self) -> CliResult<Vec<f64>> {
        if self.alpha_steps < 2 {
            return Err(CliError::Usage("--alpha-steps must be at least 2".into()));
        }
        let max = self
            .alpha_max
            .unwrap_or(1.5 * (self.n_cap as f64).sqrt());
        let ordered = max.is_finite() && max > self.alpha_min;
        if !ordered {
            return Err(CliError::Usage(
                "--alpha-max must exceed --alpha-min".into(),
            ));
        }
        Ok((0..self.alpha_steps)
            .map(|i| {
                self.alpha_min
                    + (max - self.alpha_min) * i as f64 / (self.alpha_steps - 1) as f64
            })
            .collect())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Deviation-to-ratio regression a(ε) from numeric discrimination runs.
    Fig3 {
        /// First (largest) ε of the log-spaced grid.
        #[arg(long, default_value_t = 0.5)]
        eps_start: f64,
        /// Last (smallest) ε of the log-spaced grid.
        #[arg(long, default_value_t = 1e-5)]
        eps_stop: f64,
        /// Number of log-spaced ε points.
        #[arg(long, default_value_t = 10)]
        eps_points: usize,
        /// Circle sizes, e.g. 2..40.
        #[arg(long = "M", value_parser = parse_range, default_value = "2..40")]
        m_range: (usize, usize),
        /// Step through the M range.
        #[arg(long, default_value_t = 2)]
        m_step: usize,
    },
    /// Exact vs dense vs sparse discrimination success probabilities.
    Fig4 {
        /// Circle sizes, e.g. 2..12.
        #[arg(long = "M", value_parser = parse_range, default_value = "2..12")]
        m_range: (usize, usize),
        /// Squared amplitudes of the input circle.
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,4")]
        alpha2: Vec<f64>,
    },
    /// Success probability and fidelity of the extended operators by strip
    /// offset.
    Fig5 {
        #[command(flatten)]
        sweep: AmpSweep,
        /// Strip offsets to sweep.
        #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
        k_list: Vec<usize>,
    },
    /// Restricted vs extended operator figures of merit at k = 0.
    Fig6 {
        #[command(flatten)]
        sweep: AmpSweep,
    },
    /// Husimi-Q lattice of the amplifier output, one panel per amplitude.
    Fig7 {
        /// Amplitude gain g (> 1).
        #[arg(long, default_value_t = 3.0)]
        g: f64,
        /// High-fidelity photon cap N.
        #[arg(long = "N", default_value_t = 9)]
        n_cap: usize,
        /// Input amplitudes, one output panel each.
        #[arg(long, value_delimiter = ',', default_value = "0.5,1.5,3,5")]
        alpha: Vec<f64>,
        /// Lattice points per axis.
        #[arg(long, default_value_t = 201)]
        grid_points: usize,
        /// Fock-space cutoff override; must not undercut the automatic rule.
        #[arg(long)]
        cutoff: Option<usize>,
    },
    /// Antinormally ordered quadrature SNRs with root-probability products.
    Fig8 {
        #[command(flatten)]
        sweep: AmpSweep,
    },
    /// Number-based SNR with its root-probability product.
    Fig9 {
        #[command(flatten)]
        sweep: AmpSweep,
    },
    /// Discrimination landmark table across circle sizes.
    UsdTable {
        /// Circle sizes.
        #[arg(long = "M", value_delimiter = ',', default_value = "4,8,16")]
        m_list: Vec<usize>,
        /// Landmark ratios a = ᾱ²/M².
        #[arg(long, value_delimiter = ',', default_value = "0.15,0.0702")]
        a_list: Vec<f64>,
    },
    /// Amplifier bound tables: thermal-family, two-state, and circle USD.
    Bounds {
        /// Gains.
        #[arg(long, value_delimiter = ',', default_value = "1.5,2,3")]
        g_list: Vec<f64>,
        /// Circle sizes for the USD amplifier bound.
        #[arg(long = "M", value_parser = parse_range, default_value = "2..6")]
        m_range: (usize, usize),
        /// Input-circle amplitudes for the USD amplifier bound.
        #[arg(long, value_delimiter = ',', default_value = "0.001,0.5,1")]
        abar: Vec<f64>,
    },
    /// Run every invariant suite; exits nonzero on any violation.
    Verify,
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| format!("expected lo..hi, got `{s}`"))?;
    let lo: usize = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi: usize = hi.trim().parse().map_err(|e| format!("bad upper bound: {e}"))?;
    if lo > hi {
        return Err(format!("empty range {lo}..{hi}"));
    }
    Ok((lo, hi))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not errors.
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return ExitCode::from(2);
        }
    };

    let result = match cli.command {
        Command::Fig3 {
            eps_start,
            eps_stop,
            eps_points,
            m_range,
            m_step,
        } => figs::fig3(
            &cli.out_dir,
            cli.format,
            eps_start,
            eps_stop,
            eps_points,
            m_range,
            m_step,
        ),
        Command::Fig4 { m_range, alpha2 } => figs::fig4(&cli.out_dir, cli.format, m_range, &alpha2),
        Command::Fig5 { sweep, k_list } => figs::fig5(&cli.out_dir, cli.format, &sweep, &k_list),
        Command::Fig6 { sweep } => figs::fig6(&cli.out_dir, cli.format, &sweep),
        Command::Fig7 {
            g,
            n_cap,
            alpha,
            grid_points,
            cutoff,
        } => figs::fig7(&cli.out_dir, cli.format, g, n_cap, &alpha, grid_points, cutoff),
        Command::Fig8 { sweep } => figs::fig8(&cli.out_dir, cli.format, &sweep),
        Command::Fig9 { sweep } => figs::fig9(&cli.out_dir, cli.format, &sweep),
        Command::UsdTable { m_list, a_list } => {
            tables::usd_table(&cli.out_dir, cli.format, &m_list, &a_list)
        }
        Command::Bounds {
            g_list,
            m_range,
            abar,
        } => tables::bounds(&cli.out_dir, cli.format, &g_list, m_range, &abar),
        Command::Verify => verify::run(&cli.out_dir),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::VerificationFailed(n)) => {
            eprintln!("verification failed: {n} violation(s)");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("i/o error: {msg}");
            ExitCode::from(3)
        }
    }
}
