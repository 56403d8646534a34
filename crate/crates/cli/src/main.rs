use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tfdsim::experiments::{self, Command, Overrides};
use tfdsim::tfd::Beta;

/// Thermofield double and critical Ising state preparation experiments.
#[derive(Parser, Debug)]
#[command(name = "tfdsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Debug)]
struct Common {
    /// Named reproduction settings.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// TOML file with a section per subcommand.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Optimize TFD ansätze over a temperature grid.
    TfdSweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated inverse temperatures, `inf` allowed.
        #[arg(long, value_delimiter = ',', value_parser = parse_beta)]
        beta_grid: Option<Vec<Beta>>,
    },
    /// Exact optimization of the ground-state ansatz.
    Gs {
        #[command(flatten)]
        common: Common,
        /// Comma-separated layer counts.
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<usize>>,
    },
    /// Gradient descent on sampled energies.
    Hybrid {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        p: Option<usize>,
        #[arg(long)]
        shots: Option<usize>,
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Energy versus gate-angle noise, threshold and λ calibration.
    Noise {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<usize>>,
        #[arg(long)]
        gamma_max: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Parity post-selection of noisy TFD samples.
    Mitigate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        shots: Option<usize>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, value_delimiter = ',', value_parser = parse_beta)]
        beta_grid: Option<Vec<Beta>>,
    },
    /// Run the config echoed in a meta file again.
    Rerun {
        meta: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn parse_beta(s: &str) -> Result<Beta, String> {
    s.parse().map_err(|e: tfdsim::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common, overrides) = match cli.command {
        Cmd::Rerun { meta, threads, out } => {
            return report(experiments::rerun(&meta, &out, threads), &out);
        }
        Cmd::TfdSweep { common, beta_grid } => (
            Command::TfdSweep,
            common,
            Overrides {
                beta_grid,
                ..Default::default()
            },
        ),
        Cmd::Gs { common, p } => (
            Command::Gs,
            common,
            Overrides {
                p,
                ..Default::default()
            },
        ),
        Cmd::Hybrid {
            common,
            p,
            shots,
            lambda,
        } => (
            Command::Hybrid,
            common,
            Overrides {
                p: p.map(|p| vec![p]),
                shots,
                lambda,
                ..Default::default()
            },
        ),
        Cmd::Noise {
            common,
            p,
            gamma_max,
            lambda,
        } => (
            Command::Noise,
            common,
            Overrides {
                p,
                gamma_max,
                lambda,
                ..Default::default()
            },
        ),
        Cmd::Mitigate {
            common,
            shots,
            lambda,
            beta_grid,
        } => (
            Command::Mitigate,
            common,
            Overrides {
                shots,
                lambda,
                beta_grid,
                ..Default::default()
            },
        ),
    };
    let overrides = Overrides {
        seed: common.seed,
        ..overrides
    };
    let result = experiments::run_command(
        command,
        common.preset.as_deref(),
        common.config.as_deref(),
        &overrides,
        &common.out,
        common.threads,
    );
    report(result, &common.out)
}

fn report(result: tfdsim::Result<experiments::RunRecord>, out: &std::path::Path) -> ExitCode {
    match result {
        Ok(record) => {
            for f in &record.files {
                println!("{}", out.join(f).display());
            }
            println!("{}", record.meta_path(out).display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
