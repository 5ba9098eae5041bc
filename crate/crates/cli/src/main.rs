//! `mzfid`: batch front end for interferometer fidelity computations.
//!
//! Every command writes plot-ready CSV or JSON plus a run manifest from which
//! the same output can be regenerated with `mzfid replay`.

mod commands;
mod error;
mod output;
mod state_spec;

use std::path::PathBuf;
use std::process;

use clap::{Args, Parser, Subcommand};
use mzfid::{InterferometerGeometry, Outcome};
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "mzfid", version, about = "Phase-information fidelity of Mach-Zehnder interferometers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate outcome probabilities P(n_c,n_d|phi) on the phase grid.
    Probs(ProbsArgs),
    /// Phase posterior for one outcome, with peaks and circular summary.
    Posterior(PosteriorArgs),
    /// Mutual information H in bits, for one state or a photon-number sweep.
    Fidelity(FidelityArgs),
    /// Search input-state coefficients for maximal fidelity.
    Optimize(OptimizeArgs),
    /// Draw repeated measurements at a fixed phase and update the posterior.
    Simulate(SimulateArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GeometryArgs {
    /// Optical phase k*L1 of the upper arm.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub kl1: f64,
    /// Optical phase k*L2 of the lower arm.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub kl2: f64,
}

impl GeometryArgs {
    pub fn geometry(&self) -> Result<InterferometerGeometry, CliError> {
        Ok(InterferometerGeometry::new(self.kl1, self.kl2)?)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ProbsArgs {
    /// `fock`, `noon`, or a coefficient file ("re im" per line, n = 0..N).
    #[arg(long)]
    pub state: String,
    /// Total photon number.
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long, default_value_t = mzfid::DEFAULT_GRID_SIZE)]
    pub grid: usize,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PosteriorArgs {
    #[arg(long)]
    pub state: String,
    #[arg(long)]
    pub n: Option<u32>,
    /// Outcome as `n_c,n_d`.
    #[arg(long, value_parser = parse_outcome)]
    pub outcome: Outcome,
    #[arg(long, default_value_t = mzfid::DEFAULT_GRID_SIZE)]
    pub grid: usize,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FidelityArgs {
    /// Single state family or coefficient file.
    #[arg(long, conflicts_with = "sweep")]
    pub state: Option<String>,
    /// Comma-separated families to sweep over N = 1..=n-max, e.g. `fock,noon`.
    #[arg(long)]
    pub sweep: Option<String>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub n_max: Option<u32>,
    /// Fidelity of this many independent shots of the single state.
    #[arg(long, conflicts_with_all = ["sweep", "n_max"])]
    pub repeats: Option<u32>,
    /// Maximum number of count vectors enumerated for `--repeats`.
    #[arg(long, default_value_t = mzfid::fidelity::DEFAULT_COUNT_VECTOR_CAP)]
    pub cap: usize,
    #[arg(long, default_value_t = mzfid::DEFAULT_GRID_SIZE)]
    pub grid: usize,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    #[arg(long, default_value_t = 2000)]
    pub max_iter: usize,
    /// Convergence tolerance on H in bits.
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long, default_value_t = 4096)]
    pub search_grid: usize,
    /// Grid for the final reported H.
    #[arg(long, default_value_t = mzfid::DEFAULT_GRID_SIZE)]
    pub grid: usize,
    #[arg(long, default_value_t = 0.25)]
    pub step: f64,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub state: String,
    #[arg(long)]
    pub n: Option<u32>,
    /// True phase in radians.
    #[arg(long, allow_hyphen_values = true)]
    pub phi: f64,
    #[arg(long)]
    pub shots: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = mzfid::DEFAULT_GRID_SIZE)]
    pub grid: usize,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    pub manifest: PathBuf,
    /// Replaces the recorded output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_outcome(s: &str) -> Result<Outcome, String> {
    let (c, d) = s
        .split_once(',')
        .ok_or_else(|| format!("expected n_c,n_d, got {s:?}"))?;
    let n_c = c.trim().parse::<u32>().map_err(|e| format!("n_c: {e}"))?;
    let n_d = d.trim().parse::<u32>().map_err(|e| format!("n_d: {e}"))?;
    Ok(Outcome::new(n_c, n_d))
}

fn run(argv: Vec<String>) -> Result<(), CliError> {
    let cli = match Cli::try_parse_from(std::iter::once("mzfid".to_string()).chain(argv.iter().cloned())) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return if code == 0 {
                Ok(())
            } else {
                // clap has already printed the diagnostic
                Err(CliError {
                    code: error::EXIT_USAGE,
                    message: String::new(),
                })
            };
        }
    };
    commands::dispatch(cli.command, &argv)
}

fn main() {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    if let Err(e) = run(argv) {
        if !e.message.is_empty() {
            eprintln!("error: {e}");
        }
        process::exit(e.code);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outcome_parser() {
        assert_eq!(parse_outcome("4,21").unwrap(), Outcome::new(4, 21));
        assert_eq!(parse_outcome(" 0 , 1").unwrap(), Outcome::new(0, 1));
        assert!(parse_outcome("4").is_err());
        assert!(parse_outcome("a,1").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
