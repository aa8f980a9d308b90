use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use hyperqkd::protocol::{ProtocolConfig, SourceModel, DEFAULT_DISCLOSE_FRACTION};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Closed-form rates, error models and baselines.
    Analytic,
    /// Monte Carlo sessions with transcripts.
    Simulate,
    /// CHSH value and fringe visibility from simulated Bell rounds.
    Bell,
    /// Monte Carlo against analytics for both source models.
    Compare,
    /// Data series for the error-rate and key-rate figures.
    Figures,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Physical,
    PaperIdeal,
}

impl From<ModelArg> for SourceModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Physical => SourceModel::Physical,
            ModelArg::PaperIdeal => SourceModel::PaperIdeal,
        }
    }
}

/// Simulator and analysis harness for angular-momentum QKD.
#[derive(Debug, Parser)]
#[command(name = "hyperqkd", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Half-width of the OAM alphabet; repeat for a sweep.
    #[arg(long = "l0", value_name = "L0", value_parser = clap::value_parser!(u32).range(1..))]
    l0: Vec<u32>,
    /// Fraction of photons intercepted; repeat for a sweep.
    #[arg(long, value_name = "ETA", value_parser = unit_interval, conflicts_with = "eta_grid")]
    eta: Vec<f64>,
    /// Evenly spaced eta values on [0, 1].
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u32).range(2..))]
    eta_grid: Option<u32>,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Defaults to physical for `bell`, paper-ideal otherwise.
    #[arg(long, value_enum)]
    source_model: Option<ModelArg>,
    /// Share of sifted rounds used for Bell tests (default 1 for `bell`, 0.1 otherwise).
    #[arg(long, value_parser = unit_interval)]
    bell_fraction: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_DISCLOSE_FRACTION, value_parser = unit_interval)]
    disclose_fraction: f64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Output file, or directory for `simulate` and `figures`.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Exit with status 2 when a comparison exceeds 5 standard errors.
    #[arg(long)]
    strict: bool,
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

/// A fully resolved invocation. Serialized into every output file header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub command: Command,
    pub l0_list: Vec<u32>,
    pub eta_grid: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub source_model: SourceModel,
    pub bell_fraction: f64,
    pub disclose_fraction: f64,
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
    pub strict: bool,
}

pub const FIGURE_L0: [u32; 3] = [1, 3, 5];
pub const FIGURE_ETA_POINTS: u32 = 101;
const DEFAULT_ETA: [f64; 3] = [0.0, 0.5, 1.0];

pub fn eta_grid(n: u32) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

#[derive(Debug)]
pub enum ParseOutcome {
    Run(RunSpec),
    /// `--help` or `--version`: print and exit successfully.
    Info(String),
}

/// Parses command-line arguments (including the program name).
pub fn parse_run_spec<I, T>(argv: I) -> Result<ParseOutcome, String>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    Ok(ParseOutcome::Info(e.to_string()))
                }
                _ => Err(e.to_string()),
            };
        }
    };
    resolve(args).map(ParseOutcome::Run)
}

fn resolve(a: Args) -> Result<RunSpec, String> {
    let figures = a.command == Command::Figures;
    let bell = a.command == Command::Bell;
    let l0_list = if a.l0.is_empty() {
        if figures {
            FIGURE_L0.to_vec()
        } else {
            vec![1]
        }
    } else {
        a.l0
    };
    let eta = match (a.eta_grid, a.eta.is_empty()) {
        (Some(n), _) => eta_grid(n),
        (None, false) => a.eta,
        (None, true) if figures => eta_grid(FIGURE_ETA_POINTS),
        (None, true) => DEFAULT_ETA.to_vec(),
    };
    if eta.windows(2).any(|w| w[0] >= w[1]) {
        return Err("error: --eta values must be strictly increasing".into());
    }
    if l0_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err("error: --l0 values must be strictly increasing".into());
    }
    let source_model = match (a.source_model.map(SourceModel::from), bell) {
        (Some(SourceModel::PaperIdeal), true) => return Err(
            "error: --source-model paper-ideal cannot be used with bell (Bell tests need states)"
                .into(),
        ),
        (Some(m), _) => m,
        (None, true) => SourceModel::Physical,
        (None, false) => SourceModel::PaperIdeal,
    };
    let bell_fraction = a.bell_fraction.unwrap_or(if bell { 1.0 } else { 0.1 });
    if bell && bell_fraction == 0.0 {
        return Err("error: --bell-fraction must be positive for bell".into());
    }
    let spec = RunSpec {
        command: a.command,
        l0_list,
        eta_grid: eta,
        trials: a.trials,
        seed: a.seed,
        source_model,
        bell_fraction,
        disclose_fraction: a.disclose_fraction,
        output_path: a.out,
        output_format: a.format,
        strict: a.strict,
    };
    Ok(spec)
}

impl RunSpec {
    pub fn config(
        &self,
        l0: u32,
        eta: f64,
    ) -> Result<ProtocolConfig, hyperqkd::protocol::ProtocolError> {
        Ok(ProtocolConfig::new(l0, eta, self.trials)?
            .with_seed(self.seed)
            .with_model(self.source_model)
            .with_bell_fraction(self.bell_fraction)
            .with_disclose_fraction(self.disclose_fraction))
    }

    /// Every (l0, eta) pair in sweep order.
    pub fn points(&self) -> Vec<(u32, f64)> {
        self.l0_list
            .iter()
            .flat_map(|&l0| self.eta_grid.iter().map(move |&eta| (l0, eta)))
            .collect()
    }
}
