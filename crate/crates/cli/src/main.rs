//! `liwave`: matter-wave index of refraction from interatomic potentials,
//! simulated interferometer runs, and their analysis.

mod commands;
mod output;
mod units;
mod workflow;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use units::Units;

#[derive(Debug, Parser)]
#[command(name = "liwave", version, about = "Index of refraction of gases for lithium matter waves")]
pub struct Cli {
    /// Potential config file(s); commands needing one use the first.
    #[arg(long, global = true)]
    pub config: Vec<PathBuf>,
    /// Top-level random seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Gauss–Legendre nodes for the target thermal average.
    #[arg(long, global = true)]
    pub nodes: Option<usize>,
    /// Output file or directory (stdout when absent, where allowed).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Units::Si)]
    pub units: Units,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a potential on a radial grid.
    Potential {
        #[command(subcommand)]
        action: PotentialAction,
    },
    /// Phase-shift table at one collision speed.
    Phaseshifts(CollisionArgs),
    /// Forward amplitude and cross section at one or more collision speeds.
    Amplitude(AmplitudeArgs),
    /// Thermally averaged index per density at one beam velocity.
    Index(IndexArgs),
    /// Index versus beam velocity.
    Scan(ScanArgs),
    /// Gas-cell pressure correction, density and effective length.
    Cell(CellArgs),
    /// Simulate fringe runs at a list of pressures.
    Simulate(SimulateArgs),
    /// Fit a directory of run files and extract the index.
    Analyze(AnalyzeArgs),
    /// Theory next to the measured argon, krypton and xenon values at 1075 m/s.
    Table1(Table1Args),
    /// Cross section versus velocity.
    Fig3(FigArgs),
    /// Velocity-scaled real and imaginary index versus velocity.
    Fig4(FigArgs),
    /// Re/Im ratio versus velocity.
    Fig5(FigArgs),
    /// Theory → simulated runs on disk → analysis → comparison.
    Endtoend(EndToEndArgs),
}

#[derive(Debug, Subcommand)]
pub enum PotentialAction {
    Eval {
        #[arg(long)]
        r_min: f64,
        #[arg(long)]
        r_max: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
}

#[derive(Debug, Args)]
pub struct CollisionArgs {
    /// Relative collision speed in m/s.
    #[arg(long, conflicts_with = "k")]
    pub velocity: Option<f64>,
    /// Relative wavevector in 1/m.
    #[arg(long)]
    pub k: Option<f64>,
    /// Tight convergence instead of the survey policy.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct AmplitudeArgs {
    /// Relative collision speeds in m/s.
    #[arg(long, value_delimiter = ',', conflicts_with = "k")]
    pub velocity: Vec<f64>,
    /// Relative wavevectors in 1/m.
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<f64>,
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct BeamArgs {
    /// Target gas; defaults to the target named in the potential's pair.
    #[arg(long)]
    pub gas: Option<String>,
    /// Target gas temperature in K.
    #[arg(long, default_value_t = liwave::constants::ROOM_TEMPERATURE)]
    pub temperature: f64,
    /// Beam velocity FWHM as a fraction of the mean; 0 disables beam averaging.
    #[arg(long, default_value_t = 0.25)]
    pub beam_fwhm: f64,
    #[arg(long, default_value_t = 12)]
    pub beam_nodes: usize,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    /// Mean beam velocity in m/s.
    #[arg(long)]
    pub velocity: f64,
    #[command(flatten)]
    pub beam: BeamArgs,
    /// Direct phase-shift tables at every node instead of interpolation.
    #[arg(long)]
    pub direct: bool,
    /// Double the target nodes until Re and Im change by less than 1e-4.
    #[arg(long)]
    pub converge: bool,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, default_value_t = 700.0)]
    pub u_min: f64,
    #[arg(long, default_value_t = 3300.0)]
    pub u_max: f64,
    #[arg(long, default_value_t = liwave::refraction::DEFAULT_SCAN_POINTS)]
    pub points: usize,
    #[command(flatten)]
    pub beam: BeamArgs,
}

#[derive(Debug, Args)]
pub struct CellArgs {
    /// Geometry file; the built-in default geometry when absent.
    #[arg(long)]
    pub geom: Option<PathBuf>,
    #[arg(long, default_value = "xenon")]
    pub gas: String,
    /// Gauge pressure in mbar.
    #[arg(long, conflicts_with = "pressure")]
    pub pressure_mbar: Option<f64>,
    /// Gauge pressure in the selected unit system.
    #[arg(long)]
    pub pressure: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IndexSource {
    Theory,
    Values,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = IndexSource::Values)]
    pub index_from: IndexSource,
    /// Re(n−1)/n_gas in the selected volume unit (with `--index-from values`).
    #[arg(long)]
    pub re: Option<f64>,
    /// Im(n−1)/n_gas in the selected volume unit (with `--index-from values`).
    #[arg(long)]
    pub im: Option<f64>,
    /// Mean beam velocity in m/s.
    #[arg(long, default_value_t = liwave::refraction::MEASURED_U)]
    pub velocity: f64,
    /// Gauge pressures in the selected unit system.
    #[arg(long, value_delimiter = ',')]
    pub pressure_list: Vec<f64>,
    #[arg(long)]
    pub geom: Option<PathBuf>,
    /// Simulation settings file (signal levels, sweep, drift).
    #[arg(long)]
    pub sim_config: Option<PathBuf>,
    #[command(flatten)]
    pub beam: BeamArgs,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Directory of run files.
    #[arg(long)]
    pub runs: PathBuf,
    #[arg(long)]
    pub geom: Option<PathBuf>,
    /// Mean beam velocity in m/s.
    #[arg(long)]
    pub beam_velocity: f64,
    #[arg(long, default_value = "xenon")]
    pub gas: String,
    /// CSV of the density series; defaults next to `--out`.
    #[arg(long)]
    pub series_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Table1Args {
    #[arg(long)]
    pub workflow: Option<PathBuf>,
    /// Directory with one run subdirectory per gas (argon/, krypton/, xenon/).
    #[arg(long)]
    pub runs: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FigArgs {
    #[arg(long)]
    pub workflow: Option<PathBuf>,
    #[arg(long)]
    pub u_min: Option<f64>,
    #[arg(long)]
    pub u_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EndToEndArgs {
    #[arg(long)]
    pub workflow: Option<PathBuf>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Analyze the run files already under the output directory instead of
    /// simulating new ones.
    #[arg(long)]
    pub reuse_runs: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(&cli) {
        Ok(code) => code,
        Err(err)
            if err
                .chain()
                .any(|c| c.downcast_ref::<std::io::Error>().is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe)) =>
        {
            ExitCode::SUCCESS
        }
        Err(err) => {
            let (code, status) = commands::classify(&err);
            eprintln!("error[{code}]: {err:#}");
            ExitCode::from(status)
        }
    }
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        super::Cli::command().debug_assert();
    }
}
