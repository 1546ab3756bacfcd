//! Command-line front end: coupling spectra, level-shift tables, decay
//! trajectories and canned demo studies, all written as CSV.

mod commands;
pub mod config;
pub mod demo;
pub mod error;
mod plot;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use plasmon_shift::levelshift::ShiftMethod;

pub use error::{CliError, CliResult};

/// Caps the worker pool when set to a positive integer.
pub const THREADS_ENV: &str = "PLASMON_SHIFT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "plasmon-shift", version, about = "Level shift and decay dynamics of an emitter near a plasmonic sphere")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coupling spectrum g(ω) of the sphere system on a frequency grid.
    #[command(allow_negative_numbers = true)]
    Gf(GfArgs),
    /// Level-shift tables for one or more methods and cut-offs.
    #[command(allow_negative_numbers = true)]
    Shift(ShiftArgs),
    /// Excited-state population dynamics.
    #[command(allow_negative_numbers = true)]
    Dynamics(DynamicsArgs),
    /// Runs a named study into a directory, with a MANIFEST.
    #[command(allow_negative_numbers = true)]
    Demo(DemoArgs),
}

/// Sphere geometry and material.
#[derive(Debug, Clone, Args)]
pub struct SphereArgs {
    #[arg(long, default_value_t = 20.0)]
    pub radius_nm: f64,
    /// Emitter distance from the sphere surface.
    #[arg(long, default_value_t = 1.0)]
    pub gap_nm: f64,
    #[arg(long, default_value_t = 24.0)]
    pub dipole_debye: f64,
    /// Host relative permittivity.
    #[arg(long, default_value_t = 1.0)]
    pub host_eps: f64,
    /// Constant real sphere permittivity instead of Drude gold.
    #[arg(long)]
    pub sphere_eps: Option<f64>,
    /// Tabulated sphere permittivity (`omega_ev,eps_re,eps_im`) instead of
    /// Drude gold.
    #[arg(long)]
    pub permittivity_table: Option<PathBuf>,
    /// Add the free-space term. Off by default: its real-axis shift grows
    /// with the cut-off.
    #[arg(long, default_value_t = false, action = ArgAction::Set, num_args = 0..=1, default_missing_value = "true")]
    pub include_vacuum: bool,
}

/// Where the coupling comes from when not from the sphere.
#[derive(Debug, Clone, Args)]
pub struct ReservoirArgs {
    #[command(flatten)]
    pub sphere: SphereArgs,
    /// Ingest a coupling spectrum CSV instead of the sphere model.
    #[arg(long)]
    pub spectrum: Option<PathBuf>,
    /// Re g(0) for sampled data; fitted from the low-frequency window when
    /// absent.
    #[arg(long)]
    pub g0_ev: Option<f64>,
    #[arg(long, value_delimiter = ',', num_args = 1, action = ArgAction::Set, default_values_t = [0.125, 0.2])]
    pub zero_fit_window: Vec<f64>,
}

/// Quadrature limits.
#[derive(Debug, Clone, Args)]
pub struct PolicyArgs {
    #[arg(long, default_value_t = 200_000)]
    pub node_budget: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub abs_tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct GfArgs {
    #[command(flatten)]
    pub sphere: SphereArgs,
    #[arg(long, default_value_t = 0.1)]
    pub omega_min_ev: f64,
    #[arg(long, default_value_t = 10.0)]
    pub omega_max_ev: f64,
    #[arg(long, default_value_t = 1000)]
    pub points: usize,
    #[arg(long, default_value = "coupling.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ShiftArgs {
    #[command(flatten)]
    pub reservoir: ReservoirArgs,
    #[command(flatten)]
    pub policy: PolicyArgs,
    /// Any of hilbert, imag-axis, sub-kk.
    #[arg(long = "method", value_delimiter = ',', num_args = 1, action = ArgAction::Set, default_value = "sub-kk")]
    pub methods: Vec<ShiftMethod>,
    /// Cut-offs; for imag-axis these are ξ_max.
    #[arg(long, value_delimiter = ',', num_args = 1, action = ArgAction::Set, default_values_t = [10.0, 20.0, 50.0, 200.0])]
    pub omega_max_ev: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub grid_min_ev: f64,
    #[arg(long, default_value_t = 8.0)]
    pub grid_max_ev: f64,
    #[arg(long, default_value_t = 71)]
    pub grid_points: usize,
    /// Also write the error table against the reference method.
    #[arg(long, default_value_t = false, action = ArgAction::Set, num_args = 0..=1, default_missing_value = "true")]
    pub compare: bool,
    #[arg(long, default_value = "shift-out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverChoice {
    Volterra,
    Spectral,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpectralShift {
    SubKk,
    Hilbert,
}

#[derive(Debug, Clone, Args)]
pub struct DynamicsArgs {
    #[command(flatten)]
    pub reservoir: ReservoirArgs,
    #[command(flatten)]
    pub policy: PolicyArgs,
    /// No reservoir at all.
    #[arg(long, default_value_t = false, action = ArgAction::Set, num_args = 0..=1, default_missing_value = "true")]
    pub free_emitter: bool,
    #[arg(long, value_enum, default_value_t = SolverChoice::Both)]
    pub method: SolverChoice,
    /// Level shift fed to the spectral solver.
    #[arg(long, value_enum, default_value_t = SpectralShift::SubKk)]
    pub spectral_shift: SpectralShift,
    #[arg(long, default_value_t = 5.0)]
    pub omega0_ev: f64,
    #[arg(long, default_value_t = 50.0)]
    pub tmax_fs: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dt_fs: f64,
    #[arg(long, default_value_t = 10.0)]
    pub omega_max_ev: f64,
    #[arg(long, default_value_t = plasmon_shift::dynamics::DEFAULT_ETA)]
    pub eta_ev: f64,
    /// Write a matplotlib helper next to the CSVs.
    #[arg(long, default_value_t = false, action = ArgAction::Set, num_args = 0..=1, default_missing_value = "true")]
    pub plot_script: bool,
    #[arg(long, default_value = "dynamics-out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct DemoArgs {
    /// One of the names listed by `demo --list`.
    pub name: Option<String>,
    #[arg(long, default_value_t = false)]
    pub list: bool,
    /// Defaults to `demo-<name>`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// What a successful run wrote.
#[derive(Debug, Default)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub lines: Vec<String>,
}

/// Parses `args` (including the program name), merges any `--config` file,
/// and runs the command.
pub fn run<I, T>(args: I) -> CliResult<RunReport>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args = config::merge_config(args.into_iter().map(Into::into).collect())?;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            let text = e.render().to_string();
            return Ok(RunReport { files: Vec::new(), lines: vec![text.trim_end().to_string()] });
        }
        Err(e) => return Err(CliError::Usage(e.render().to_string())),
    };
    configure_threads()?;
    match cli.command {
        Command::Gf(a) => commands::gf(&a),
        Command::Shift(a) => commands::shift(&a),
        Command::Dynamics(a) => commands::dynamics(&a),
        Command::Demo(a) => demo::run_demo_command(&a),
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    // A second call in the same process (tests) finds the pool built; that
    // is fine.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(args).unwrap()
    }

    #[test]
    fn later_flags_replace_earlier_ones() {
        let cli = parse(&["p", "shift", "--omega-max-ev", "10,20", "--omega-max-ev", "50", "--grid-points", "3", "--grid-points", "5"]);
        let Command::Shift(a) = cli.command else { panic!() };
        assert_eq!(a.omega_max_ev, vec![50.0]);
        assert_eq!(a.grid_points, 5);
    }

    #[test]
    fn bool_options_take_optional_values() {
        let Command::Shift(a) = parse(&["p", "shift", "--compare"]).command else { panic!() };
        assert!(a.compare);
        let Command::Shift(a) = parse(&["p", "shift", "--compare", "true", "--compare", "false"]).command else {
            panic!()
        };
        assert!(!a.compare);
        let Command::Gf(a) = parse(&["p", "gf", "--include-vacuum", "true"]).command else { panic!() };
        assert!(a.sphere.include_vacuum);
    }

    #[test]
    fn methods_parse_by_name() {
        let Command::Shift(a) = parse(&["p", "shift", "--method", "hilbert,imag-axis,sub-kk"]).command else {
            panic!()
        };
        assert_eq!(a.methods, ShiftMethod::ALL.to_vec());
        assert!(Cli::try_parse_from(["p", "shift", "--method", "bogus"]).is_err());
    }
}
