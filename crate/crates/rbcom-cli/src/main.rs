//! `rbcom` — command-line front end for the resonant-beam link simulator.
//!
//! Verbs:
//! * `check`  — parse a scenario, print the steady-state chain, exit 0
//! * `figure` — emit one of the built-in CSV datasets (fig6..fig10)
//! * `sweep`  — run the scenario's sweep block and emit a CSV
//! * `ofdm`   — Monte-Carlo OFDM run at the scenario's operating point
//!
//! Exit codes: 0 success, 2 config/parse error, 3 unstable or singular
//! geometry, 4 link below threshold, 1 anything else.

mod config;
mod figures;
mod ofdm_cmd;
mod sweep;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ConfigError, Scenario};

enum CliError {
    Config(ConfigError),
    Sim(rbcom::Error),
    Io(std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Sim(e) => match e {
                rbcom::Error::UnstableResonator { .. }
                | rbcom::Error::SingularConfiguration(_)
                | rbcom::Error::UnstableEquivalent { .. } => 3,
                rbcom::Error::NoLink(_) => 4,
                _ => 1,
            },
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Sim(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "rbcom",
    version,
    about = "Simulator for a retro-reflective resonant-beam optical link"
)]
struct Cli {
    /// Scenario file; omitted keys fall back to built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the scenario and print the full steady-state report.
    Check,
    /// Write one of the built-in CSV datasets.
    Figure {
        #[arg(value_parser = ["fig6", "fig7", "fig8", "fig9", "fig10"])]
        name: String,
        /// Destination file (stdout when omitted).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Points per beam-profile trace (fig6/fig7 only).
        #[arg(long, default_value_t = 512)]
        samples: usize,
    },
    /// Run the scenario's sweep block and write the CSV.
    Sweep {
        /// Destination file (stdout when omitted).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Monte-Carlo bit-error run over the scenario's link budget.
    Ofdm {
        /// Fixed frame count; omitted, batches run until the error count settles.
        #[arg(long)]
        frames: Option<u64>,
        /// Base seed for the per-frame deterministic RNG streams.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Destination for the CSV summary (stdout when omitted).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Comma-separated SNR grid in dB: run a BER waterfall at these
        /// SNRs instead of the scenario's own link budget.
        #[arg(long, value_delimiter = ',')]
        snr_db: Option<Vec<f64>>,
    },
}

fn config_dir() -> Option<PathBuf> {
    std::env::var_os("RBCOM_CONFIG_DIR").map(PathBuf::from)
}

/// Resolution order: the path as given; a relative path under
/// `RBCOM_CONFIG_DIR`; with no `--config` at all, `default.conf` in that
/// directory, then built-in defaults.
fn load_scenario(path: Option<&Path>) -> Result<Scenario, CliError> {
    match path {
        Some(p) => {
            let mut resolved = p.to_path_buf();
            if !p.exists() && p.is_relative() {
                if let Some(dir) = config_dir() {
                    let alt = dir.join(p);
                    if alt.exists() {
                        resolved = alt;
                    }
                }
            }
            Scenario::load(&resolved).map_err(CliError::Config)
        }
        None => {
            if let Some(dir) = config_dir() {
                let default = dir.join("default.conf");
                if default.exists() {
                    return Scenario::load(&default).map_err(CliError::Config);
                }
            }
            Ok(Scenario::default())
        }
    }
}

fn check_report(scenario: &Scenario) -> rbcom::Result<String> {
    let mut out = String::new();
    for line in scenario.banner() {
        out.push_str(&line);
        out.push('\n');
    }
    let report = scenario.system()?.evaluate(scenario.pump_power)?;
    out.push_str(&format!(
        "cavity: {} (g1*·g2* = {:.9})\n",
        report.stability.label(),
        report.equivalent.g_product()
    ));
    if let (Some(w), Some(zr)) = (report.waist_m1, report.rayleigh_range_m1) {
        out.push_str(&format!(
            "fundamental waist at the gain mirror: {w:e} m (Rayleigh range {zr:e} m)\n"
        ));
    }
    if let Some(mode) = &report.mode {
        out.push_str(&format!(
            "transverse modes: M² = {:.6}, mode count = {}\n",
            mode.m_squared(),
            mode.mode_count
        ));
    }
    if let Some(r) = report.receiver_beam_radius {
        out.push_str(&format!(
            "beam diameter at the receiver pupil: {:e} m\n",
            2.0 * r
        ));
    }
    if let Some(g) = report.diffraction_survival {
        out.push_str(&format!("round-trip diffraction survival: {g:.9}\n"));
    }
    let ex = &report.extraction;
    if ex.threshold.is_finite() {
        out.push_str(&format!(
            "pump threshold: {:e} W (slope efficiency {:.9}); resonating: {}\n",
            ex.threshold, ex.slope_efficiency, ex.resonating
        ));
        out.push_str(&format!("fundamental beam power: {:e} W\n", ex.power));
    } else {
        out.push_str("pump threshold: unreachable (no resonant mode)\n");
    }
    if let (Some(shg), Some(valid), Some(area)) = (
        &report.shg,
        report.shg_plane_wave_valid,
        report.crystal_beam_area,
    ) {
        out.push_str(&format!(
            "second-harmonic power: {:e} W (beam area {area:e} m², plane-wave model valid: {valid}, clamped: {})\n",
            shg.power, shg.clamped
        ));
    }
    if let Some(link) = &report.link {
        out.push_str(&format!("received power: {:e} W\n", link.received_power));
        out.push_str(&format!(
            "electrical SNR: {:e} ({:.6} dB)\n",
            link.snr,
            link.snr_db()
        ));
        out.push_str(&format!(
            "spectral efficiency: {:.6} bit/s/Hz; capacity: {:e} bit/s\n",
            link.spectral_efficiency, link.capacity
        ));
        let cfg = scenario.ofdm_config()?;
        out.push_str(&format!(
            "modem rates: nominal {:e} bit/s, net {:e} bit/s\n",
            cfg.nominal_rate_bps(),
            cfg.net_rate_bps()
        ));
    }
    Ok(out)
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, text).map_err(CliError::Io),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let scenario = load_scenario(cli.config.as_deref())?;
    match cli.command {
        Command::Check => {
            let text = check_report(&scenario).map_err(CliError::Sim)?;
            print!("{text}");
            Ok(())
        }
        Command::Figure {
            name,
            output,
            samples,
        } => {
            let csv = figures::generate(&name, &scenario, samples).map_err(CliError::Sim)?;
            emit(&csv, output.as_deref())
        }
        Command::Sweep { output } => {
            if scenario.sweep.is_none() {
                return Err(CliError::Config(ConfigError::Invalid(
                    "the sweep command needs sweep_variable/sweep_start/sweep_stop/sweep_steps"
                        .into(),
                )));
            }
            let csv = sweep::run(&scenario).map_err(CliError::Sim)?;
            emit(&csv, output.as_deref())
        }
        Command::Ofdm {
            frames,
            seed,
            output,
            snr_db,
        } => {
            let outcome =
                ofdm_cmd::run(&scenario, frames, seed, snr_db.as_deref()).map_err(CliError::Sim)?;
            print!("{}", outcome.report_text);
            emit(&outcome.csv, output.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rbcom: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
