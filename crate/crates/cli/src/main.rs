//! `etpa`: experiment-design calculations for entangled two-photon
//! absorption in plasmas.
//!
//! Exit codes: 0 success, 2 input or configuration error, 3 numerical
//! failure (singular or disconnected rate system).

mod commands;
mod config;
mod error;
mod output;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{OutputFormat, Rendered};

#[derive(Parser)]
#[command(name = "etpa", version, about = "Entangled two-photon absorption experiment design")]
struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Table)]
    output: OutputFormat,

    /// Print run metadata (version, inputs, time) to stderr.
    #[arg(long, global = true)]
    meta: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a value between units, e.g. `convert 400 nm cm-1`.
    Convert {
        #[arg(allow_negative_numbers = true)]
        value: f64,
        from: String,
        to: String,
    },
    /// Biphoton source properties.
    Source {
        #[command(flatten)]
        spdc: SpdcArgs,
        /// Signal detuning from the degenerate frequency, e.g. "5 THz".
        #[arg(long)]
        detuning: Option<String>,
    },
    /// Photon flux, classical and entangled TPA rates.
    Rates {
        #[command(flatten)]
        laser: LaserArgs,
        #[command(flatten)]
        spdc: SpdcArgs,
        /// Also evaluate the 1 W / 10 um / 400 nm worked example, including
        /// the mixed-unit reading of its classical rates.
        #[arg(long)]
        paper_check: bool,
    },
    /// Fractional abundance of each charge state versus Te.
    Abundance {
        /// Rate-coefficient CSV (`z,kind,Te_eV,coeff_cm3s`).
        #[arg(long, value_name = "PATH")]
        rates: Option<PathBuf>,
        /// `min:max:count` in eV.
        #[arg(long = "te-range", alias = "Te-range", default_value = "1:4:31")]
        te_range: String,
    },
    /// Steady-state collisional-radiative level populations.
    Populations {
        #[command(flatten)]
        files: FileArgs,
        #[command(flatten)]
        plasma: PlasmaArgs,
    },
    /// Two-photon transition candidates inside the pump window.
    Find {
        #[command(flatten)]
        files: FileArgs,
        #[command(flatten)]
        plasma: PlasmaArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Report which rules exclude the pair LOWER UPPER.
        #[arg(long, num_args = 2, value_names = ["LOWER", "UPPER"])]
        explain: Option<Vec<String>>,
    },
}

#[derive(Args, Default)]
struct LaserArgs {
    /// `cw` or `pulsed`.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    power: Option<String>,
    #[arg(long)]
    pulse_energy: Option<String>,
    #[arg(long)]
    pulse_width: Option<String>,
    #[arg(long)]
    rep_rate: Option<String>,
    #[arg(long)]
    wavelength: Option<String>,
    #[arg(long)]
    spot_diameter: Option<String>,
    #[arg(long)]
    species: Option<String>,
    #[arg(long)]
    sigma_c: Option<String>,
}

#[derive(Args, Default)]
struct SpdcArgs {
    #[arg(long)]
    pump_wavelength: Option<String>,
    #[arg(long)]
    pump_linewidth: Option<String>,
    #[arg(long)]
    pump_power: Option<String>,
    /// `I` or `II`.
    #[arg(long)]
    spdc_type: Option<String>,
    /// `collinear` or `non-collinear`.
    #[arg(long)]
    geometry: Option<String>,
    #[arg(long)]
    crossing_angle: Option<String>,
    #[arg(long)]
    bandwidth: Option<String>,
    #[arg(long)]
    beam_diameter: Option<String>,
    #[arg(long)]
    entangled_area: Option<String>,
    #[arg(long)]
    efficiency: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
}

#[derive(Args, Default)]
struct FileArgs {
    #[arg(long, value_name = "PATH")]
    levels: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    lines: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    collisions: Option<PathBuf>,
}

#[derive(Args, Default)]
struct PlasmaArgs {
    #[arg(long)]
    te: Option<String>,
    #[arg(long)]
    ne: Option<String>,
    /// Comma-separated driver level ids (ground first).
    #[arg(long, value_delimiter = ',')]
    drivers: Option<Vec<String>>,
}

#[derive(Args, Default)]
struct SearchArgs {
    #[arg(long)]
    window_min: Option<String>,
    #[arg(long)]
    window_max: Option<String>,
    #[arg(long)]
    no_intermediate_path: bool,
    #[arg(long)]
    relax_intermediate_energy: bool,
    /// Allow spin-changing E1 steps through the intermediate level.
    #[arg(long)]
    allow_intercombination: bool,
    #[arg(long)]
    j_rule: bool,
}

fn set<T>(slot: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}

impl LaserArgs {
    fn apply(self, cfg: &mut RunConfig) {
        let l = &mut cfg.laser;
        set(&mut l.mode, self.mode);
        set(&mut l.power, self.power);
        set(&mut l.pulse_energy, self.pulse_energy);
        set(&mut l.pulse_width, self.pulse_width);
        set(&mut l.rep_rate, self.rep_rate);
        set(&mut l.wavelength, self.wavelength);
        set(&mut l.spot_diameter, self.spot_diameter);
        set(&mut cfg.species.name, self.species);
        set(&mut cfg.species.sigma_c, self.sigma_c);
    }
}

impl SpdcArgs {
    fn apply(self, cfg: &mut RunConfig) {
        let s = &mut cfg.spdc;
        set(&mut s.pump_wavelength, self.pump_wavelength);
        set(&mut s.pump_linewidth, self.pump_linewidth);
        set(&mut s.pump_power, self.pump_power);
        set(&mut s.spdc_type, self.spdc_type);
        set(&mut s.geometry, self.geometry);
        set(&mut s.crossing_angle, self.crossing_angle);
        if self.bandwidth.is_some() {
            s.linewidth = None;
            s.center = None;
        }
        set(&mut s.bandwidth, self.bandwidth);
        set(&mut s.beam_diameter, self.beam_diameter);
        set(&mut s.entangled_area, self.entangled_area);
        set(&mut s.efficiency, self.efficiency);
        set(&mut s.kappa, self.kappa);
    }
}

impl FileArgs {
    fn apply(self, cfg: &mut RunConfig) {
        set(&mut cfg.files.levels, self.levels);
        set(&mut cfg.files.lines, self.lines);
        set(&mut cfg.files.collisions, self.collisions);
    }
}

impl PlasmaArgs {
    fn apply(self, cfg: &mut RunConfig) {
        set(&mut cfg.plasma.te, self.te);
        set(&mut cfg.plasma.n_e, self.ne);
        if self.drivers.is_some() {
            cfg.plasma.driver_populations = None;
        }
        set(&mut cfg.plasma.drivers, self.drivers);
    }
}

impl SearchArgs {
    fn apply(self, cfg: &mut RunConfig) {
        let s = &mut cfg.search;
        if self.window_min.is_some() || self.window_max.is_some() {
            let [lo, hi] = s.pump_window.clone().unwrap_or_else(|| ["350 nm".into(), "400 nm".into()]);
            s.pump_window = Some([self.window_min.unwrap_or(lo), self.window_max.unwrap_or(hi)]);
        }
        if self.no_intermediate_path {
            s.require_intermediate_path = Some(false);
        }
        if self.relax_intermediate_energy {
            s.relax_intermediate_energy = Some(true);
        }
        if self.allow_intercombination {
            s.allow_intercombination = Some(true);
        }
        if self.j_rule {
            s.apply_j_rule = Some(true);
        }
    }
}

fn run(cli: Cli) -> Result<(Rendered, &'static str), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let mut rendered = match cli.command {
        Command::Convert { value, from, to } => (commands::convert(value, &from, &to)?, "convert"),
        Command::Source { spdc, detuning } => {
            spdc.apply(&mut cfg);
            (commands::source(&cfg, detuning.as_deref())?, "source")
        }
        Command::Rates { laser, spdc, paper_check } => {
            laser.apply(&mut cfg);
            spdc.apply(&mut cfg);
            (commands::rates(&cfg, paper_check)?, "rates")
        }
        Command::Abundance { rates, te_range } => {
            set(&mut cfg.files.rate_coefficients, rates);
            let te = commands::parse_te_range(&te_range)?;
            (commands::abundance(&cfg, &te)?, "abundance")
        }
        Command::Populations { files, plasma } => {
            files.apply(&mut cfg);
            plasma.apply(&mut cfg);
            (commands::populations(&cfg)?, "populations")
        }
        Command::Find { files, plasma, search, explain } => {
            files.apply(&mut cfg);
            plasma.apply(&mut cfg);
            search.apply(&mut cfg);
            let pair = explain.as_ref().map(|v| (v[0].as_str(), v[1].as_str()));
            (commands::find(&cfg, pair)?, "find")
        }
    };
    if let Some(path) = &cli.config {
        rendered.0.inputs.insert(0, format!("config {}", path.display()));
    }
    Ok(rendered)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (format, meta) = (cli.output, cli.meta);
    let stdout = io::stdout();
    let stderr = io::stderr();
    match run(cli) {
        Ok((rendered, command)) => {
            if meta {
                let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
                let info = serde_json::json!({
                    "tool": "etpa",
                    "version": env!("CARGO_PKG_VERSION"),
                    "command": command,
                    "args": std::env::args().skip(1).collect::<Vec<_>>(),
                    "inputs": rendered.inputs,
                    "unix_time_s": started,
                });
                let _ = writeln!(stderr.lock(), "{info}");
            }
            match rendered.write(format, &mut stdout.lock(), &mut stderr.lock()) {
                Ok(()) => ExitCode::SUCCESS,
                // a closed pipe (`etpa ... | head`) is not a failure
                Err(e) if e.is_broken_pipe() => ExitCode::SUCCESS,
                Err(e) => {
                    let _ = writeln!(stderr.lock(), "error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
        Err(e) => {
            let _ = writeln!(stderr.lock(), "error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
