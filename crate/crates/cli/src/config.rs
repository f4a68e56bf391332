//! Run configuration: a JSON document whose sections mirror the library
//! inputs. Every dimensioned value is a `"<number> <unit>"` string.
//!
//! Precedence, highest first: command-line flags, the config file, the
//! built-in defaults (the 1 W / 10 um / 400 nm worked example and the
//! bundled Ar II sample data).

use std::fs;
use std::path::{Path, PathBuf};

use etpa_core::atomic::{parse_level_table, parse_line_table, LevelTable, LineTable, TableFormat};
use etpa_core::biphoton::{PairGeometry, PumpLaser, SpdcConfig, SpdcType};
use etpa_core::finder::{ScoreWeights, SearchConstraints};
use etpa_core::plasma::{parse_collision_table, parse_rate_table, CollisionData, RateCoefficientTable};
use etpa_core::quantities::{wavelength_width_to_frequency, Dimension, Quantity, Unit};
use etpa_core::rates::{BeamGeometry, LaserSource, TargetSpecies};
use etpa_core::samples;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub laser: LaserSection,
    pub spdc: SpdcSection,
    pub species: SpeciesSection,
    pub files: FilesSection,
    pub search: SearchSection,
    pub plasma: PlasmaSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LaserSection {
    /// `cw` or `pulsed`.
    pub mode: Option<String>,
    pub power: Option<String>,
    pub pulse_energy: Option<String>,
    pub pulse_width: Option<String>,
    pub rep_rate: Option<String>,
    pub wavelength: Option<String>,
    pub spot_diameter: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpdcSection {
    pub pump_wavelength: Option<String>,
    pub pump_linewidth: Option<String>,
    pub pump_power: Option<String>,
    /// `I` or `II`.
    #[serde(rename = "type")]
    pub spdc_type: Option<String>,
    /// `collinear` or `non-collinear`.
    pub geometry: Option<String>,
    pub crossing_angle: Option<String>,
    /// Biphoton bandwidth as a frequency; alternatively `linewidth` and
    /// `center` as wavelengths.
    pub bandwidth: Option<String>,
    pub linewidth: Option<String>,
    pub center: Option<String>,
    pub beam_diameter: Option<String>,
    pub entangled_area: Option<String>,
    pub efficiency: Option<f64>,
    pub kappa: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpeciesSection {
    pub name: Option<String>,
    pub sigma_c: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilesSection {
    pub levels: Option<PathBuf>,
    pub lines: Option<PathBuf>,
    pub collisions: Option<PathBuf>,
    pub rate_coefficients: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSection {
    pub pump_window: Option<[String; 2]>,
    pub require_intermediate_path: Option<bool>,
    pub relax_intermediate_energy: Option<bool>,
    /// Allow spin-changing E1 steps through the intermediate level.
    pub allow_intercombination: Option<bool>,
    pub apply_j_rule: Option<bool>,
    pub weights: WeightsSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightsSection {
    pub lower_population: Option<f64>,
    pub branching: Option<f64>,
    pub inversion_penalty: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlasmaSection {
    pub te: Option<String>,
    pub n_e: Option<String>,
    /// Ground plus metastables; found from the line table when absent.
    pub drivers: Option<Vec<String>>,
    pub driver_populations: Option<Vec<f64>>,
}

impl RunConfig {
    /// Read a config file. Relative file paths inside it are resolved
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read config {}: {e}", path.display())))?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        let mut cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let at = e.path().to_string();
            CliError::input(format!("config {}: {at}: {}", path.display(), e.into_inner()))
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in
            [&mut cfg.files.levels, &mut cfg.files.lines, &mut cfg.files.collisions, &mut cfg.files.rate_coefficients]
                .into_iter()
                .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

/// Parse `"<number> <unit>"` at config path `path` and check its dimension.
pub fn quantity(path: &str, text: &str, dimension: Dimension) -> Result<Quantity, CliError> {
    let q: Quantity = text.parse().map_err(|e| CliError::input(format!("{path}: {e}")))?;
    q.expect(dimension).map_err(|e| CliError::input(format!("{path}: {e}")))?;
    Ok(q)
}

fn quantity_or(path: &str, text: &Option<String>, default: &str, dimension: Dimension) -> Result<Quantity, CliError> {
    quantity(path, text.as_deref().unwrap_or(default), dimension)
}

fn at<T, E: std::fmt::Display>(path: &str, r: Result<T, E>) -> Result<T, CliError> {
    r.map_err(|e| CliError::input(format!("{path}: {e}")))
}

impl LaserSection {
    pub fn source(&self) -> Result<LaserSource, CliError> {
        let wavelength = quantity_or("laser.wavelength", &self.wavelength, "400 nm", Dimension::Length)?;
        match self.mode.as_deref().unwrap_or("cw") {
            "cw" => {
                let power = quantity_or("laser.power", &self.power, "1 W", Dimension::Power)?;
                at("laser", LaserSource::cw(power, wavelength))
            }
            "pulsed" => {
                let need = |path: &str, v: &Option<String>, dim| match v {
                    Some(text) => quantity(path, text, dim),
                    None => Err(CliError::input(format!("{path}: required for a pulsed laser"))),
                };
                let energy = need("laser.pulse_energy", &self.pulse_energy, Dimension::Energy)?;
                let width = need("laser.pulse_width", &self.pulse_width, Dimension::Time)?;
                let rep = need("laser.rep_rate", &self.rep_rate, Dimension::Frequency)?;
                at("laser", LaserSource::pulsed(energy, width, rep, wavelength))
            }
            other => Err(CliError::input(format!("laser.mode: expected 'cw' or 'pulsed', got '{other}'"))),
        }
    }

    pub fn geometry(&self) -> Result<BeamGeometry, CliError> {
        let d = quantity_or("laser.spot_diameter", &self.spot_diameter, "10 um", Dimension::Length)?;
        at("laser.spot_diameter", BeamGeometry::new(d))
    }
}

impl SpeciesSection {
    pub fn species(&self) -> Result<TargetSpecies, CliError> {
        let sigma_c = quantity_or("species.sigma_c", &self.sigma_c, "1e-48 cm4s", Dimension::ClassicalCrossSection)?;
        at("species", TargetSpecies::new(self.name.clone().unwrap_or_else(|| "target".into()), sigma_c))
    }
}

impl SpdcSection {
    pub fn pump(&self) -> Result<PumpLaser, CliError> {
        let wavelength = quantity_or("spdc.pump_wavelength", &self.pump_wavelength, "400 nm", Dimension::Length)?;
        let linewidth = quantity_or("spdc.pump_linewidth", &self.pump_linewidth, "1 MHz", Dimension::Frequency)?;
        let power = quantity_or("spdc.pump_power", &self.pump_power, "70 mW", Dimension::Power)?;
        at("spdc", PumpLaser::new(wavelength, linewidth, power))
    }

    pub fn config(&self) -> Result<SpdcConfig, CliError> {
        let spdc_type = match self.spdc_type.as_deref().unwrap_or("I") {
            "I" => SpdcType::TypeI,
            "II" => SpdcType::TypeII,
            other => return Err(CliError::input(format!("spdc.type: expected 'I' or 'II', got '{other}'"))),
        };
        let geometry = match (self.geometry.as_deref().unwrap_or("collinear"), &self.crossing_angle) {
            ("collinear", None) => PairGeometry::Collinear,
            ("collinear", Some(_)) => {
                return Err(CliError::input("spdc.crossing_angle: only valid for a non-collinear geometry"))
            }
            ("non-collinear", angle) => {
                let angle = quantity_or("spdc.crossing_angle", angle, "90 deg", Dimension::Angle)?;
                PairGeometry::NonCollinear { crossing_angle_rad: angle.si() }
            }
            (other, _) => {
                return Err(CliError::input(format!(
                    "spdc.geometry: expected 'collinear' or 'non-collinear', got '{other}'"
                )))
            }
        };
        let bandwidth = match (&self.bandwidth, &self.linewidth, &self.center) {
            (Some(b), None, None) => quantity("spdc.bandwidth", b, Dimension::Frequency)?,
            (None, Some(w), Some(c)) => {
                let w = quantity("spdc.linewidth", w, Dimension::Length)?;
                let c = quantity("spdc.center", c, Dimension::Length)?;
                at("spdc.linewidth", wavelength_width_to_frequency(w, c))?
            }
            (None, None, None) => quantity("spdc.bandwidth", "100 THz", Dimension::Frequency)?,
            _ => return Err(CliError::input("spdc.bandwidth: give either bandwidth or both linewidth and center")),
        };
        let beam_diameter = quantity_or("spdc.beam_diameter", &self.beam_diameter, "10 um", Dimension::Length)?;
        // An explicit area wins; a diameter alone means πd²/4; with neither,
        // the (10 um)² worked-example area is used.
        let area_override = match (&self.entangled_area, &self.beam_diameter) {
            (Some(a), _) => Some(quantity("spdc.entangled_area", a, Dimension::Area)?),
            (None, Some(_)) => None,
            (None, None) => Some(quantity("spdc.entangled_area", "1e-6 cm2", Dimension::Area)?),
        };
        let cfg = SpdcConfig {
            spdc_type,
            geometry,
            bandwidth,
            beam_diameter,
            area_override,
            efficiency: self.efficiency.unwrap_or(7e-11),
            kappa: self.kappa.unwrap_or(1.0),
        };
        at("spdc", cfg.validate())?;
        Ok(cfg)
    }
}

impl SearchSection {
    pub fn constraints(&self) -> Result<SearchConstraints, CliError> {
        let d = SearchConstraints::default();
        let pump_window_nm = match &self.pump_window {
            Some([lo, hi]) => {
                let nm = |path: &str, text: &str| -> Result<f64, CliError> {
                    at(path, quantity(path, text, Dimension::Length)?.value_in(Unit::Nanometer))
                };
                (nm("search.pump_window[0]", lo)?, nm("search.pump_window[1]", hi)?)
            }
            None => d.pump_window_nm,
        };
        let c = SearchConstraints {
            pump_window_nm,
            require_intermediate_path: self.require_intermediate_path.unwrap_or(d.require_intermediate_path),
            relax_intermediate_energy: self.relax_intermediate_energy.unwrap_or(d.relax_intermediate_energy),
            allow_intercombination: self.allow_intercombination.unwrap_or(d.allow_intercombination),
            apply_j_rule: self.apply_j_rule.unwrap_or(d.apply_j_rule),
        };
        at("search.pump_window", c.validate())?;
        Ok(c)
    }

    pub fn weights(&self) -> ScoreWeights {
        let d = ScoreWeights::default();
        ScoreWeights {
            lower_population: self.weights.lower_population.unwrap_or(d.lower_population),
            branching: self.weights.branching.unwrap_or(d.branching),
            inversion_penalty: self.weights.inversion_penalty.unwrap_or(d.inversion_penalty),
        }
    }
}

impl PlasmaSection {
    pub fn te_ev(&self) -> Result<f64, CliError> {
        let te = quantity_or("plasma.te", &self.te, "3 eV", Dimension::Energy)?;
        at("plasma.te", te.value_in(Unit::ElectronVolt))
    }

    pub fn n_e_cm3(&self) -> Result<f64, CliError> {
        let ne = quantity_or("plasma.n_e", &self.n_e, "3e13 cm-3", Dimension::NumberDensity)?;
        at("plasma.n_e", ne.value_in(Unit::PerCubicCentimeter))
    }
}

fn format_for(path: &Path) -> TableFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("tsv") | Some("tab") => TableFormat { delimiter: b'\t' },
        _ => TableFormat::default(),
    }
}

fn open(key: &str, path: &Path) -> Result<fs::File, CliError> {
    fs::File::open(path).map_err(|e| CliError::input(format!("{key}: cannot open {}: {e}", path.display())))
}

/// Level and line tables from the configured files, or the bundled sample
/// when no level file is given.
pub struct AtomicInputs {
    pub levels: LevelTable,
    pub lines: LineTable,
    pub collisions: Option<CollisionData>,
    pub sources: Vec<String>,
}

impl FilesSection {
    pub fn atomic(&self, want_collisions: bool) -> Result<AtomicInputs, CliError> {
        let Some(level_path) = &self.levels else {
            if self.lines.is_some() || self.collisions.is_some() {
                return Err(CliError::input("files.levels: required when lines or collisions are given"));
            }
            let levels = at("sample levels", samples::ar_ii_levels())?;
            let lines = at("sample lines", samples::ar_ii_lines(&levels))?;
            let collisions =
                if want_collisions { Some(at("sample collisions", samples::ar_ii_collisions(&levels))?) } else { None };
            return Ok(AtomicInputs { levels, lines, collisions, sources: vec!["bundled Ar II sample".into()] });
        };
        let mut sources = vec![level_path.display().to_string()];
        let levels = at("files.levels", parse_level_table(open("files.levels", level_path)?, format_for(level_path)))?;
        let lines = match &self.lines {
            Some(p) => {
                sources.push(p.display().to_string());
                at("files.lines", parse_line_table(open("files.lines", p)?, format_for(p), &levels))?
            }
            None => LineTable::default(),
        };
        let collisions = match (&self.collisions, want_collisions) {
            (Some(p), true) => {
                sources.push(p.display().to_string());
                Some(at(
                    "files.collisions",
                    parse_collision_table(open("files.collisions", p)?, format_for(p), &levels),
                )?)
            }
            _ => None,
        };
        Ok(AtomicInputs { levels, lines, collisions, sources })
    }

    pub fn rate_table(&self) -> Result<(RateCoefficientTable, String), CliError> {
        match &self.rate_coefficients {
            Some(p) => {
                let table = at(
                    "files.rate_coefficients",
                    parse_rate_table(open("files.rate_coefficients", p)?, format_for(p)),
                )?;
                Ok((table, p.display().to_string()))
            }
            None => Ok((at("sample rate table", samples::ar_rate_table())?, "bundled Ar sample".into())),
        }
    }
}
