//! Photon flux, classical two-photon absorption (TPA) and entangled TPA rates.
//!
//! The per-atom rate for entangled pairs is `R = σ_e φ + σ_c φ²`: a linear
//! term from pairs absorbed as a unit plus the classical quadratic term.
//! The entangled cross-section is estimated as `σ_e ≈ σ_c / (A_e τ_e)`.
//!
//! Beams are top-hat (uniform over `π d²/4`) and pulses rectangular
//! (peak power = energy / width). Rates are perturbative and per atom.
//!
//! Every function that multiplies a cross-section by a flux requires both to
//! be in the same unit system (SI or cgs) and returns
//! [`QuantityError::UnitSystemMismatch`] otherwise. Convert explicitly first.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::biphoton::BiphotonField;
use crate::constants::{PLANCK, SPEED_OF_LIGHT};
use crate::quantities::{same_system, Dimension, Quantity, QuantityError, Unit, UnitSystem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RateError {
    #[error(transparent)]
    Quantity(#[from] QuantityError),
    #[error("{0}")]
    Domain(String),
}

type Result<T> = std::result::Result<T, RateError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum LaserMode {
    Cw { average_power: Quantity },
    Pulsed { pulse_energy: Quantity, pulse_width: Quantity, rep_rate: Quantity },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaserSource {
    #[serde(flatten)]
    pub mode: LaserMode,
    pub wavelength: Quantity,
}

impl LaserSource {
    pub fn cw(average_power: Quantity, wavelength: Quantity) -> Result<Self> {
        Self::new(LaserMode::Cw { average_power }, wavelength)
    }

    pub fn pulsed(
        pulse_energy: Quantity,
        pulse_width: Quantity,
        rep_rate: Quantity,
        wavelength: Quantity,
    ) -> Result<Self> {
        Self::new(LaserMode::Pulsed { pulse_energy, pulse_width, rep_rate }, wavelength)
    }

    pub fn new(mode: LaserMode, wavelength: Quantity) -> Result<Self> {
        positive(&wavelength, Dimension::Length, "wavelength")?;
        match mode {
            LaserMode::Cw { average_power } => {
                positive(&average_power, Dimension::Power, "average power")?;
            }
            LaserMode::Pulsed { pulse_energy, pulse_width, rep_rate } => {
                positive(&pulse_energy, Dimension::Energy, "pulse energy")?;
                let width = positive(&pulse_width, Dimension::Time, "pulse width")?;
                let rep = positive(&rep_rate, Dimension::Frequency, "repetition rate")?;
                if width * rep > 1.0 {
                    return Err(RateError::Domain(format!(
                        "duty cycle {} exceeds 1 (pulse width {pulse_width}, rep rate {rep_rate})",
                        width * rep
                    )));
                }
            }
        }
        Ok(LaserSource { mode, wavelength })
    }

    /// Average power in W.
    pub fn average_power(&self) -> f64 {
        match self.mode {
            LaserMode::Cw { average_power } => average_power.si(),
            LaserMode::Pulsed { pulse_energy, rep_rate, .. } => pulse_energy.si() * rep_rate.si(),
        }
    }

    /// Fraction of time the laser is on; 1 for CW.
    pub fn duty_cycle(&self) -> f64 {
        match self.mode {
            LaserMode::Cw { .. } => 1.0,
            LaserMode::Pulsed { pulse_width, rep_rate, .. } => pulse_width.si() * rep_rate.si(),
        }
    }

    /// Peak power in W.
    pub fn peak_power(&self) -> f64 {
        match self.mode {
            LaserMode::Cw { average_power } => average_power.si(),
            LaserMode::Pulsed { pulse_energy, pulse_width, .. } => pulse_energy.si() / pulse_width.si(),
        }
    }
}

fn positive(q: &Quantity, dimension: Dimension, what: &str) -> Result<f64> {
    let v = q.si_as(dimension)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(RateError::Domain(format!("{what} must be positive, got {q}")))
    }
}

/// Focal spot of the laser at the target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BeamGeometry {
    pub spot_diameter: Quantity,
}

impl BeamGeometry {
    pub fn new(spot_diameter: Quantity) -> Result<Self> {
        positive(&spot_diameter, Dimension::Length, "spot diameter")?;
        Ok(BeamGeometry { spot_diameter })
    }

    /// `π d² / 4` in m².
    pub fn area_si(&self) -> f64 {
        let d = self.spot_diameter.si();
        PI * d * d / 4.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetSpecies {
    pub name: String,
    pub sigma_c: Quantity,
}

impl TargetSpecies {
    pub fn new(name: impl Into<String>, sigma_c: Quantity) -> Result<Self> {
        positive(&sigma_c, Dimension::ClassicalCrossSection, "classical TPA cross-section")?;
        Ok(TargetSpecies { name: name.into(), sigma_c })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhotonFlux {
    pub average: Quantity,
    pub peak: Quantity,
}

/// Average and peak photon flux `P λ / (h c A)`, in m⁻²·s⁻¹.
pub fn photon_flux(src: &LaserSource, geom: &BeamGeometry) -> Result<PhotonFlux> {
    let per_watt = src.wavelength.si() / (PLANCK * SPEED_OF_LIGHT * geom.area_si());
    let average = src.average_power() * per_watt;
    let peak = match src.mode {
        LaserMode::Cw { .. } => average,
        LaserMode::Pulsed { .. } => src.peak_power() * per_watt,
    };
    Ok(PhotonFlux {
        average: Quantity::new(average, Unit::FluxPerSquareMeter)?,
        peak: Quantity::new(peak, Unit::FluxPerSquareMeter)?,
    })
}

fn flux_unit(system: UnitSystem) -> Unit {
    match system {
        UnitSystem::Cgs => Unit::FluxPerSquareCentimeter,
        _ => Unit::FluxPerSquareMeter,
    }
}

fn entangled_unit(system: UnitSystem) -> Unit {
    match system {
        UnitSystem::Cgs => Unit::EntangledSquareCentimeter,
        _ => Unit::EntangledSquareMeter,
    }
}

/// `R = σ_c φ²`, per atom per second.
pub fn classical_tpa_rate(sigma_c: Quantity, flux: Quantity) -> Result<Quantity> {
    let s = sigma_c.si_as(Dimension::ClassicalCrossSection)?;
    let phi = flux.si_as(Dimension::PhotonFlux)?;
    same_system(&sigma_c, &flux)?;
    Ok(Quantity::new(s * phi * phi, Unit::PerSecond)?)
}

/// Time-averaged classical rate of a pulsed source: `σ_c φ_peak² · duty`.
pub fn time_averaged_pulsed_rate(sigma_c: Quantity, src: &LaserSource, geom: &BeamGeometry) -> Result<Quantity> {
    if !matches!(src.mode, LaserMode::Pulsed { .. }) {
        return Err(RateError::Domain("time-averaged pulsed rate needs a pulsed source".into()));
    }
    let duty = src.duty_cycle();
    if duty > 1.0 {
        return Err(RateError::Domain(format!("duty cycle {duty} exceeds 1")));
    }
    let system = sigma_c.unit().system();
    let peak = photon_flux(src, geom)?.peak.convert(flux_unit(system))?;
    let peak_rate = classical_tpa_rate(sigma_c, peak)?;
    Ok(Quantity::new(peak_rate.value() * duty, Unit::PerSecond)?)
}

/// `σ_e = σ_c / (A_e τ_e)`, in the unit system of `sigma_c`.
pub fn etpa_cross_section(
    sigma_c: Quantity,
    entangled_area: Quantity,
    entanglement_time: Quantity,
) -> Result<Quantity> {
    let s = sigma_c.si_as(Dimension::ClassicalCrossSection)?;
    let a = positive(&entangled_area, Dimension::Area, "entangled area")?;
    let t = positive(&entanglement_time, Dimension::Time, "entanglement time")?;
    if s < 0.0 {
        return Err(RateError::Domain(format!("classical cross-section must be non-negative, got {sigma_c}")));
    }
    let system = same_system(&sigma_c, &entangled_area)?;
    let sigma_e = Quantity::new(s / (a * t), Unit::EntangledSquareMeter)?;
    Ok(sigma_e.convert(entangled_unit(system))?)
}

/// `R = σ_e φ + σ_c φ²`, per atom per second.
pub fn etpa_rate(sigma_e: Quantity, sigma_c: Quantity, flux: Quantity) -> Result<Quantity> {
    let (linear, quadratic) = etpa_rate_terms(sigma_e, sigma_c, flux)?;
    Ok(Quantity::new(linear + quadratic, Unit::PerSecond)?)
}

/// The linear and quadratic terms of [`etpa_rate`], in s⁻¹.
pub fn etpa_rate_terms(sigma_e: Quantity, sigma_c: Quantity, flux: Quantity) -> Result<(f64, f64)> {
    let se = sigma_e.si_as(Dimension::EntangledCrossSection)?;
    let sc = sigma_c.si_as(Dimension::ClassicalCrossSection)?;
    let phi = flux.si_as(Dimension::PhotonFlux)?;
    same_system(&sigma_e, &flux)?;
    same_system(&sigma_c, &flux)?;
    same_system(&sigma_e, &sigma_c)?;
    Ok((se * phi, sc * phi * phi))
}

/// Flux at which the two rate terms are equal: `φ_crit = σ_e / σ_c`.
pub fn critical_flux(sigma_e: Quantity, sigma_c: Quantity) -> Result<Quantity> {
    let se = sigma_e.si_as(Dimension::EntangledCrossSection)?;
    let sc = positive(&sigma_c, Dimension::ClassicalCrossSection, "classical cross-section")?;
    let system = same_system(&sigma_e, &sigma_c)?;
    let phi = Quantity::new(se / sc, Unit::FluxPerSquareMeter)?;
    Ok(phi.convert(flux_unit(system))?)
}

/// The classical rate obtained by multiplying a cm⁴·s cross-section by a
/// flux expressed in m⁻²·s⁻¹ without converting. Reported alongside the
/// consistent value so the size of that error is visible.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixedUnitReading {
    pub classical_rate_average_mixed_s1: f64,
    pub classical_rate_average_consistent_s1: f64,
    /// mixed / consistent; 1e8 for any inputs, since (m⁻²/cm⁻²)² = 1e-8.
    pub inflation_factor: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub species: String,
    pub laser: LaserSource,
    pub spot_diameter: Quantity,
    pub sigma_c: Quantity,
    pub flux_average: Quantity,
    pub flux_peak: Quantity,
    pub duty_cycle: f64,
    pub classical_rate_average: Quantity,
    pub classical_rate_peak: Quantity,
    pub entanglement_time: Quantity,
    pub entangled_area: Quantity,
    pub entangled_cross_section: Quantity,
    /// `σ_e φ + σ_c φ²` at the laser's average flux.
    pub entangled_rate: Quantity,
    /// Entangled photon flux delivered by the pair source (2 photons per pair).
    pub biphoton_photon_flux: Quantity,
    pub entangled_rate_biphoton: Quantity,
    pub critical_flux: Quantity,
    pub mixed_unit_reading: MixedUnitReading,
}

/// Assemble every rate quantity for one laser, target and pair source.
/// Fluxes are converted into the cross-section's unit system before use.
pub fn build_rate_report(
    src: &LaserSource,
    geom: &BeamGeometry,
    species: &TargetSpecies,
    biphoton: &BiphotonField,
) -> Result<RateReport> {
    let sigma_c = species.sigma_c;
    let system = sigma_c.unit().system();
    let fu = flux_unit(system);
    let flux = photon_flux(src, geom)?;
    let avg = flux.average.convert(fu)?;
    let peak = flux.peak.convert(fu)?;

    let classical_rate_peak = classical_tpa_rate(sigma_c, peak)?;
    let classical_rate_average = match src.mode {
        LaserMode::Cw { .. } => classical_tpa_rate(sigma_c, avg)?,
        LaserMode::Pulsed { .. } => time_averaged_pulsed_rate(sigma_c, src, geom)?,
    };

    let area_unit = match system {
        UnitSystem::Cgs => Unit::SquareCentimeter,
        _ => Unit::SquareMeter,
    };
    let entangled_area = biphoton.entangled_area.convert(area_unit)?;
    let sigma_e = etpa_cross_section(sigma_c, entangled_area, biphoton.entanglement_time)?;
    let entangled_rate = etpa_rate(sigma_e, sigma_c, avg)?;
    let biphoton_photon_flux =
        Quantity::new(2.0 * biphoton.pair_flux.si_as(Dimension::PhotonFlux)?, Unit::FluxPerSquareMeter)?.convert(fu)?;
    let entangled_rate_biphoton = etpa_rate(sigma_e, sigma_c, biphoton_photon_flux)?;
    let critical_flux = critical_flux(sigma_e, sigma_c)?;

    let sigma_c_cgs = sigma_c.value_in(Unit::Centimeter4Second)?;
    let avg_si = flux.average.si();
    let peak_si = flux.peak.si();
    let mixed = match src.mode {
        LaserMode::Cw { .. } => sigma_c_cgs * avg_si * avg_si,
        LaserMode::Pulsed { .. } => sigma_c_cgs * peak_si * peak_si * src.duty_cycle(),
    };
    let consistent = classical_rate_average.value();
    let inflation = mixed / consistent;
    let mixed_unit_reading = MixedUnitReading {
        classical_rate_average_mixed_s1: mixed,
        classical_rate_average_consistent_s1: consistent,
        inflation_factor: inflation,
        note: format!(
            "inserting the flux in m^-2 s^-1 into a cm^4 s cross-section gives {mixed:.3e} s^-1; \
             consistent units give {consistent:.3e} s^-1 (factor {inflation:.3e}); \
             the consistent value is the one reported"
        ),
    };

    Ok(RateReport {
        species: species.name.clone(),
        laser: *src,
        spot_diameter: geom.spot_diameter,
        sigma_c,
        flux_average: flux.average,
        flux_peak: flux.peak,
        duty_cycle: src.duty_cycle(),
        classical_rate_average,
        classical_rate_peak,
        entanglement_time: biphoton.entanglement_time,
        entangled_area,
        entangled_cross_section: sigma_e,
        entangled_rate,
        biphoton_photon_flux,
        entangled_rate_biphoton,
        critical_flux,
        mixed_unit_reading,
    })
}
