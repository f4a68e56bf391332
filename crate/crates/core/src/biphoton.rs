//! Spontaneous parametric down-conversion (SPDC) source model.
//!
//! A pump photon at `f_p` splits into a pair with `f₁ + f₂ = f_p`. The pair's
//! arrival-time correlation width (the entanglement time) is set by the
//! biphoton bandwidth through `τ_e = κ / Δf`, where κ is the time-bandwidth
//! convention (1 for a bare reciprocal, 0.44 for Gaussian pulses, ...).
//!
//! The linear-in-flux ETPA rate presumes strongly bunched pairs,
//! g⁽²⁾(0) ≫ 1. That property is assumed, not computed. The pump linewidth is
//! carried through as the linewidth of the pair's sum frequency; no joint
//! spectral amplitude is modelled.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{PLANCK, SPEED_OF_LIGHT};
use crate::quantities::{Dimension, Quantity, QuantityError, Unit, UnitSystem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BiphotonError {
    #[error(transparent)]
    Quantity(#[from] QuantityError),
    #[error("{0}")]
    Domain(String),
    #[error("collinear beams have unbounded overlap")]
    CollinearOverlap,
}

type Result<T> = std::result::Result<T, BiphotonError>;

/// CW pump laser driving the down-conversion crystal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PumpLaser {
    pub wavelength: Quantity,
    /// Pump linewidth δf_p; equals the linewidth of f₁ + f₂.
    pub linewidth: Quantity,
    pub power: Quantity,
}

impl PumpLaser {
    pub fn new(wavelength: Quantity, linewidth: Quantity, power: Quantity) -> Result<Self> {
        if wavelength.si_as(Dimension::Length)? <= 0.0 {
            return Err(BiphotonError::Domain(format!("pump wavelength must be positive, got {wavelength}")));
        }
        if linewidth.si_as(Dimension::Frequency)? < 0.0 {
            return Err(BiphotonError::Domain(format!("pump linewidth must be non-negative, got {linewidth}")));
        }
        power.expect(Dimension::Power)?;
        Ok(PumpLaser { wavelength, linewidth, power })
    }

    pub fn frequency(&self) -> Quantity {
        self.wavelength.convert(Unit::Hertz).expect("positive wavelength")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpdcType {
    /// Parallel polarizations.
    #[serde(rename = "I")]
    TypeI,
    /// Perpendicular polarizations.
    #[serde(rename = "II")]
    TypeII,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PairGeometry {
    Collinear,
    NonCollinear { crossing_angle_rad: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpdcConfig {
    pub spdc_type: SpdcType,
    pub geometry: PairGeometry,
    /// Biphoton bandwidth Δf.
    pub bandwidth: Quantity,
    /// Beam diameter at the target.
    pub beam_diameter: Quantity,
    /// Replaces the πd²/4 entangled area when set.
    pub area_override: Option<Quantity>,
    /// Pairs per pump photon.
    pub efficiency: f64,
    /// Time-bandwidth factor κ in τ_e = κ/Δf.
    pub kappa: f64,
}

impl SpdcConfig {
    pub fn validate(&self) -> Result<()> {
        if let PairGeometry::NonCollinear { crossing_angle_rad } = self.geometry {
            if !(crossing_angle_rad > 0.0 && crossing_angle_rad <= PI / 2.0) {
                return Err(BiphotonError::Domain(format!(
                    "crossing angle must lie in (0, π/2], got {crossing_angle_rad} rad"
                )));
            }
        }
        if self.bandwidth.si_as(Dimension::Frequency)? <= 0.0 {
            return Err(BiphotonError::Domain(format!("biphoton bandwidth must be positive, got {}", self.bandwidth)));
        }
        if self.beam_diameter.si_as(Dimension::Length)? <= 0.0 {
            return Err(BiphotonError::Domain(format!("beam diameter must be positive, got {}", self.beam_diameter)));
        }
        if let Some(area) = self.area_override {
            if area.si_as(Dimension::Area)? <= 0.0 {
                return Err(BiphotonError::Domain(format!("entangled area must be positive, got {area}")));
            }
        }
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(BiphotonError::Domain(format!(
                "conversion efficiency must lie in [0, 1], got {}",
                self.efficiency
            )));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(BiphotonError::Domain(format!("time-bandwidth factor must be positive, got {}", self.kappa)));
        }
        Ok(())
    }
}

/// Derived properties of the pair field at the target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiphotonField {
    pub degenerate_wavelength: Quantity,
    pub entanglement_time: Quantity,
    pub entangled_area: Quantity,
    /// Pairs per unit area per second over the entangled area.
    pub pair_flux: Quantity,
    /// Pairs per second.
    pub pair_rate: Quantity,
    pub sum_frequency_linewidth: Quantity,
    /// Beam-overlap volume for non-collinear geometries.
    pub crossing_volume: Option<Quantity>,
}

/// `τ_e = κ / Δf`, returned in seconds.
pub fn entanglement_time(bandwidth: Quantity, kappa: f64) -> Result<Quantity> {
    let df = bandwidth.si_as(Dimension::Frequency)?;
    if df <= 0.0 {
        return Err(BiphotonError::Domain(format!("bandwidth must be positive, got {bandwidth}")));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(BiphotonError::Domain(format!("time-bandwidth factor must be positive, got {kappa}")));
    }
    Ok(Quantity::new(kappa / df, Unit::Second)?)
}

/// Split a pump frequency into `(f₁, f₂) = (f_p/2 − Δ/2, f_p/2 + Δ/2)`.
///
/// The larger frequency is rounded once and the smaller is taken as
/// `f_p − f_hi`, which is exact in floating point, so `f₁ + f₂ == f_p`
/// holds bit-for-bit.
pub fn pair_frequencies(pump_frequency: Quantity, detuning: Quantity) -> Result<(Quantity, Quantity)> {
    let fp = pump_frequency.si_as(Dimension::Frequency)?;
    let delta = detuning.si_as(Dimension::Frequency)?;
    if fp <= 0.0 {
        return Err(BiphotonError::Domain(format!("pump frequency must be positive, got {pump_frequency}")));
    }
    if delta.abs() >= fp {
        return Err(BiphotonError::Domain(format!(
            "detuning {detuning} would produce a negative frequency for pump {pump_frequency}"
        )));
    }
    let hi = fp / 2.0 + delta.abs() / 2.0;
    let lo = fp - hi;
    let (f1, f2) = if delta >= 0.0 { (lo, hi) } else { (hi, lo) };
    Ok((Quantity::new(f1, Unit::Hertz)?, Quantity::new(f2, Unit::Hertz)?))
}

/// `η · P / (h f_p)`, pairs per second.
pub fn pair_rate(pump: &PumpLaser, cfg: &SpdcConfig) -> Result<Quantity> {
    let power = pump.power.si_as(Dimension::Power)?;
    let lambda = pump.wavelength.si_as(Dimension::Length)?;
    let photons_per_second = power * lambda / (PLANCK * SPEED_OF_LIGHT);
    Ok(Quantity::new(cfg.efficiency * photons_per_second, Unit::PerSecond)?)
}

/// Entangled area: the override if given, else `π d²/4` in the diameter's
/// unit system.
pub fn entangled_area(cfg: &SpdcConfig) -> Result<Quantity> {
    if let Some(area) = cfg.area_override {
        area.expect(Dimension::Area)?;
        return Ok(area);
    }
    let d = cfg.beam_diameter.si_as(Dimension::Length)?;
    if d <= 0.0 {
        return Err(BiphotonError::Domain(format!("beam diameter must be positive, got {}", cfg.beam_diameter)));
    }
    let area = Quantity::new(PI * d * d / 4.0, Unit::SquareMeter)?;
    Ok(match cfg.beam_diameter.unit().system() {
        UnitSystem::Cgs => area.convert(Unit::SquareCentimeter)?,
        _ => area,
    })
}

/// Volume common to two equal circular beams of diameter `d` crossing at
/// `θ`: `2 d³ / (3 sin θ)`. At θ = π/2 this is the Steinmetz bicylinder.
pub fn crossing_volume(diameter: Quantity, crossing_angle_rad: f64) -> Result<Quantity> {
    let d = diameter.si_as(Dimension::Length)?;
    if crossing_angle_rad == 0.0 {
        return Err(BiphotonError::CollinearOverlap);
    }
    if !(crossing_angle_rad > 0.0 && crossing_angle_rad <= PI / 2.0) {
        return Err(BiphotonError::Domain(format!(
            "crossing angle must lie in (0, π/2], got {crossing_angle_rad} rad"
        )));
    }
    if d <= 0.0 {
        return Err(BiphotonError::Domain(format!("beam diameter must be positive, got {diameter}")));
    }
    Ok(Quantity::new(2.0 * d.powi(3) / (3.0 * crossing_angle_rad.sin()), Unit::CubicMeter)?)
}

/// Pump plus down-conversion configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiphotonSource {
    pub pump: PumpLaser,
    pub config: SpdcConfig,
}

impl BiphotonSource {
    pub fn new(pump: PumpLaser, config: SpdcConfig) -> Result<Self> {
        config.validate()?;
        Ok(BiphotonSource { pump, config })
    }

    pub fn field(&self) -> Result<BiphotonField> {
        let degenerate_wavelength = Quantity::new(2.0 * self.pump.wavelength.value(), self.pump.wavelength.unit())?;
        let entanglement_time = entanglement_time(self.config.bandwidth, self.config.kappa)?;
        let entangled_area = entangled_area(&self.config)?;
        let pair_rate = pair_rate(&self.pump, &self.config)?;
        let pair_flux =
            Quantity::new(pair_rate.si() / entangled_area.si_as(Dimension::Area)?, Unit::FluxPerSquareMeter)?;
        let crossing_volume = match self.config.geometry {
            PairGeometry::Collinear => None,
            PairGeometry::NonCollinear { crossing_angle_rad } => {
                Some(crossing_volume(self.config.beam_diameter, crossing_angle_rad)?)
            }
        };
        Ok(BiphotonField {
            degenerate_wavelength,
            entanglement_time,
            entangled_area,
            pair_flux,
            pair_rate,
            sum_frequency_linewidth: self.pump.linewidth,
            crossing_volume,
        })
    }
}
