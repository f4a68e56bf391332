//! Unit-tagged physical quantities.
//!
//! Only the dimensions this crate needs are modelled. Energy, length and
//! frequency are inter-convertible through the spectroscopic relations
//! `E = h f = h c / λ`; every other dimension only converts within itself.
//! Internally every value can be brought to SI, but cgs units are first-class
//! because cross-sections are customarily quoted in cm⁴·s and cm².

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::constants::{EV_TO_J, PLANCK, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dimension {
    Energy,
    /// Lengths, including wavelengths.
    Length,
    Frequency,
    Time,
    Power,
    Area,
    Volume,
    PhotonFlux,
    ClassicalCrossSection,
    EntangledCrossSection,
    Rate,
    NumberDensity,
    Angle,
}

impl Dimension {
    /// Dimensions related by `E = h f = h c / λ`.
    pub fn is_spectral(self) -> bool {
        matches!(self, Dimension::Energy | Dimension::Length | Dimension::Frequency)
    }

    fn must_be_non_negative(self) -> bool {
        matches!(
            self,
            Dimension::PhotonFlux
                | Dimension::Area
                | Dimension::Volume
                | Dimension::Time
                | Dimension::ClassicalCrossSection
                | Dimension::EntangledCrossSection
                | Dimension::Power
                | Dimension::NumberDensity
        )
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Dimension::Energy => "energy",
            Dimension::Length => "length",
            Dimension::Frequency => "frequency",
            Dimension::Time => "time",
            Dimension::Power => "power",
            Dimension::Area => "area",
            Dimension::Volume => "volume",
            Dimension::PhotonFlux => "photon-flux",
            Dimension::ClassicalCrossSection => "cross-section-classical",
            Dimension::EntangledCrossSection => "cross-section-entangled",
            Dimension::Rate => "rate",
            Dimension::NumberDensity => "number-density",
            Dimension::Angle => "angle",
        };
        f.write_str(name)
    }
}

/// Which length unit a unit is built on. Used to refuse silently mixing
/// cgs cross-sections with SI fluxes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitSystem {
    Si,
    Cgs,
    /// Units with no length content (s, Hz, eV, W, ...).
    Neutral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    ElectronVolt,
    Wavenumber,
    Joule,
    Millijoule,
    Meter,
    Centimeter,
    Millimeter,
    Micrometer,
    Nanometer,
    Hertz,
    Megahertz,
    Gigahertz,
    Terahertz,
    Second,
    Nanosecond,
    Picosecond,
    Femtosecond,
    Watt,
    Milliwatt,
    SquareMeter,
    SquareCentimeter,
    SquareMicrometer,
    CubicMeter,
    CubicCentimeter,
    CubicMillimeter,
    FluxPerSquareMeter,
    FluxPerSquareCentimeter,
    Meter4Second,
    Centimeter4Second,
    EntangledSquareMeter,
    EntangledSquareCentimeter,
    PerSecond,
    PerCubicMeter,
    PerCubicCentimeter,
    Radian,
    Degree,
}

struct UnitInfo {
    symbol: &'static str,
    aliases: &'static [&'static str],
    dimension: Dimension,
    system: UnitSystem,
    /// Multiply a value in this unit by `to_si` to get the SI unit of the
    /// same dimension.
    to_si: f64,
}

impl Unit {
    pub const ALL: [Unit; 36] = [
        Unit::ElectronVolt,
        Unit::Wavenumber,
        Unit::Joule,
        Unit::Millijoule,
        Unit::Meter,
        Unit::Centimeter,
        Unit::Millimeter,
        Unit::Micrometer,
        Unit::Nanometer,
        Unit::Hertz,
        Unit::Megahertz,
        Unit::Gigahertz,
        Unit::Terahertz,
        Unit::Second,
        Unit::Nanosecond,
        Unit::Picosecond,
        Unit::Femtosecond,
        Unit::Watt,
        Unit::Milliwatt,
        Unit::SquareMeter,
        Unit::SquareCentimeter,
        Unit::SquareMicrometer,
        Unit::CubicMeter,
        Unit::CubicCentimeter,
        Unit::CubicMillimeter,
        Unit::FluxPerSquareMeter,
        Unit::FluxPerSquareCentimeter,
        Unit::Meter4Second,
        Unit::Centimeter4Second,
        Unit::EntangledSquareMeter,
        Unit::EntangledSquareCentimeter,
        Unit::PerSecond,
        Unit::PerCubicMeter,
        Unit::PerCubicCentimeter,
        Unit::Radian,
        Unit::Degree,
    ];

    fn info(self) -> UnitInfo {
        use Dimension as D;
        use UnitSystem::{Cgs, Neutral, Si};
        let (symbol, aliases, dimension, system, to_si): (_, &'static [&'static str], _, _, _) = match self {
            Unit::ElectronVolt => ("eV", &[], D::Energy, Neutral, EV_TO_J),
            // 1 cm^-1 = h c (100 m^-1)
            Unit::Wavenumber => ("cm-1", &["cm^-1", "1/cm", "cm⁻¹"], D::Energy, Cgs, PLANCK * SPEED_OF_LIGHT * 100.0),
            Unit::Joule => ("J", &[], D::Energy, Neutral, 1.0),
            Unit::Millijoule => ("mJ", &[], D::Energy, Neutral, 1e-3),
            Unit::Meter => ("m", &[], D::Length, Si, 1.0),
            Unit::Centimeter => ("cm", &[], D::Length, Cgs, 1e-2),
            Unit::Millimeter => ("mm", &[], D::Length, Si, 1e-3),
            Unit::Micrometer => ("um", &["µm", "μm", "micron"], D::Length, Si, 1e-6),
            Unit::Nanometer => ("nm", &[], D::Length, Si, 1e-9),
            Unit::Hertz => ("Hz", &[], D::Frequency, Neutral, 1.0),
            Unit::Megahertz => ("MHz", &[], D::Frequency, Neutral, 1e6),
            Unit::Gigahertz => ("GHz", &[], D::Frequency, Neutral, 1e9),
            Unit::Terahertz => ("THz", &[], D::Frequency, Neutral, 1e12),
            Unit::Second => ("s", &[], D::Time, Neutral, 1.0),
            Unit::Nanosecond => ("ns", &[], D::Time, Neutral, 1e-9),
            Unit::Picosecond => ("ps", &[], D::Time, Neutral, 1e-12),
            Unit::Femtosecond => ("fs", &[], D::Time, Neutral, 1e-15),
            Unit::Watt => ("W", &[], D::Power, Neutral, 1.0),
            Unit::Milliwatt => ("mW", &[], D::Power, Neutral, 1e-3),
            Unit::SquareMeter => ("m2", &["m^2", "m²"], D::Area, Si, 1.0),
            Unit::SquareCentimeter => ("cm2", &["cm^2", "cm²"], D::Area, Cgs, 1e-4),
            Unit::SquareMicrometer => ("um2", &["um^2", "µm2", "µm^2", "µm²"], D::Area, Si, 1e-12),
            Unit::CubicMeter => ("m3", &["m^3", "m³"], D::Volume, Si, 1.0),
            Unit::CubicCentimeter => ("cm3", &["cm^3", "cm³"], D::Volume, Cgs, 1e-6),
            Unit::CubicMillimeter => ("mm3", &["mm^3", "mm³"], D::Volume, Si, 1e-9),
            Unit::FluxPerSquareMeter => {
                ("m-2s-1", &["m^-2s^-1", "m-2 s-1", "1/m2/s", "m⁻²s⁻¹"], D::PhotonFlux, Si, 1.0)
            }
            Unit::FluxPerSquareCentimeter => {
                ("cm-2s-1", &["cm^-2s^-1", "cm-2 s-1", "1/cm2/s", "cm⁻²s⁻¹"], D::PhotonFlux, Cgs, 1e4)
            }
            Unit::Meter4Second => ("m4s", &["m^4s", "m4*s", "m4 s", "m⁴s", "m⁴·s"], D::ClassicalCrossSection, Si, 1.0),
            Unit::Centimeter4Second => {
                ("cm4s", &["cm^4s", "cm4*s", "cm4 s", "cm⁴s", "cm⁴·s"], D::ClassicalCrossSection, Cgs, 1e-8)
            }
            Unit::EntangledSquareMeter => ("m2[e]", &["sigma_e m2"], D::EntangledCrossSection, Si, 1.0),
            Unit::EntangledSquareCentimeter => ("cm2[e]", &["sigma_e cm2"], D::EntangledCrossSection, Cgs, 1e-4),
            Unit::PerSecond => ("s-1", &["1/s", "s^-1", "s⁻¹"], D::Rate, Neutral, 1.0),
            Unit::PerCubicMeter => ("m-3", &["m^-3", "1/m3", "m⁻³"], D::NumberDensity, Si, 1.0),
            Unit::PerCubicCentimeter => ("cm-3", &["cm^-3", "1/cm3", "cm⁻³"], D::NumberDensity, Cgs, 1e6),
            Unit::Radian => ("rad", &[], D::Angle, Neutral, 1.0),
            Unit::Degree => ("deg", &["°"], D::Angle, Neutral, std::f64::consts::PI / 180.0),
        };
        UnitInfo { symbol, aliases, dimension, system, to_si }
    }

    pub fn symbol(self) -> &'static str {
        self.info().symbol
    }

    pub fn dimension(self) -> Dimension {
        self.info().dimension
    }

    pub fn system(self) -> UnitSystem {
        self.info().system
    }

    /// SI unit of this unit's dimension.
    pub fn si_unit(self) -> Unit {
        match self.dimension() {
            Dimension::Energy => Unit::Joule,
            Dimension::Length => Unit::Meter,
            Dimension::Frequency => Unit::Hertz,
            Dimension::Time => Unit::Second,
            Dimension::Power => Unit::Watt,
            Dimension::Area => Unit::SquareMeter,
            Dimension::Volume => Unit::CubicMeter,
            Dimension::PhotonFlux => Unit::FluxPerSquareMeter,
            Dimension::ClassicalCrossSection => Unit::Meter4Second,
            Dimension::EntangledCrossSection => Unit::EntangledSquareMeter,
            Dimension::Rate => Unit::PerSecond,
            Dimension::NumberDensity => Unit::PerCubicMeter,
            Dimension::Angle => Unit::Radian,
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Unit {
    type Err = QuantityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Unit::ALL
            .iter()
            .copied()
            .find(|u| {
                let info = u.info();
                info.symbol == s || info.aliases.contains(&s)
            })
            .ok_or_else(|| QuantityError::UnknownUnit(s.to_string()))
    }
}

impl Serialize for Unit {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.symbol())
    }
}

impl<'de> Deserialize<'de> for Unit {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantityError {
    #[error("value {0} is not finite")]
    NonFinite(f64),
    #[error("{dimension} must be non-negative, got {value}")]
    Negative { dimension: Dimension, value: f64 },
    #[error("cannot convert {from} to {to}")]
    DimensionMismatch { from: Dimension, to: Dimension },
    #[error("expected a {expected} quantity, got {found}")]
    WrongDimension { expected: Dimension, found: Dimension },
    #[error("unknown unit '{0}'")]
    UnknownUnit(String),
    #[error("cannot parse quantity '{0}', expected '<number> <unit>'")]
    Malformed(String),
    #[error("inconsistent unit systems: {left} is {left_system:?} but {right} is {right_system:?}")]
    UnitSystemMismatch { left: Unit, left_system: UnitSystem, right: Unit, right_system: UnitSystem },
    #[error("domain error: {0}")]
    Domain(String),
}

/// A finite magnitude tagged with a unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawQuantity")]
pub struct Quantity {
    value: f64,
    unit: Unit,
}

#[derive(Deserialize)]
struct RawQuantity {
    value: f64,
    unit: Unit,
}

impl TryFrom<RawQuantity> for Quantity {
    type Error = QuantityError;

    fn try_from(raw: RawQuantity) -> Result<Self, Self::Error> {
        Quantity::new(raw.value, raw.unit)
    }
}

impl Quantity {
    pub fn new(value: f64, unit: Unit) -> Result<Self, QuantityError> {
        if !value.is_finite() {
            return Err(QuantityError::NonFinite(value));
        }
        let dimension = unit.dimension();
        if dimension.must_be_non_negative() && value < 0.0 {
            return Err(QuantityError::Negative { dimension, value });
        }
        Ok(Quantity { value, unit })
    }

    /// Build an SI-valued quantity in the SI unit of `dimension`.
    pub fn from_si(value: f64, dimension: Dimension) -> Result<Self, QuantityError> {
        let unit = Unit::ALL
            .iter()
            .copied()
            .find(|u| u.dimension() == dimension)
            .map(Unit::si_unit)
            .expect("every dimension has a unit");
        Quantity::new(value, unit)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn dimension(&self) -> Dimension {
        self.unit.dimension()
    }

    /// Value in the SI unit of this quantity's own dimension.
    pub fn si(&self) -> f64 {
        self.value * self.unit.info().to_si
    }

    /// Error unless this quantity has the given dimension.
    pub fn expect(&self, dimension: Dimension) -> Result<&Self, QuantityError> {
        if self.dimension() == dimension {
            Ok(self)
        } else {
            Err(QuantityError::WrongDimension { expected: dimension, found: self.dimension() })
        }
    }

    /// SI value after checking the dimension.
    pub fn si_as(&self, dimension: Dimension) -> Result<f64, QuantityError> {
        self.expect(dimension).map(Quantity::si)
    }

    pub fn convert(&self, target: Unit) -> Result<Quantity, QuantityError> {
        convert(*self, target)
    }

    pub fn value_in(&self, target: Unit) -> Result<f64, QuantityError> {
        self.convert(target).map(|q| q.value)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(precision) = f.precision() {
            write!(f, "{:.*e} {}", precision, self.value, self.unit)
        } else if self.value == 0.0 || (1e-4..1e15).contains(&self.value.abs()) {
            write!(f, "{} {}", self.value, self.unit)
        } else {
            // exact round-trip, but without a wall of zeros
            write!(f, "{:e} {}", self.value, self.unit)
        }
    }
}

impl FromStr for Quantity {
    type Err = QuantityError;

    /// Parses `"<number> <unit>"`, e.g. `"400 nm"` or `"1e-48 cm4s"`; the
    /// space may be omitted (`"400nm"`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let split = s
            .find(char::is_whitespace)
            .or_else(|| {
                // longest numeric prefix followed by a non-empty unit
                s.char_indices().map(|(i, _)| i).skip(1).filter(|&i| s[..i].parse::<f64>().is_ok()).last()
            })
            .ok_or_else(|| QuantityError::Malformed(s.to_string()))?;
        let (number, unit) = s.split_at(split);
        let value: f64 = number.parse().map_err(|_| QuantityError::Malformed(s.to_string()))?;
        Quantity::new(value, unit.trim().parse()?)
    }
}

/// Convert `q` into `target`, following the spectroscopic equivalence for
/// energy, length and frequency.
pub fn convert(q: Quantity, target: Unit) -> Result<Quantity, QuantityError> {
    let from = q.dimension();
    let to = target.dimension();
    if from == to {
        let value = q.si() / target.info().to_si;
        return Quantity::new(value, target);
    }
    if !(from.is_spectral() && to.is_spectral()) {
        return Err(QuantityError::DimensionMismatch { from, to });
    }
    let frequency = spectral_to_frequency(q)?;
    let value = match to {
        Dimension::Frequency => frequency / target.info().to_si,
        Dimension::Energy => PLANCK * frequency / target.info().to_si,
        Dimension::Length => {
            if frequency <= 0.0 {
                return Err(QuantityError::Domain(format!("cannot express non-positive {from} {q} as a wavelength")));
            }
            SPEED_OF_LIGHT / frequency / target.info().to_si
        }
        _ => unreachable!("non-spectral target"),
    };
    Quantity::new(value, target)
}

fn spectral_to_frequency(q: Quantity) -> Result<f64, QuantityError> {
    match q.dimension() {
        Dimension::Frequency => Ok(q.si()),
        Dimension::Energy => Ok(q.si() / PLANCK),
        Dimension::Length => {
            if q.value <= 0.0 {
                Err(QuantityError::Domain(format!("wavelength must be positive for spectral conversion, got {q}")))
            } else {
                Ok(SPEED_OF_LIGHT / q.si())
            }
        }
        _ => unreachable!("non-spectral source"),
    }
}

/// Photon energy `E = h c / λ`, returned in eV.
pub fn photon_energy(wavelength: Quantity) -> Result<Quantity, QuantityError> {
    let lambda = wavelength.si_as(Dimension::Length)?;
    if lambda <= 0.0 {
        return Err(QuantityError::Domain(format!("photon energy needs a positive wavelength, got {wavelength}")));
    }
    Quantity::new(PLANCK * SPEED_OF_LIGHT / lambda / EV_TO_J, Unit::ElectronVolt)
}

/// Small-width conversion `Δf = c Δλ / λ₀²`. Returns Hz.
pub fn wavelength_width_to_frequency(width: Quantity, center: Quantity) -> Result<Quantity, QuantityError> {
    let dl = width.si_as(Dimension::Length)?;
    let l0 = positive_center(center)?;
    if dl > l0 / 2.0 {
        return Err(QuantityError::Domain(format!(
            "linewidth {width} exceeds half the center wavelength {center}; \
             small-width approximation invalid"
        )));
    }
    Quantity::new(SPEED_OF_LIGHT * dl / (l0 * l0), Unit::Hertz)
}

/// Inverse of [`wavelength_width_to_frequency`]: `Δλ = Δf λ₀² / c`. Returns nm.
pub fn frequency_width_to_wavelength(width: Quantity, center: Quantity) -> Result<Quantity, QuantityError> {
    let df = width.si_as(Dimension::Frequency)?;
    if df < 0.0 {
        return Err(QuantityError::Negative { dimension: Dimension::Frequency, value: df });
    }
    let l0 = positive_center(center)?;
    let dl = df * l0 * l0 / SPEED_OF_LIGHT;
    if dl > l0 / 2.0 {
        return Err(QuantityError::Domain(format!(
            "frequency width {width} maps beyond half the center wavelength {center}"
        )));
    }
    Quantity::new(dl / 1e-9, Unit::Nanometer)
}

fn positive_center(center: Quantity) -> Result<f64, QuantityError> {
    let l0 = center.si_as(Dimension::Length)?;
    if l0 <= 0.0 {
        return Err(QuantityError::Domain(format!("center wavelength must be positive, got {center}")));
    }
    Ok(l0)
}

/// Require two quantities to share a unit system (neutral units match anything).
pub fn same_system(a: &Quantity, b: &Quantity) -> Result<UnitSystem, QuantityError> {
    match (a.unit.system(), b.unit.system()) {
        (UnitSystem::Neutral, s) | (s, UnitSystem::Neutral) => Ok(s),
        (x, y) if x == y => Ok(x),
        (x, y) => {
            Err(QuantityError::UnitSystemMismatch { left: a.unit, left_system: x, right: b.unit, right_system: y })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(v: f64, u: Unit) -> Quantity {
        Quantity::new(v, u).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn wavelength_to_wavenumber() {
        let k = q(400.0, Unit::Nanometer).convert(Unit::Wavenumber).unwrap();
        assert!(rel(k.value(), 25_000.0) < 1e-12);
    }

    #[test]
    fn ev_to_wavenumber() {
        let k = q(1.0, Unit::ElectronVolt).convert(Unit::Wavenumber).unwrap();
        assert!((k.value() - 8065.54).abs() < 0.01);
    }

    #[test]
    fn classical_cross_section_cgs_to_si() {
        let s = q(1e-48, Unit::Centimeter4Second).convert(Unit::Meter4Second).unwrap();
        assert!(rel(s.value(), 1e-56) < 1e-12);
    }

    #[test]
    fn dimension_mismatch_names_both() {
        let err = q(1.0, Unit::ElectronVolt).convert(Unit::Second).unwrap_err();
        assert_eq!(err, QuantityError::DimensionMismatch { from: Dimension::Energy, to: Dimension::Time });
        assert!(err.to_string().contains("energy") && err.to_string().contains("time"));
    }

    #[test]
    fn rejects_non_finite_and_negative_flux() {
        assert!(matches!(Quantity::new(f64::NAN, Unit::Watt), Err(QuantityError::NonFinite(_))));
        assert!(matches!(Quantity::new(f64::INFINITY, Unit::Nanometer), Err(QuantityError::NonFinite(_))));
        assert!(matches!(Quantity::new(-1.0, Unit::FluxPerSquareMeter), Err(QuantityError::Negative { .. })));
        // detunings may be negative
        assert!(Quantity::new(-1e12, Unit::Hertz).is_ok());
    }

    #[test]
    fn parse_quantity_strings() {
        let s: Quantity = "1e-48 cm4s".parse().unwrap();
        assert_eq!(s.unit(), Unit::Centimeter4Second);
        let w: Quantity = "  400   nm ".parse().unwrap();
        assert_eq!(w.value(), 400.0);
        assert!("400".parse::<Quantity>().is_err());
        let compact: Quantity = "1e-48cm4s".parse().unwrap();
        assert_eq!((compact.value(), compact.unit()), (1e-48, Unit::Centimeter4Second));
        let ev: Quantity = "2eV".parse().unwrap();
        assert_eq!((ev.value(), ev.unit()), (2.0, Unit::ElectronVolt));
        assert!("nm".parse::<Quantity>().is_err());
        assert_eq!(q(1e-28, Unit::SquareCentimeter).to_string(), "1e-28 cm2");
        assert_eq!(q(400.0, Unit::Nanometer).to_string(), "400 nm");
        assert_eq!(format!("{:.2}", q(400.0, Unit::Nanometer)), "4.00e2 nm");
        assert!(matches!("1 furlong".parse::<Quantity>(), Err(QuantityError::UnknownUnit(_))));
    }

    #[test]
    fn photon_energy_examples() {
        let e400 = photon_energy(q(400.0, Unit::Nanometer)).unwrap();
        assert!((e400.value() - 3.0996).abs() < 1e-3);
        let e_lyb = photon_energy(q(102.6, Unit::Nanometer)).unwrap();
        let e_talif = photon_energy(q(205.2, Unit::Nanometer)).unwrap();
        assert!(rel(e_lyb.value(), 2.0 * e_talif.value()) < 1e-12);
        assert!(photon_energy(q(0.0, Unit::Nanometer)).is_err());
        assert!(photon_energy(q(1.0, Unit::Second)).is_err());
    }

    #[test]
    fn photon_energy_decreases_toward_long_wavelengths() {
        let mut last = f64::INFINITY;
        for exp in 0..12 {
            let e = photon_energy(q(10f64.powi(exp), Unit::Nanometer)).unwrap().value();
            assert!(e < last && e > 0.0);
            last = e;
        }
        assert!(last < 2e-8);
    }

    #[test]
    fn linewidth_examples() {
        let df = wavelength_width_to_frequency(q(20.0, Unit::Nanometer), q(245.0, Unit::Nanometer)).unwrap();
        assert!(rel(df.value(), 1.0e14) < 0.02);
        let zero = wavelength_width_to_frequency(q(0.0, Unit::Nanometer), q(245.0, Unit::Nanometer)).unwrap();
        assert_eq!(zero.value(), 0.0);
        assert!(wavelength_width_to_frequency(q(130.0, Unit::Nanometer), q(245.0, Unit::Nanometer)).is_err());
    }

    #[test]
    fn system_check() {
        let a = q(1e-48, Unit::Centimeter4Second);
        let b = q(1.0, Unit::FluxPerSquareMeter);
        assert!(matches!(same_system(&a, &b), Err(QuantityError::UnitSystemMismatch { .. })));
        assert_eq!(same_system(&a, &q(1.0, Unit::Second)).unwrap(), UnitSystem::Cgs);
    }

    #[test]
    fn serde_uses_symbols_and_validates() {
        let json = serde_json::to_string(&q(400.0, Unit::Nanometer)).unwrap();
        assert_eq!(json, r#"{"value":400.0,"unit":"nm"}"#);
        let back: Quantity = serde_json::from_str(&json).unwrap();
        assert_eq!(back, q(400.0, Unit::Nanometer));
        assert!(serde_json::from_str::<Quantity>(r#"{"value":-1.0,"unit":"W"}"#).is_err());
    }

    #[test]
    fn every_symbol_parses_back() {
        for u in Unit::ALL {
            assert_eq!(u.symbol().parse::<Unit>().unwrap(), u);
        }
    }

    fn units_of(d: Dimension) -> Vec<Unit> {
        Unit::ALL.iter().copied().filter(|u| u.dimension() == d).collect()
    }

    proptest! {
        #[test]
        fn round_trip_within_dimension(v in 1e-30f64..1e30, i in 0usize..30, j in 0usize..30) {
            let a = Unit::ALL[i];
            let same = units_of(a.dimension());
            let b = same[j % same.len()];
            let there = q(v, a).convert(b).unwrap();
            let back = there.convert(a).unwrap();
            prop_assert!(rel(back.value(), v) <= 1e-12);
        }

        #[test]
        fn spectral_paths_agree(v in 1e-3f64..1e6, i in 0usize..64, j in 0usize..64, k in 0usize..64) {
            let spectral: Vec<Unit> =
                Unit::ALL.iter().copied().filter(|u| u.dimension().is_spectral()).collect();
            let (a, b, c) = (spectral[i % spectral.len()], spectral[j % spectral.len()], spectral[k % spectral.len()]);
            let start = q(v, a);
            let direct = start.convert(c).unwrap();
            let via = start.convert(b).unwrap().convert(c).unwrap();
            prop_assert!(rel(via.value(), direct.value()) <= 1e-12);
            let back = direct.convert(a).unwrap();
            prop_assert!(rel(back.value(), v) <= 1e-12);
        }

        #[test]
        fn photon_energy_ratio(l1 in 1.0f64..1e5, l2 in 1.0f64..1e5) {
            let e1 = photon_energy(q(l1, Unit::Nanometer)).unwrap().value();
            let e2 = photon_energy(q(l2, Unit::Nanometer)).unwrap().value();
            prop_assert!(rel(e1 / e2, l2 / l1) <= 1e-14);
        }

        #[test]
        fn linewidth_round_trip(dl in 0.0f64..100.0, l0 in 200.0f64..2000.0) {
            let center = q(l0, Unit::Nanometer);
            let df = wavelength_width_to_frequency(q(dl, Unit::Nanometer), center).unwrap();
            let back = frequency_width_to_wavelength(df, center).unwrap();
            prop_assert!((back.value() - dl).abs() <= 1e-12 * dl.max(f64::MIN_POSITIVE));
        }
    }
}
