//! CODATA 2018 exact defining constants and derived conversion factors.

/// Fixed physical constants used throughout the crate.
///
/// The SI defining constants (h, c, e) are exact since the 2019 SI
/// redefinition; the derived factors are computed from them at compile time.
#[derive(Debug, Clone, Copy)]
pub struct PhysicalConstants;

impl PhysicalConstants {
    /// Planck constant, J·s (exact).
    pub const PLANCK: f64 = 6.626_070_15e-34;
    /// Speed of light in vacuum, m/s (exact).
    pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
    /// Elementary charge, C (exact). Also the eV → J factor.
    pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
    /// 1 eV expressed in joules.
    pub const EV_TO_J: f64 = Self::ELEMENTARY_CHARGE;
    /// 1 eV expressed in cm⁻¹ (≈ 8065.543937).
    pub const EV_TO_WAVENUMBER: f64 = Self::ELEMENTARY_CHARGE / (Self::PLANCK * Self::SPEED_OF_LIGHT * 100.0);
    /// h·c in J·m.
    pub const HC: f64 = Self::PLANCK * Self::SPEED_OF_LIGHT;
}

pub const PLANCK: f64 = PhysicalConstants::PLANCK;
pub const SPEED_OF_LIGHT: f64 = PhysicalConstants::SPEED_OF_LIGHT;
pub const EV_TO_J: f64 = PhysicalConstants::EV_TO_J;
pub const EV_TO_WAVENUMBER: f64 = PhysicalConstants::EV_TO_WAVENUMBER;
