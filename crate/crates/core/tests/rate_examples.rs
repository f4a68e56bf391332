//! Worked numbers for the rate law, with the reference values computed
//! independently from the constants below.

use etpa_core::biphoton::{BiphotonSource, PairGeometry, PumpLaser, SpdcConfig, SpdcType};
use etpa_core::quantities::{Quantity, Unit};
use etpa_core::rates::{
    build_rate_report, classical_tpa_rate, critical_flux, etpa_cross_section, etpa_rate_terms, photon_flux,
    BeamGeometry, LaserSource, TargetSpecies,
};

const H: f64 = 6.626_070_15e-34;
const C: f64 = 299_792_458.0;

fn q(v: f64, u: Unit) -> Quantity {
    Quantity::new(v, u).unwrap()
}

fn cw() -> LaserSource {
    LaserSource::cw(q(1.0, Unit::Watt), q(400.0, Unit::Nanometer)).unwrap()
}

fn pulsed() -> LaserSource {
    LaserSource::pulsed(
        q(100.0, Unit::Millijoule),
        q(100.0, Unit::Picosecond),
        q(10.0, Unit::Hertz),
        q(400.0, Unit::Nanometer),
    )
    .unwrap()
}

fn spot() -> BeamGeometry {
    BeamGeometry::new(q(10.0, Unit::Micrometer)).unwrap()
}

/// P λ / (h c π r²)
fn analytic_flux(power: f64, wavelength: f64, diameter: f64) -> f64 {
    power * wavelength / (H * C * std::f64::consts::PI * (diameter / 2.0).powi(2))
}

#[test]
fn entangled_cross_section_example() {
    let sigma_e = etpa_cross_section(
        q(1e-48, Unit::Centimeter4Second),
        q(1e-6, Unit::SquareCentimeter),
        q(10.0, Unit::Femtosecond),
    )
    .unwrap();
    assert_eq!(sigma_e.unit(), Unit::EntangledSquareCentimeter);
    assert!((sigma_e.value() - 1e-28).abs() / 1e-28 < 1e-12);
}

#[test]
fn cw_flux_example() {
    let phi = photon_flux(&cw(), &spot()).unwrap().average.value_in(Unit::FluxPerSquareMeter).unwrap();
    assert!((1e28..=5e28).contains(&phi));
    let oracle = analytic_flux(1.0, 400e-9, 10e-6);
    assert!((phi - oracle).abs() / oracle < 1e-12);
    assert!((phi - 2.56e28).abs() / 2.56e28 < 0.01);
}

#[test]
fn pulsed_matches_cw_average() {
    let a = photon_flux(&cw(), &spot()).unwrap();
    let b = photon_flux(&pulsed(), &spot()).unwrap();
    assert!((a.average.value() - b.average.value()).abs() / a.average.value() < 1e-12);
    let ratio = b.peak.value() / b.average.value();
    assert!((ratio - 1e9).abs() / 1e9 < 1e-12);
}

#[test]
fn linear_and_quadratic_regimes() {
    let sigma_c = q(1e-48, Unit::Centimeter4Second);
    let sigma_e = q(1e-28, Unit::EntangledSquareCentimeter);
    let crit = critical_flux(sigma_e, sigma_c).unwrap();
    assert_eq!(crit.unit(), Unit::FluxPerSquareCentimeter);
    assert!((crit.value() - 1e20).abs() / 1e20 < 1e-12);
    let (lin, quad) = etpa_rate_terms(sigma_e, sigma_c, q(1e17, Unit::FluxPerSquareCentimeter)).unwrap();
    assert!(lin / quad >= 999.0);
    let (lin, quad) = etpa_rate_terms(sigma_e, sigma_c, q(1e23, Unit::FluxPerSquareCentimeter)).unwrap();
    assert!(quad / lin >= 999.0);
    let (lin, quad) = etpa_rate_terms(sigma_e, sigma_c, crit).unwrap();
    assert!((lin - quad).abs() / lin < 1e-12);
}

#[test]
fn classical_rate_unit_audit() {
    let phi_si = analytic_flux(1.0, 400e-9, 10e-6);
    let oracle = 1e-48 * (phi_si * 1e-4).powi(2);
    let flux = photon_flux(&cw(), &spot()).unwrap().average;
    let cgs =
        classical_tpa_rate(q(1e-48, Unit::Centimeter4Second), flux.convert(Unit::FluxPerSquareCentimeter).unwrap())
            .unwrap()
            .value();
    let si = classical_tpa_rate(q(1e-56, Unit::Meter4Second), flux).unwrap().value();
    assert!((cgs - si).abs() / si < 1e-10);
    assert!((cgs - oracle).abs() / oracle < 1e-12);
    assert!((cgs - 6.6).abs() < 0.1);
    // mixing cm⁴s with m⁻²s⁻¹ is refused
    assert!(classical_tpa_rate(q(1e-48, Unit::Centimeter4Second), flux).is_err());
}

fn worked_source() -> BiphotonSource {
    let pump = PumpLaser::new(q(400.0, Unit::Nanometer), q(1e6, Unit::Hertz), q(70.0, Unit::Milliwatt)).unwrap();
    let config = SpdcConfig {
        spdc_type: SpdcType::TypeI,
        geometry: PairGeometry::Collinear,
        bandwidth: q(1e14, Unit::Hertz),
        beam_diameter: q(10.0, Unit::Micrometer),
        area_override: Some(q(1e-6, Unit::SquareCentimeter)),
        efficiency: 1e-10,
        kappa: 1.0,
    };
    BiphotonSource::new(pump, config).unwrap()
}

#[test]
fn report_documents_mixed_unit_reading() {
    let species = TargetSpecies::new("X", q(1e-48, Unit::Centimeter4Second)).unwrap();
    let field = worked_source().field().unwrap();
    let report = build_rate_report(&cw(), &spot(), &species, &field).unwrap();
    assert_eq!(report.entangled_cross_section.unit(), Unit::EntangledSquareCentimeter);
    assert!((report.entangled_cross_section.value() - 1e-28).abs() / 1e-28 < 1e-12);
    assert!((report.classical_rate_average.value() - 6.6).abs() < 0.1);
    let mixed = &report.mixed_unit_reading;
    assert!((mixed.inflation_factor - 1e8).abs() / 1e8 < 1e-10);
    assert!((mixed.classical_rate_average_mixed_s1 - 6.6e8).abs() / 6.6e8 < 0.02);

    let report = build_rate_report(&pulsed(), &spot(), &species, &field).unwrap();
    assert!((report.flux_peak.value() / report.flux_average.value() - 1e9).abs() < 1e-3);
    let mixed = &report.mixed_unit_reading;
    assert!((mixed.classical_rate_average_mixed_s1 - 6.6e17).abs() / 6.6e17 < 0.02);
    assert!((mixed.inflation_factor - 1e8).abs() / 1e8 < 1e-10);
    assert!((report.classical_rate_average.value() - 6.6e9).abs() / 6.6e9 < 0.02);
}
