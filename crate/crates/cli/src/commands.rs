use std::collections::BTreeSet;

use etpa_core::biphoton::{pair_frequencies, BiphotonSource};
use etpa_core::finder::{explain, find_candidates};
use etpa_core::plasma::{find_metastables, scan_abundance, solve_cr_populations, CrSystem, PopulationResult};
use etpa_core::quantities::{Dimension, Quantity, Unit};
use etpa_core::rates::{build_rate_report, BeamGeometry, LaserSource, RateReport, TargetSpecies};
use serde::Serialize;
use serde_json::json;

use crate::config::{quantity, AtomicInputs, RunConfig};
use crate::error::CliError;
use crate::output::{num, Rendered, Table};

fn quantity_table() -> Table {
    Table::new(["quantity", "value", "unit"])
}

fn push_q(t: &mut Table, name: &str, q: Quantity) {
    t.push([name.to_string(), num(q.value()), q.unit().symbol().to_string()]);
}

fn push_plain(t: &mut Table, name: &str, v: f64) {
    t.push([name.to_string(), num(v), "1".to_string()]);
}

pub fn convert(value: f64, from: &str, to: &str) -> Result<Rendered, CliError> {
    let from: Unit = from.parse()?;
    let to: Unit = to.parse()?;
    let out = Quantity::new(value, from)?.convert(to)?;
    let mut t = Table::new(["value", "unit"]);
    t.push([num(out.value()), out.unit().symbol().to_string()]);
    Rendered::new(t, out)
}

pub fn source(cfg: &RunConfig, detuning: Option<&str>) -> Result<Rendered, CliError> {
    let pump = cfg.spdc.pump()?;
    let config = cfg.spdc.config()?;
    let field = BiphotonSource::new(pump, config)?.field()?;
    let mut t = quantity_table();
    push_q(&mut t, "pump_wavelength", pump.wavelength.convert(Unit::Nanometer)?);
    push_q(&mut t, "pump_frequency", pump.frequency());
    push_q(&mut t, "pump_power", pump.power);
    push_q(&mut t, "degenerate_wavelength", field.degenerate_wavelength);
    push_q(&mut t, "biphoton_bandwidth", config.bandwidth.convert(Unit::Hertz)?);
    push_q(&mut t, "entanglement_time", field.entanglement_time.convert(Unit::Femtosecond)?);
    push_q(&mut t, "entangled_area", field.entangled_area);
    push_q(&mut t, "pair_rate", field.pair_rate);
    push_q(&mut t, "pair_flux", field.pair_flux);
    push_q(&mut t, "sum_frequency_linewidth", field.sum_frequency_linewidth);
    if let Some(v) = field.crossing_volume {
        push_q(&mut t, "crossing_volume", v);
    }
    let pair = match detuning {
        Some(text) => {
            let d = quantity("--detuning", text, Dimension::Frequency)?;
            let (f1, f2) = pair_frequencies(pump.frequency(), d)?;
            push_q(&mut t, "signal_frequency", f1);
            push_q(&mut t, "idler_frequency", f2);
            Some(json!({ "signal": f1, "idler": f2 }))
        }
        None => None,
    };
    Rendered::new(t, json!({ "pump": pump, "spdc": config, "field": field, "pair_frequencies": pair }))
}

fn push_report(t: &mut Table, r: &RateReport) {
    push_q(t, "flux_average", r.flux_average);
    push_q(t, "flux_peak", r.flux_peak);
    push_plain(t, "duty_cycle", r.duty_cycle);
    push_q(t, "sigma_c", r.sigma_c);
    push_q(t, "classical_rate_average", r.classical_rate_average);
    push_q(t, "classical_rate_peak", r.classical_rate_peak);
    push_q(t, "entanglement_time", r.entanglement_time);
    push_q(t, "entangled_area", r.entangled_area);
    push_q(t, "sigma_e", r.entangled_cross_section);
    push_q(t, "etpa_rate_laser_flux", r.entangled_rate);
    push_q(t, "biphoton_photon_flux", r.biphoton_photon_flux);
    push_q(t, "etpa_rate_biphoton_flux", r.entangled_rate_biphoton);
    push_q(t, "critical_flux", r.critical_flux);
}

#[derive(Serialize)]
struct WorkedExample {
    cw: RateReport,
    pulsed: RateReport,
    peak_to_average_flux_pulsed: f64,
    mixed_unit_factor: f64,
    note: String,
}

/// The 1 W / 10 um / 400 nm example evaluated both with consistent units
/// and with the cm⁴·s × m⁻²·s⁻¹ mix that yields ~1e8 and ~1e17 s⁻¹.
fn worked_example(cfg: &RunConfig) -> Result<WorkedExample, CliError> {
    let q = |v: f64, u: Unit| Quantity::new(v, u);
    let wavelength = q(400.0, Unit::Nanometer)?;
    let geom = BeamGeometry::new(q(10.0, Unit::Micrometer)?)?;
    let species = TargetSpecies::new("example", q(1e-48, Unit::Centimeter4Second)?)?;
    let cw = LaserSource::cw(q(1.0, Unit::Watt)?, wavelength)?;
    let pulsed = LaserSource::pulsed(
        q(100.0, Unit::Millijoule)?,
        q(100.0, Unit::Picosecond)?,
        q(10.0, Unit::Hertz)?,
        wavelength,
    )?;
    let mut spdc = cfg.spdc.config()?;
    spdc.area_override = Some(q(1e-6, Unit::SquareCentimeter)?);
    spdc.bandwidth = q(1e14, Unit::Hertz)?;
    spdc.kappa = 1.0;
    let field = BiphotonSource::new(cfg.spdc.pump()?, spdc)?.field()?;
    let cw = build_rate_report(&cw, &geom, &species, &field)?;
    let pulsed = build_rate_report(&pulsed, &geom, &species, &field)?;
    let ratio = pulsed.flux_peak.value() / pulsed.flux_average.value();
    let factor = cw.mixed_unit_reading.inflation_factor;
    let note = format!(
        "worked example: multiplying sigma_c in cm4s by a flux in m-2s-1 gives {} s-1 (CW) and {} s-1 (pulsed), \
         the ~1e8 and ~1e17 s-1 quoted for this example; consistent units give {} s-1 and {} s-1, \
         a factor {} lower. Only the consistent values are used anywhere else.",
        num(cw.mixed_unit_reading.classical_rate_average_mixed_s1),
        num(pulsed.mixed_unit_reading.classical_rate_average_mixed_s1),
        num(cw.classical_rate_average.value()),
        num(pulsed.classical_rate_average.value()),
        num(factor),
    );
    Ok(WorkedExample { cw, pulsed, peak_to_average_flux_pulsed: ratio, mixed_unit_factor: factor, note })
}

pub fn rates(cfg: &RunConfig, paper_check: bool) -> Result<Rendered, CliError> {
    let src = cfg.laser.source()?;
    let geom = cfg.laser.geometry()?;
    let species = cfg.species.species()?;
    let field = BiphotonSource::new(cfg.spdc.pump()?, cfg.spdc.config()?)?.field()?;
    let report = build_rate_report(&src, &geom, &species, &field)?;
    let mut t = quantity_table();
    push_report(&mut t, &report);
    if !paper_check {
        return Rendered::new(t, json!({ "report": report }));
    }
    let m = &report.mixed_unit_reading;
    t.push(["classical_rate_average_mixed_units".to_string(), num(m.classical_rate_average_mixed_s1), "s-1".into()]);
    push_plain(&mut t, "mixed_unit_factor", m.inflation_factor);
    let ex = worked_example(cfg)?;
    for (case, r) in [("cw", &ex.cw), ("pulsed", &ex.pulsed)] {
        push_q(
            &mut t,
            &format!("worked_example.{case}.flux_average"),
            r.flux_average.convert(Unit::FluxPerSquareMeter)?,
        );
        push_q(&mut t, &format!("worked_example.{case}.classical_rate_average"), r.classical_rate_average);
        t.push([
            format!("worked_example.{case}.classical_rate_average_mixed_units"),
            num(r.mixed_unit_reading.classical_rate_average_mixed_s1),
            "s-1".into(),
        ]);
    }
    push_plain(&mut t, "worked_example.pulsed.peak_to_average_flux", ex.peak_to_average_flux_pulsed);
    push_q(&mut t, "worked_example.sigma_e", ex.cw.entangled_cross_section);
    push_plain(&mut t, "worked_example.mixed_unit_factor", ex.mixed_unit_factor);
    let note = ex.note.clone();
    let mut out = Rendered::new(t, json!({ "report": report, "worked_example": ex }))?;
    out.notes.push(m.note.clone());
    out.notes.push(note);
    Ok(out)
}

/// `a:b:n` in eV, `n` evenly spaced points including both ends.
pub fn parse_te_range(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::input(format!("--te-range: expected 'min:max:count' in eV, got '{text}'"));
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, n] = parts.as_slice() else { return Err(bad()) };
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n == 0 || !(a.is_finite() && b.is_finite()) || a > b || (n == 1 && a != b) {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|k| if k == n - 1 { b } else { a + (b - a) * k as f64 / (n - 1) as f64 }).collect())
}

pub fn abundance(cfg: &RunConfig, te_list: &[f64]) -> Result<Rendered, CliError> {
    let (table, source) = cfg.files.rate_table()?;
    let dists = scan_abundance(&table, te_list)?;
    let z = table.max_charge();
    let mut t = Table::new(std::iter::once("Te_eV".to_string()).chain((0..=z).map(|k| format!("f{k}"))));
    for d in &dists {
        t.push(std::iter::once(num(d.te_ev)).chain(d.fractions.iter().map(|f| num(*f))));
    }
    let mut out = Rendered::new(
        t,
        json!({
            "species": table.species(),
            "n_e_cm3": table.electron_density_cm3(),
            "distributions": dists,
        }),
    )?;
    out.inputs.push(source);
    Ok(out)
}

struct PlasmaRun {
    drivers: Vec<String>,
    metastables: Vec<String>,
    result: PopulationResult,
}

fn solve_populations(cfg: &RunConfig, inputs: &AtomicInputs) -> Result<PlasmaRun, CliError> {
    let collisions = inputs
        .collisions
        .clone()
        .ok_or_else(|| CliError::input("files.collisions: collision strengths are required for populations"))?;
    let metastables = find_metastables(&inputs.levels, &inputs.lines);
    let drivers = match &cfg.plasma.drivers {
        Some(d) => d.clone(),
        None => std::iter::once(inputs.levels.ground().id.clone()).chain(metastables.iter().cloned()).collect(),
    };
    let pops = match &cfg.plasma.driver_populations {
        Some(p) if p.len() != drivers.len() => {
            return Err(CliError::input(format!(
                "plasma.driver_populations: {} values for {} drivers",
                p.len(),
                drivers.len()
            )))
        }
        Some(p) => p.clone(),
        None => vec![1.0; drivers.len()],
    };
    let sys = CrSystem::new(
        inputs.levels.clone(),
        inputs.lines.clone(),
        collisions,
        cfg.plasma.n_e_cm3()?,
        cfg.plasma.te_ev()?,
        drivers.clone(),
    )
    .map_err(|e| CliError::input(format!("plasma: {e}")))?;
    let result = solve_cr_populations(&sys, &pops)?;
    Ok(PlasmaRun { drivers, metastables, result })
}

pub fn populations(cfg: &RunConfig) -> Result<Rendered, CliError> {
    let inputs = cfg.files.atomic(true)?;
    let run = solve_populations(cfg, &inputs)?;
    let meta: BTreeSet<&str> = run.metastables.iter().map(String::as_str).collect();
    let ground = inputs.levels.ground().id.as_str();
    let mut header: Vec<String> =
        ["level_id", "energy_cm1", "role", "metastable", "population_rel"].map(String::from).to_vec();
    header.extend(run.drivers.iter().map(|d| format!("from_{d}")));
    let mut t = Table::new(header);
    for level in inputs.levels.iter() {
        let id = level.id.as_str();
        let marker = if id == ground {
            "ground"
        } else if meta.contains(id) {
            "*"
        } else {
            ""
        };
        let (role, total, contributions) = match run.result.drivers.iter().position(|d| d.id == id) {
            Some(k) => {
                let p = run.result.drivers[k].population;
                let c = (0..run.drivers.len()).map(|j| if j == k { p } else { 0.0 }).collect::<Vec<_>>();
                ("driver", p, c)
            }
            None => {
                let l = run.result.levels.iter().find(|l| l.id == id).expect("every level is solved or a driver");
                ("solved", l.total, l.contributions.clone())
            }
        };
        let mut row = vec![id.to_string(), num(level.energy_cm1()), role.to_string(), marker.to_string(), num(total)];
        row.extend(contributions.iter().map(|c| num(*c)));
        t.push(row);
    }
    let mut out = Rendered::new(
        t,
        json!({
            "te_ev": cfg.plasma.te_ev()?,
            "n_e_cm3": cfg.plasma.n_e_cm3()?,
            "metastables": run.metastables,
            "result": run.result,
        }),
    )?;
    if !run.result.clamped.is_empty() {
        out.notes.push(format!("tiny negative populations clamped to zero: {}", run.result.clamped.join(", ")));
    }
    out.inputs = inputs.sources;
    Ok(out)
}

pub fn find(cfg: &RunConfig, explain_pair: Option<(&str, &str)>) -> Result<Rendered, CliError> {
    let inputs = cfg.files.atomic(true)?;
    let constraints = cfg.search.constraints()?;
    if let Some((lower, upper)) = explain_pair {
        let reasons = explain(&inputs.levels, &constraints, lower, upper)?;
        let mut t = Table::new(["lower_id", "upper_id", "excluded_by"]);
        if reasons.is_empty() {
            t.push([lower, upper, "none (accepted)"]);
        }
        for r in &reasons {
            t.push([lower.to_string(), upper.to_string(), r.to_string()]);
        }
        let mut out = Rendered::new(
            t,
            json!({ "lower": lower, "upper": upper, "accepted": reasons.is_empty(), "reasons": reasons }),
        )?;
        out.inputs = inputs.sources;
        return Ok(out);
    }

    let mut notes = Vec::new();
    let populations = if inputs.collisions.is_some() {
        match solve_populations(cfg, &inputs) {
            Ok(run) => Some(run.result),
            Err(e) => {
                notes.push(format!("populations unavailable, candidates are unranked: {e}"));
                None
            }
        }
    } else {
        notes.push("no collision data, candidates are unranked".to_string());
        None
    };
    let found =
        find_candidates(&inputs.levels, &inputs.lines, populations.as_ref(), &constraints, &cfg.search.weights())?;
    let mut t = Table::new([
        "lower_id",
        "upper_id",
        "E_cm1",
        "pump_nm",
        "biphoton_nm",
        "n_intermediates",
        "best_fluor_nm",
        "best_branch",
        "score",
    ]);
    for c in &found {
        let (fl, br) = match c.fluorescence.first() {
            Some(f) => (num(f.wavelength_nm), num(f.branching)),
            None => (String::new(), String::new()),
        };
        t.push([
            c.lower.clone(),
            c.upper.clone(),
            num(c.transition_energy_cm1),
            num(c.pump_wavelength_nm),
            num(c.degenerate_photon_wavelength_nm),
            c.intermediates.len().to_string(),
            fl,
            br,
            num(c.score),
        ]);
    }
    let mut out = Rendered::new(t, json!({ "constraints": constraints, "candidates": found }))?;
    out.notes = notes;
    out.inputs = inputs.sources;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn te_range_parsing() {
        assert_eq!(parse_te_range("1:4:4").unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(parse_te_range("2:2:1").unwrap(), vec![2.0]);
        let r = parse_te_range("1:4:31").unwrap();
        assert_eq!(r.len(), 31);
        assert_eq!(*r.last().unwrap(), 4.0);
        for bad in ["", "1:4", "4:1:3", "1:4:0", "a:b:c", "1:2:1"] {
            assert!(parse_te_range(bad).is_err(), "{bad}");
        }
    }
}
