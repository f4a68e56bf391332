//! Steady-state plasma populations: charge-state balance from effective
//! ionization/recombination coefficients, and collisional-radiative (CR)
//! excited-level populations driven by ground and metastable levels.
//!
//! All rate data are user supplied. Coefficient tables are valid at the
//! electron density they were tabulated for; no density scaling is applied.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::io::Read;

use serde::Serialize;
use thiserror::Error;

use crate::atomic::{
    csv_reader, field, number_field, read_records, record_row, single_photon_allowed, AtomicDataError, Columns,
    LevelTable, LineTable, TableFormat,
};
use crate::constants::EV_TO_WAVENUMBER;
use crate::linalg::{DenseMatrix, SingularMatrix};

/// Prefactor of the Maxwell-averaged collision-strength rate, cm³ s⁻¹ eV^½.
pub const COLLISION_RATE_PREFACTOR: f64 = 8.629e-6;

/// Solved populations below `-NEGATIVE_TOLERANCE × max(driver population)`
/// are an error; smaller negatives are clamped to zero and flagged.
pub const NEGATIVE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlasmaError {
    #[error(transparent)]
    Data(#[from] AtomicDataError),
    #[error("Te = {te} eV is outside the tabulated range [{min}, {max}] eV")]
    OutOfRange { te: f64, min: f64, max: f64 },
    #[error("invalid rate table: {0}")]
    Table(String),
    #[error("zero recombination coefficient into charge {z} at Te = {te} eV")]
    ZeroRecombination { z: usize, te: f64 },
    #[error("unreachable level set: {}", .0.join(", "))]
    Unreachable(Vec<String>),
    #[error("rate matrix singular for levels {}: {source}", .levels.join(", "))]
    Singular { levels: Vec<String>, source: SingularMatrix },
    #[error("invalid CR system: {0}")]
    System(String),
    #[error("level '{level}' solved to negative population {value:e}")]
    NegativePopulation { level: String, value: f64 },
    #[error("domain error: {0}")]
    Domain(String),
}

type Result<T> = std::result::Result<T, PlasmaError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CoefficientKind {
    /// Effective ionization S_z, from charge z to z+1.
    Ionization,
    /// Effective recombination α_z, from charge z to z−1.
    Recombination,
}

/// Log-log linear interpolation on an ascending grid; no extrapolation.
fn loglog_interpolate(grid: &[f64], values: &[f64], x: f64) -> Result<f64> {
    let (min, max) = (grid[0], grid[grid.len() - 1]);
    if !(x >= min && x <= max) {
        return Err(PlasmaError::OutOfRange { te: x, min, max });
    }
    let i = grid.partition_point(|&g| g < x);
    if grid[i] == x {
        return Ok(values[i]);
    }
    let (x0, x1) = (grid[i - 1], grid[i]);
    let (y0, y1) = (values[i - 1], values[i]);
    let t = (x.ln() - x0.ln()) / (x1.ln() - x0.ln());
    Ok((y0.ln() + t * (y1.ln() - y0.ln())).exp())
}

/// Effective ionization and recombination coefficients for one element,
/// per charge state, on a common electron-temperature grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateCoefficientTable {
    species: String,
    te_grid: Vec<f64>,
    electron_density_cm3: Option<f64>,
    /// `ionization[z]` is S_z for z in 0..Z.
    ionization: Vec<Vec<f64>>,
    /// `recombination[z - 1]` is α_z for z in 1..=Z.
    recombination: Vec<Vec<f64>>,
}

impl RateCoefficientTable {
    pub fn new(
        species: impl Into<String>,
        te_grid: Vec<f64>,
        electron_density_cm3: Option<f64>,
        ionization: Vec<Vec<f64>>,
        recombination: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if te_grid.len() < 2 {
            return Err(PlasmaError::Table("Te grid needs at least two points".into()));
        }
        if te_grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(PlasmaError::Table("Te grid values must be positive".into()));
        }
        if te_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(PlasmaError::Table("Te grid must be strictly ascending".into()));
        }
        if ionization.is_empty() || ionization.len() != recombination.len() {
            return Err(PlasmaError::Table(format!(
                "need S for z = 0..Z-1 and alpha for z = 1..Z, got {} and {} series",
                ionization.len(),
                recombination.len()
            )));
        }
        for (kind, series) in [("S", &ionization), ("alpha", &recombination)] {
            for (k, values) in series.iter().enumerate() {
                let z = if kind == "S" { k } else { k + 1 };
                if values.len() != te_grid.len() {
                    return Err(PlasmaError::Table(format!(
                        "{kind}_{z} has {} points, grid has {}",
                        values.len(),
                        te_grid.len()
                    )));
                }
                if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                    return Err(PlasmaError::Table(format!("{kind}_{z} has non-positive value {v}")));
                }
            }
        }
        if let Some(ne) = electron_density_cm3 {
            if !(ne.is_finite() && ne > 0.0) {
                return Err(PlasmaError::Table(format!("electron density must be positive, got {ne}")));
            }
        }
        Ok(RateCoefficientTable { species: species.into(), te_grid, electron_density_cm3, ionization, recombination })
    }

    pub fn species(&self) -> &str {
        &self.species
    }

    /// Highest charge state Z.
    pub fn max_charge(&self) -> usize {
        self.ionization.len()
    }

    pub fn te_grid(&self) -> &[f64] {
        &self.te_grid
    }

    pub fn te_range(&self) -> (f64, f64) {
        (self.te_grid[0], self.te_grid[self.te_grid.len() - 1])
    }

    pub fn electron_density_cm3(&self) -> Option<f64> {
        self.electron_density_cm3
    }

    /// Coefficient in cm³/s at `te_ev`, log-log interpolated.
    pub fn interpolate(&self, z: usize, kind: CoefficientKind, te_ev: f64) -> Result<f64> {
        let series = match kind {
            CoefficientKind::Ionization => self.ionization.get(z),
            CoefficientKind::Recombination => z.checked_sub(1).and_then(|k| self.recombination.get(k)),
        }
        .ok_or_else(|| PlasmaError::Domain(format!("no {kind:?} coefficient for charge {z}")))?;
        loglog_interpolate(&self.te_grid, series, te_ev)
    }
}

/// Parse the long-format rate CSV `z,kind,Te_eV,coeff_cm3s` (kind `S` or
/// `alpha`). Comment lines `# species: <name>` and `# n_e_cm3: <value>`
/// set the table metadata.
pub fn parse_rate_table<R: Read>(mut input: R, format: TableFormat) -> Result<RateCoefficientTable> {
    let mut text = String::new();
    input.read_to_string(&mut text).map_err(|e| PlasmaError::Table(format!("read failed: {e}")))?;
    let mut species = String::from("unknown");
    let mut density = None;
    for line in text.lines() {
        let Some(meta) = line.trim().strip_prefix('#') else { continue };
        if let Some((key, value)) = meta.split_once(':') {
            match key.trim() {
                "species" => species = value.trim().to_string(),
                "n_e_cm3" => {
                    density = Some(
                        value
                            .trim()
                            .parse::<f64>()
                            .map_err(|_| PlasmaError::Table(format!("bad n_e_cm3 metadata '{}'", value.trim())))?,
                    )
                }
                _ => {}
            }
        }
    }

    let mut reader = csv_reader(text.as_bytes(), format);
    let columns = Columns::new(&mut reader)?;
    let c_z = columns.require("z")?;
    let c_kind = columns.require("kind")?;
    let c_te = columns.require("Te_eV")?;
    let c_coeff = columns.require("coeff_cm3s")?;

    let mut series: BTreeMap<(bool, usize), BTreeMap<u64, f64>> = BTreeMap::new();
    let mut grid_points = BTreeMap::new();
    for record in read_records(&mut reader) {
        let record = record?;
        let row = record_row(&record);
        let z_text = field(&record, c_z, "z")?;
        let z: usize = z_text.parse().map_err(|_| AtomicDataError::Field {
            row,
            column: "z".into(),
            message: format!("'{z_text}' is not a charge state"),
        })?;
        let is_ionization = match field(&record, c_kind, "kind")? {
            "S" => true,
            "alpha" => false,
            other => {
                return Err(AtomicDataError::Field {
                    row,
                    column: "kind".into(),
                    message: format!("expected S or alpha, got '{other}'"),
                }
                .into())
            }
        };
        let te = number_field(&record, c_te, "Te_eV")?;
        let coeff = number_field(&record, c_coeff, "coeff_cm3s")?;
        let key = te.to_bits();
        grid_points.insert(key, te);
        if series.entry((is_ionization, z)).or_default().insert(key, coeff).is_some() {
            return Err(AtomicDataError::Row { row, message: format!("duplicate entry for z={z} at Te={te}") }.into());
        }
    }
    if series.is_empty() {
        return Err(PlasmaError::Table("no coefficient rows".into()));
    }
    let mut te_grid: Vec<f64> = grid_points.into_values().collect();
    te_grid.sort_by(f64::total_cmp);
    let max_z = series.keys().map(|&(ion, z)| if ion { z + 1 } else { z }).max().unwrap_or(0);
    let collect = |ion: bool, z: usize| -> Result<Vec<f64>> {
        let points = series.get(&(ion, z)).ok_or_else(|| {
            PlasmaError::Table(format!("missing {} series for z={z}", if ion { "S" } else { "alpha" }))
        })?;
        te_grid
            .iter()
            .map(|t| {
                points.get(&t.to_bits()).copied().ok_or_else(|| {
                    PlasmaError::Table(format!("{}_{z} missing grid point Te={t}", if ion { "S" } else { "alpha" }))
                })
            })
            .collect()
    };
    let ionization = (0..max_z).map(|z| collect(true, z)).collect::<Result<Vec<_>>>()?;
    let recombination = (1..=max_z).map(|z| collect(false, z)).collect::<Result<Vec<_>>>()?;
    if series.len() != 2 * max_z {
        return Err(PlasmaError::Table(format!("unexpected series: S_Z or alpha_0 present for Z={max_z}")));
    }
    RateCoefficientTable::new(species, te_grid, density, ionization, recombination)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChargeStateDistribution {
    pub te_ev: f64,
    /// Fraction in each charge state z = 0..=Z; sums to 1.
    pub fractions: Vec<f64>,
}

/// Steady-state fractional abundance at `te_ev`.
///
/// Adjacent charge states balance pairwise, `f_{z+1}/f_z = S_z/α_{z+1}`, so
/// the chain is accumulated in log space and normalized; n_e cancels.
pub fn fractional_abundance(table: &RateCoefficientTable, te_ev: f64) -> Result<ChargeStateDistribution> {
    let z_max = table.max_charge();
    let mut log_f = Vec::with_capacity(z_max + 1);
    log_f.push(0.0);
    for z in 0..z_max {
        let s = table.interpolate(z, CoefficientKind::Ionization, te_ev)?;
        let alpha = table.interpolate(z + 1, CoefficientKind::Recombination, te_ev)?;
        if alpha == 0.0 {
            return Err(PlasmaError::ZeroRecombination { z: z + 1, te: te_ev });
        }
        let last = log_f[z];
        log_f.push(last + s.ln() - alpha.ln());
    }
    let peak = log_f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_f.iter().map(|l| (l - peak).exp()).collect();
    let total: f64 = weights.iter().sum();
    Ok(ChargeStateDistribution { te_ev, fractions: weights.into_iter().map(|w| w / total).collect() })
}

pub fn scan_abundance(table: &RateCoefficientTable, te_list: &[f64]) -> Result<Vec<ChargeStateDistribution>> {
    te_list.iter().map(|&te| fractional_abundance(table, te)).collect()
}

/// Collision strengths Υ(Te) for one unordered level pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpsilonSeries {
    te_grid: Vec<f64>,
    values: Vec<f64>,
}

impl UpsilonSeries {
    /// A single point is treated as temperature independent.
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(PlasmaError::Table("empty collision-strength series".into()));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(PlasmaError::Table("duplicate Te in collision-strength series".into()));
        }
        if let Some(p) = points.iter().find(|p| !(p.0 > 0.0 && p.1 > 0.0 && p.1.is_finite())) {
            return Err(PlasmaError::Table(format!("collision strength point {p:?} must be positive")));
        }
        let (te_grid, values) = points.into_iter().unzip();
        Ok(UpsilonSeries { te_grid, values })
    }

    pub fn constant(upsilon: f64) -> Result<Self> {
        Self::new(vec![(1.0, upsilon)])
    }

    pub fn at(&self, te_ev: f64) -> Result<f64> {
        if self.values.len() == 1 {
            return Ok(self.values[0]);
        }
        loglog_interpolate(&self.te_grid, &self.values, te_ev)
    }
}

/// Collision strengths keyed by (lower id, upper id) in energy order, so
/// Υ is symmetric by construction.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CollisionData {
    pairs: BTreeMap<(String, String), UpsilonSeries>,
}

impl CollisionData {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert Υ for a level pair given in either order.
    pub fn insert(&mut self, levels: &LevelTable, a: &str, b: &str, series: UpsilonSeries) -> Result<()> {
        let key = ordered_pair(levels, a, b)?;
        if self.pairs.insert(key, series).is_some() {
            return Err(PlasmaError::Table(format!("duplicate collision data for {a} / {b}")));
        }
        Ok(())
    }

    pub fn get(&self, levels: &LevelTable, a: &str, b: &str) -> Option<&UpsilonSeries> {
        ordered_pair(levels, a, b).ok().and_then(|k| self.pairs.get(&k))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, &UpsilonSeries)> {
        self.pairs.iter().map(|((l, u), s)| (l.as_str(), u.as_str(), s))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

fn ordered_pair(levels: &LevelTable, a: &str, b: &str) -> Result<(String, String)> {
    let pa = levels.position(a).ok_or_else(|| AtomicDataError::UnknownLevel { row: 0, id: a.to_string() })?;
    let pb = levels.position(b).ok_or_else(|| AtomicDataError::UnknownLevel { row: 0, id: b.to_string() })?;
    if pa == pb {
        return Err(PlasmaError::Table(format!("collision data couples level '{a}' to itself")));
    }
    Ok(if pa < pb { (a.to_string(), b.to_string()) } else { (b.to_string(), a.to_string()) })
}

/// Parse the collision-strength CSV `lower_id,upper_id,Te_eV,upsilon`.
pub fn parse_collision_table<R: Read>(input: R, format: TableFormat, levels: &LevelTable) -> Result<CollisionData> {
    let mut reader = csv_reader(input, format);
    let columns = Columns::new(&mut reader)?;
    let c_lo = columns.require("lower_id")?;
    let c_up = columns.require("upper_id")?;
    let c_te = columns.require("Te_eV")?;
    let c_ups = columns.require("upsilon")?;
    let mut points: BTreeMap<(String, String), Vec<(f64, f64)>> = BTreeMap::new();
    for record in read_records(&mut reader) {
        let record = record?;
        let row = record_row(&record);
        let a = field(&record, c_lo, "lower_id")?;
        let b = field(&record, c_up, "upper_id")?;
        for id in [a, b] {
            if levels.get(id).is_none() {
                return Err(AtomicDataError::UnknownLevel { row, id: id.to_string() }.into());
            }
        }
        let key = ordered_pair(levels, a, b)?;
        let te = number_field(&record, c_te, "Te_eV")?;
        let ups = number_field(&record, c_ups, "upsilon")?;
        points.entry(key).or_default().push((te, ups));
    }
    let mut data = CollisionData::new();
    for ((a, b), pts) in points {
        let series =
            UpsilonSeries::new(pts).map_err(|e| PlasmaError::Table(format!("collision data {a} / {b}: {e}")))?;
        data.insert(levels, &a, &b, series)?;
    }
    Ok(data)
}

fn check_rate_inputs(upsilon: f64, delta_e_ev: f64, te_ev: f64, g: f64) -> Result<()> {
    if !(te_ev > 0.0 && te_ev.is_finite()) {
        return Err(PlasmaError::Domain(format!("Te must be positive, got {te_ev}")));
    }
    if !(delta_e_ev >= 0.0 && delta_e_ev.is_finite()) {
        return Err(PlasmaError::Domain(format!("transition energy must be non-negative, got {delta_e_ev}")));
    }
    if !(g >= 1.0) {
        return Err(PlasmaError::Domain(format!("statistical weight must be at least 1, got {g}")));
    }
    if !(upsilon > 0.0 && upsilon.is_finite()) {
        return Err(PlasmaError::Domain(format!("collision strength must be positive, got {upsilon}")));
    }
    Ok(())
}

/// Electron-impact excitation coefficient (cm³/s) from a Maxwell-averaged
/// collision strength: `8.629e-6 / √Te · Υ / g_lower · exp(−ΔE/Te)`.
pub fn excitation_rate_coefficient(upsilon: f64, delta_e_ev: f64, te_ev: f64, g_lower: f64) -> Result<f64> {
    check_rate_inputs(upsilon, delta_e_ev, te_ev, g_lower)?;
    Ok(COLLISION_RATE_PREFACTOR / te_ev.sqrt() * upsilon / g_lower * (-delta_e_ev / te_ev).exp())
}

/// De-excitation coefficient (cm³/s): `8.629e-6 / √Te · Υ / g_upper`.
pub fn deexcitation_rate_coefficient(upsilon: f64, delta_e_ev: f64, te_ev: f64, g_upper: f64) -> Result<f64> {
    check_rate_inputs(upsilon, delta_e_ev, te_ev, g_upper)?;
    Ok(COLLISION_RATE_PREFACTOR / te_ev.sqrt() * upsilon / g_upper)
}

/// Everything needed for a steady-state CR solve.
#[derive(Debug, Clone)]
pub struct CrSystem {
    pub levels: LevelTable,
    pub lines: LineTable,
    pub collisions: CollisionData,
    pub electron_density_cm3: f64,
    pub te_ev: f64,
    /// Ground plus metastables; their populations are inputs.
    pub drivers: Vec<String>,
}

impl CrSystem {
    pub fn new(
        levels: LevelTable,
        lines: LineTable,
        collisions: CollisionData,
        electron_density_cm3: f64,
        te_ev: f64,
        drivers: Vec<String>,
    ) -> Result<Self> {
        if !(electron_density_cm3 > 0.0 && electron_density_cm3.is_finite()) {
            return Err(PlasmaError::System(format!("n_e must be positive, got {electron_density_cm3}")));
        }
        if !(te_ev > 0.0 && te_ev.is_finite()) {
            return Err(PlasmaError::System(format!("Te must be positive, got {te_ev}")));
        }
        if drivers.is_empty() {
            return Err(PlasmaError::System("at least one driver level is required".into()));
        }
        let mut seen = HashSet::new();
        for d in &drivers {
            if levels.get(d).is_none() {
                return Err(PlasmaError::System(format!("driver '{d}' is not in the level table")));
            }
            if !seen.insert(d.as_str()) {
                return Err(PlasmaError::System(format!("driver '{d}' listed twice")));
            }
        }
        if !seen.contains(levels.ground().id.as_str()) {
            return Err(PlasmaError::System(format!("drivers must include the ground level '{}'", levels.ground().id)));
        }
        Ok(CrSystem { levels, lines, collisions, electron_density_cm3, te_ev, drivers })
    }

    /// Full rate matrix: `M[i][j]` is the rate (s⁻¹) from level j into
    /// level i for i ≠ j, and `M[j][j]` is minus the total loss from j.
    /// Indices follow the level table's energy order.
    pub fn rate_matrix(&self) -> Result<DenseMatrix> {
        let n = self.levels.len();
        let mut m = DenseMatrix::zeros(n);
        let ne = self.electron_density_cm3;
        for (lower, upper, series) in self.collisions.iter() {
            let l = self.levels.position(lower).expect("validated id");
            let u = self.levels.position(upper).expect("validated id");
            let (lo, hi) = (&self.levels.levels()[l], &self.levels.levels()[u]);
            let de = (hi.energy_cm1() - lo.energy_cm1()) / EV_TO_WAVENUMBER;
            let ups = series.at(self.te_ev)?;
            let up = ne * excitation_rate_coefficient(ups, de, self.te_ev, lo.weight())?;
            let down = ne * deexcitation_rate_coefficient(ups, de, self.te_ev, hi.weight())?;
            m.add(u, l, up);
            m.add(l, l, -up);
            m.add(l, u, down);
            m.add(u, u, -down);
        }
        for line in self.lines.iter() {
            let u = self
                .levels
                .position(&line.upper)
                .ok_or_else(|| PlasmaError::System(format!("line upper '{}' not in level table", line.upper)))?;
            let l = self
                .levels
                .position(&line.lower)
                .ok_or_else(|| PlasmaError::System(format!("line lower '{}' not in level table", line.lower)))?;
            m.add(l, u, line.a_value);
            m.add(u, u, -line.a_value);
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriverPopulation {
    pub id: String,
    pub population: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelPopulation {
    pub id: String,
    pub energy_cm1: f64,
    pub total: f64,
    /// Contribution from each driver, in [`PopulationResult::drivers`] order.
    pub contributions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PopulationResult {
    pub drivers: Vec<DriverPopulation>,
    pub levels: Vec<LevelPopulation>,
    /// Levels whose tiny negative solutions were clamped to zero.
    pub clamped: Vec<String>,
}

impl PopulationResult {
    /// Population of any level, driver or solved.
    pub fn population(&self, id: &str) -> Option<f64> {
        self.drivers
            .iter()
            .find(|d| d.id == id)
            .map(|d| d.population)
            .or_else(|| self.levels.iter().find(|l| l.id == id).map(|l| l.total))
    }
}

/// Solve `M_XX N_X = −M_XD N_D` for the non-driver levels X, once for all
/// drivers together and once per driver.
pub fn solve_cr_populations(sys: &CrSystem, driver_populations: &[f64]) -> Result<PopulationResult> {
    if driver_populations.len() != sys.drivers.len() {
        return Err(PlasmaError::System(format!(
            "{} driver populations given for {} drivers",
            driver_populations.len(),
            sys.drivers.len()
        )));
    }
    if driver_populations.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(PlasmaError::System("driver populations must be finite and non-negative".into()));
    }
    let scale = driver_populations.iter().copied().fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(PlasmaError::System("driver populations are all zero".into()));
    }

    let m = sys.rate_matrix()?;
    let n = sys.levels.len();
    let driver_idx: Vec<usize> =
        sys.drivers.iter().map(|d| sys.levels.position(d).expect("validated driver")).collect();
    let is_driver: HashSet<usize> = driver_idx.iter().copied().collect();
    let excited: Vec<usize> = (0..n).filter(|i| !is_driver.contains(i)).collect();
    let ids = |idx: &[usize]| -> Vec<String> { idx.iter().map(|&i| sys.levels.levels()[i].id.clone()).collect() };

    let unreachable = unreachable_levels(&m, &driver_idx);
    if !unreachable.is_empty() {
        return Err(PlasmaError::Unreachable(ids(&unreachable)));
    }

    let drivers: Vec<DriverPopulation> = sys
        .drivers
        .iter()
        .zip(driver_populations)
        .map(|(id, &population)| DriverPopulation { id: id.clone(), population })
        .collect();
    if excited.is_empty() {
        return Ok(PopulationResult { drivers, levels: Vec::new(), clamped: Vec::new() });
    }

    let k = excited.len();
    let mut m_xx = DenseMatrix::zeros(k);
    for (r, &i) in excited.iter().enumerate() {
        for (c, &j) in excited.iter().enumerate() {
            m_xx.set(r, c, m.get(i, j));
        }
    }
    let lu = m_xx.lu().map_err(|source| PlasmaError::Singular { levels: ids(&excited), source })?;

    let rhs_for = |weights: &dyn Fn(usize) -> f64| -> Vec<f64> {
        excited
            .iter()
            .map(|&i| -driver_idx.iter().enumerate().map(|(d, &j)| m.get(i, j) * weights(d)).sum::<f64>())
            .collect()
    };
    let totals = lu.solve(&rhs_for(&|d| driver_populations[d]));
    let per_driver: Vec<Vec<f64>> = (0..driver_idx.len())
        .map(|only| lu.solve(&rhs_for(&|d| if d == only { driver_populations[d] } else { 0.0 })))
        .collect();

    let floor = -NEGATIVE_TOLERANCE * scale;
    let mut clamped = Vec::new();
    let mut levels = Vec::with_capacity(k);
    for (r, &i) in excited.iter().enumerate() {
        let record = &sys.levels.levels()[i];
        let mut total = totals[r];
        let mut contributions: Vec<f64> = per_driver.iter().map(|sol| sol[r]).collect();
        let lowest = contributions.iter().copied().fold(total, f64::min);
        if lowest < floor {
            return Err(PlasmaError::NegativePopulation { level: record.id.clone(), value: lowest });
        }
        if lowest < 0.0 {
            clamped.push(record.id.clone());
            total = total.max(0.0);
            contributions.iter_mut().for_each(|c| *c = c.max(0.0));
        }
        levels.push(LevelPopulation { id: record.id.clone(), energy_cm1: record.energy_cm1(), total, contributions });
    }
    Ok(PopulationResult { drivers, levels, clamped })
}

/// Levels not reachable from any driver along positive off-diagonal rates.
#[allow(clippy::needless_range_loop)]
fn unreachable_levels(m: &DenseMatrix, drivers: &[usize]) -> Vec<usize> {
    let n = m.dim();
    let mut reached = vec![false; n];
    let mut queue: VecDeque<usize> = drivers.iter().copied().collect();
    for &d in drivers {
        reached[d] = true;
    }
    while let Some(j) = queue.pop_front() {
        for i in 0..n {
            if i != j && !reached[i] && m.get(i, j) > 0.0 {
                reached[i] = true;
                queue.push_back(i);
            }
        }
    }
    (0..n).filter(|&i| !reached[i]).collect()
}

/// Levels above ground with no E1-allowed line to any lower level.
/// Returned in energy order.
pub fn find_metastables(levels: &LevelTable, lines: &LineTable) -> Vec<String> {
    levels
        .iter()
        .skip(1)
        .filter(|level| {
            !lines
                .from_upper(&level.id)
                .any(|line| levels.get(&line.lower).is_some_and(|lower| single_photon_allowed(level, lower)))
        })
        .map(|level| level.id.clone())
        .collect()
}
