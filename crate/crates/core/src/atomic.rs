//! Atomic level and line tables, LS term symbols, and electric-dipole
//! selection rules for one- and two-photon transitions.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::quantities::{Quantity, Unit};

/// Spectroscopic letters for L = 0..=12.
const L_LETTERS: [char; 13] = ['S', 'P', 'D', 'F', 'G', 'H', 'I', 'K', 'L', 'M', 'N', 'O', 'Q'];

pub const MAX_L: u32 = 12;

/// Relative tolerance between a tabulated wavelength and the one implied by
/// the level energies before a warning is raised.
pub const WAVELENGTH_TOLERANCE: f64 = 5e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AtomicDataError {
    #[error("bad term symbol '{text}' at byte {offset}: {reason}")]
    Term { text: String, offset: usize, reason: String },
    #[error("row {row}, column '{column}': {message}")]
    Field { row: u64, column: String, message: String },
    #[error("row {row}: {message}")]
    Row { row: u64, message: String },
    #[error("missing required column '{0}'")]
    MissingColumn(String),
    #[error("no levels")]
    NoLevels,
    #[error("multiple ground levels: {}", .0.join(", "))]
    MultipleGround(Vec<String>),
    #[error("no ground level (a level with energy exactly 0)")]
    NoGround,
    #[error("duplicate level id '{0}'")]
    DuplicateId(String),
    #[error("level '{id}': {reason}")]
    InvalidLevel { id: String, reason: String },
    #[error("row {row}: unknown level id '{id}'")]
    UnknownLevel { row: u64, id: String },
    #[error("duplicate line {upper} -> {lower}")]
    DuplicateLine { upper: String, lower: String },
    #[error("line {upper} -> {lower}: {reason}")]
    InvalidLine { upper: String, lower: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// An LS term `²ˢ⁺¹L` with explicit parity, written `2P*` for odd parity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TermSymbol {
    multiplicity: u32,
    l: u32,
    parity: Parity,
}

impl TermSymbol {
    pub fn new(multiplicity: u32, l: u32, parity: Parity) -> Result<Self, AtomicDataError> {
        let rendered = || format!("{multiplicity}L{l}");
        if multiplicity == 0 {
            return Err(AtomicDataError::Term {
                text: rendered(),
                offset: 0,
                reason: "multiplicity must be at least 1".into(),
            });
        }
        if l > MAX_L {
            return Err(AtomicDataError::Term {
                text: rendered(),
                offset: 0,
                reason: format!("L={l} exceeds the supported maximum {MAX_L}"),
            });
        }
        Ok(TermSymbol { multiplicity, l, parity })
    }

    pub fn multiplicity(&self) -> u32 {
        self.multiplicity
    }

    /// Twice the total spin, `2S = multiplicity − 1`.
    pub fn twice_spin(&self) -> u32 {
        self.multiplicity - 1
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn l_letter(&self) -> char {
        L_LETTERS[self.l as usize]
    }

    /// Whether `twice_j` is an allowed J for this term (|L−S| ≤ J ≤ L+S, and
    /// J integer or half-integer consistently with S).
    pub fn admits_j(&self, twice_j: u32) -> bool {
        let two_l = 2 * self.l as i64;
        let two_s = self.twice_spin() as i64;
        let tj = twice_j as i64;
        (two_l - two_s).abs() <= tj && tj <= two_l + two_s && (tj - two_s).rem_euclid(2) == 0
    }
}

impl fmt::Display for TermSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.multiplicity, self.l_letter())?;
        if self.parity == Parity::Odd {
            f.write_str("*")?;
        }
        Ok(())
    }
}

impl Serialize for TermSymbol {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl FromStr for TermSymbol {
    type Err = AtomicDataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_term(s)
    }
}

/// Parse `<digits><letter>[*]`. A trailing `*` (or `°`) marks odd parity.
pub fn parse_term(text: &str) -> Result<TermSymbol, AtomicDataError> {
    let err = |offset: usize, reason: &str| AtomicDataError::Term {
        text: text.to_string(),
        offset,
        reason: reason.to_string(),
    };
    let digits_end = text.find(|c: char| !c.is_ascii_digit()).unwrap_or(text.len());
    if digits_end == 0 {
        return Err(err(0, "expected multiplicity digits"));
    }
    let multiplicity: u32 = text[..digits_end].parse().map_err(|_| err(0, "multiplicity out of range"))?;
    if multiplicity == 0 {
        return Err(err(0, "multiplicity must be at least 1"));
    }
    let mut rest = text[digits_end..].char_indices();
    let (_, letter) = rest.next().ok_or_else(|| err(digits_end, "expected an orbital letter"))?;
    let l =
        L_LETTERS.iter().position(|&c| c == letter).ok_or_else(|| err(digits_end, "unknown orbital letter"))? as u32;
    let parity = match rest.next() {
        None => Parity::Even,
        Some((_, '*' | '°')) => Parity::Odd,
        Some((i, _)) => return Err(err(digits_end + i, "unexpected character")),
    };
    if let Some((i, _)) = rest.next() {
        return Err(err(digits_end + i, "trailing characters"));
    }
    Ok(TermSymbol { multiplicity, l, parity })
}

/// Parse J written as an integer, decimal ("1.5") or fraction ("3/2").
/// Returns 2J.
pub fn parse_twice_j(text: &str) -> Result<u32, String> {
    let text = text.trim();
    let twice = if let Some((num, den)) = text.split_once('/') {
        let num: u32 = num.trim().parse().map_err(|_| format!("bad J '{text}'"))?;
        match den.trim() {
            "2" => num,
            "1" => 2 * num,
            _ => return Err(format!("J denominator must be 1 or 2 in '{text}'")),
        }
    } else {
        let value: f64 = text.parse().map_err(|_| format!("bad J '{text}'"))?;
        let doubled = value * 2.0;
        if !(doubled >= 0.0) || doubled.fract() != 0.0 || doubled > u32::MAX as f64 {
            return Err(format!("J must be a non-negative half-integer, got '{text}'"));
        }
        doubled as u32
    };
    Ok(twice)
}

/// Render 2J as "1/2", "3/2" or "2".
pub fn format_twice_j(twice_j: u32) -> String {
    if twice_j.is_multiple_of(2) {
        (twice_j / 2).to_string()
    } else {
        format!("{twice_j}/2")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelRecord {
    pub id: String,
    pub configuration: String,
    pub term: TermSymbol,
    /// Twice the total angular momentum.
    pub twice_j: u32,
    pub energy: Quantity,
    /// Optional annotation carried by curated tables.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metastable_note: Option<bool>,
}

impl LevelRecord {
    pub fn new(
        id: impl Into<String>,
        configuration: impl Into<String>,
        term: TermSymbol,
        twice_j: u32,
        energy_cm1: f64,
    ) -> Result<Self, AtomicDataError> {
        let id = id.into();
        let invalid = |reason: String| AtomicDataError::InvalidLevel { id: id.clone(), reason };
        let energy = Quantity::new(energy_cm1, Unit::Wavenumber).map_err(|e| invalid(e.to_string()))?;
        if energy_cm1 < 0.0 {
            return Err(invalid(format!("negative energy {energy_cm1} cm-1")));
        }
        if !term.admits_j(twice_j) {
            return Err(invalid(format!("J={} is incompatible with term {term}", format_twice_j(twice_j))));
        }
        Ok(LevelRecord {
            id: id.clone(),
            configuration: configuration.into(),
            term,
            twice_j,
            energy,
            metastable_note: None,
        })
    }

    pub fn energy_cm1(&self) -> f64 {
        self.energy.value()
    }

    pub fn parity(&self) -> Parity {
        self.term.parity
    }

    /// Statistical weight 2J+1.
    pub fn weight(&self) -> f64 {
        f64::from(self.twice_j + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineRecord {
    pub upper: String,
    pub lower: String,
    /// Einstein A coefficient, s⁻¹.
    pub a_value: f64,
    pub wavelength: Quantity,
}

impl LineRecord {
    pub fn wavelength_nm(&self) -> f64 {
        self.wavelength.value_in(Unit::Nanometer).expect("length")
    }
}

/// Levels with unique ids, sorted by energy, with exactly one ground level.
#[derive(Debug, Clone, Default)]
pub struct LevelTable {
    levels: Vec<LevelRecord>,
    index: HashMap<String, usize>,
}

impl LevelTable {
    pub fn new(mut levels: Vec<LevelRecord>) -> Result<Self, AtomicDataError> {
        if levels.is_empty() {
            return Err(AtomicDataError::NoLevels);
        }
        let mut seen = HashSet::new();
        for level in &levels {
            if !seen.insert(level.id.as_str()) {
                return Err(AtomicDataError::DuplicateId(level.id.clone()));
            }
        }
        let ground: Vec<String> = levels.iter().filter(|l| l.energy_cm1() == 0.0).map(|l| l.id.clone()).collect();
        match ground.len() {
            0 => return Err(AtomicDataError::NoGround),
            1 => {}
            _ => return Err(AtomicDataError::MultipleGround(ground)),
        }
        levels.sort_by(|a, b| a.energy_cm1().total_cmp(&b.energy_cm1()).then_with(|| a.id.cmp(&b.id)));
        let index = levels.iter().enumerate().map(|(i, l)| (l.id.clone(), i)).collect();
        Ok(LevelTable { levels, index })
    }

    pub fn levels(&self) -> &[LevelRecord] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn ground(&self) -> &LevelRecord {
        &self.levels[0]
    }

    pub fn get(&self, id: &str) -> Option<&LevelRecord> {
        self.index.get(id).map(|&i| &self.levels[i])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LevelRecord> {
        self.levels.iter()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationWarning {
    pub message: String,
}

/// Lines whose endpoints all resolve in a [`LevelTable`].
#[derive(Debug, Clone, Default)]
pub struct LineTable {
    lines: Vec<LineRecord>,
    warnings: Vec<ValidationWarning>,
}

impl LineTable {
    /// Validate `(upper, lower, A, wavelength_nm)` tuples against `levels`.
    pub fn new(
        levels: &LevelTable,
        entries: impl IntoIterator<Item = (String, String, f64, Option<f64>)>,
    ) -> Result<Self, AtomicDataError> {
        let mut table = LineTable::default();
        let mut pairs = HashSet::new();
        for (upper, lower, a_value, wavelength_nm) in entries {
            table.push(levels, &mut pairs, upper, lower, a_value, wavelength_nm, None)?;
        }
        Ok(table)
    }

    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        levels: &LevelTable,
        pairs: &mut HashSet<(String, String)>,
        upper: String,
        lower: String,
        a_value: f64,
        wavelength_nm: Option<f64>,
        row: Option<u64>,
    ) -> Result<(), AtomicDataError> {
        let lookup = |id: &str| {
            levels.get(id).ok_or_else(|| AtomicDataError::UnknownLevel { row: row.unwrap_or(0), id: id.to_string() })
        };
        let hi = lookup(&upper)?;
        let lo = lookup(&lower)?;
        let invalid =
            |reason: String| AtomicDataError::InvalidLine { upper: upper.clone(), lower: lower.clone(), reason };
        if !(a_value > 0.0) || !a_value.is_finite() {
            return Err(invalid(format!("A must be positive, got {a_value}")));
        }
        let gap = hi.energy_cm1() - lo.energy_cm1();
        if !(gap > 0.0) {
            return Err(invalid("upper level is not above lower level".into()));
        }
        if !pairs.insert((upper.clone(), lower.clone())) {
            return Err(AtomicDataError::DuplicateLine { upper, lower });
        }
        let implied_nm = 1e7 / gap;
        let nm = match wavelength_nm {
            Some(nm) => {
                if !(nm > 0.0) || !nm.is_finite() {
                    return Err(invalid(format!("wavelength must be positive, got {nm}")));
                }
                if ((nm - implied_nm) / implied_nm).abs() > WAVELENGTH_TOLERANCE {
                    self.warnings.push(ValidationWarning {
                        message: format!(
                            "line {upper} -> {lower}: wavelength {nm} nm differs from \
                             level-energy value {implied_nm:.4} nm by more than {:.1}%",
                            WAVELENGTH_TOLERANCE * 100.0
                        ),
                    });
                }
                nm
            }
            None => implied_nm,
        };
        let wavelength = Quantity::new(nm, Unit::Nanometer).map_err(|e| invalid(e.to_string()))?;
        self.lines.push(LineRecord { upper, lower, a_value, wavelength });
        Ok(())
    }

    pub fn lines(&self) -> &[LineRecord] {
        &self.lines
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn warnings(&self) -> &[ValidationWarning] {
        &self.warnings
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LineRecord> {
        self.lines.iter()
    }

    pub fn from_upper<'a>(&'a self, upper: &'a str) -> impl Iterator<Item = &'a LineRecord> + 'a {
        self.lines.iter().filter(move |l| l.upper == upper)
    }
}

/// CSV dialect options for table input.
#[derive(Debug, Clone, Copy)]
pub struct TableFormat {
    pub delimiter: u8,
}

impl Default for TableFormat {
    fn default() -> Self {
        TableFormat { delimiter: b',' }
    }
}

pub(crate) fn csv_reader<R: Read>(input: R, format: TableFormat) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .delimiter(format.delimiter)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(input)
}

/// Column lookup over a CSV header, shared by the table parsers.
pub(crate) struct Columns {
    names: Vec<String>,
}

impl Columns {
    pub(crate) fn new<R: Read>(reader: &mut csv::Reader<R>) -> Result<Self, AtomicDataError> {
        let headers = reader.headers().map_err(|e| AtomicDataError::Row { row: 1, message: e.to_string() })?;
        Ok(Columns { names: headers.iter().map(str::to_string).collect() })
    }

    pub(crate) fn require(&self, name: &str) -> Result<usize, AtomicDataError> {
        self.optional(name).ok_or_else(|| AtomicDataError::MissingColumn(name.to_string()))
    }

    pub(crate) fn optional(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

pub(crate) fn record_row(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

pub(crate) fn field<'r>(record: &'r csv::StringRecord, column: usize, name: &str) -> Result<&'r str, AtomicDataError> {
    record.get(column).ok_or_else(|| AtomicDataError::Field {
        row: record_row(record),
        column: name.to_string(),
        message: "missing value".into(),
    })
}

pub(crate) fn number_field(record: &csv::StringRecord, column: usize, name: &str) -> Result<f64, AtomicDataError> {
    let text = field(record, column, name)?;
    let value: f64 = text.parse().map_err(|_| AtomicDataError::Field {
        row: record_row(record),
        column: name.to_string(),
        message: format!("'{text}' is not a number"),
    })?;
    if !value.is_finite() {
        return Err(AtomicDataError::Field {
            row: record_row(record),
            column: name.to_string(),
            message: format!("'{text}' is not finite"),
        });
    }
    Ok(value)
}

fn csv_error(e: csv::Error) -> AtomicDataError {
    let row = e.position().map_or(0, |p| p.line());
    AtomicDataError::Row { row, message: e.to_string() }
}

pub(crate) fn read_records<R: Read>(
    reader: &mut csv::Reader<R>,
) -> impl Iterator<Item = Result<csv::StringRecord, AtomicDataError>> + '_ {
    reader.records().map(|r| r.map_err(csv_error))
}

/// Parse a level CSV with header `id,configuration,term,J,energy_cm1`.
/// An optional boolean `metastable` column is kept as an annotation.
pub fn parse_level_table<R: Read>(input: R, format: TableFormat) -> Result<LevelTable, AtomicDataError> {
    let mut reader = csv_reader(input, format);
    let columns = Columns::new(&mut reader)?;
    let c_id = columns.require("id")?;
    let c_conf = columns.require("configuration")?;
    let c_term = columns.require("term")?;
    let c_j = columns.require("J")?;
    let c_energy = columns.require("energy_cm1")?;
    let c_meta = columns.optional("metastable");

    let mut levels = Vec::new();
    for record in read_records(&mut reader) {
        let record = record?;
        let row = record_row(&record);
        let id = field(&record, c_id, "id")?;
        if id.is_empty() {
            return Err(AtomicDataError::Field { row, column: "id".into(), message: "empty id".into() });
        }
        let term = parse_term(field(&record, c_term, "term")?)?;
        let twice_j = parse_twice_j(field(&record, c_j, "J")?).map_err(|message| AtomicDataError::Field {
            row,
            column: "J".into(),
            message,
        })?;
        let energy = number_field(&record, c_energy, "energy_cm1")?;
        let mut level = LevelRecord::new(id, field(&record, c_conf, "configuration")?, term, twice_j, energy)?;
        if let Some(c) = c_meta {
            let text = field(&record, c, "metastable")?;
            level.metastable_note = match text {
                "" => None,
                "1" | "y" | "yes" | "true" => Some(true),
                "0" | "n" | "no" | "false" => Some(false),
                other => {
                    return Err(AtomicDataError::Field {
                        row,
                        column: "metastable".into(),
                        message: format!("expected yes/no, got '{other}'"),
                    })
                }
            };
        }
        levels.push(level);
    }
    LevelTable::new(levels)
}

/// Parse a line CSV with header `upper_id,lower_id,A_s1,wavelength_nm`.
/// Blank (or absent) wavelengths are computed from the level energies.
pub fn parse_line_table<R: Read>(
    input: R,
    format: TableFormat,
    levels: &LevelTable,
) -> Result<LineTable, AtomicDataError> {
    let mut reader = csv_reader(input, format);
    let columns = Columns::new(&mut reader)?;
    let c_up = columns.require("upper_id")?;
    let c_lo = columns.require("lower_id")?;
    let c_a = columns.require("A_s1")?;
    let c_wl = columns.optional("wavelength_nm");

    let mut table = LineTable::default();
    let mut pairs = HashSet::new();
    for record in read_records(&mut reader) {
        let record = record?;
        let row = record_row(&record);
        let upper = field(&record, c_up, "upper_id")?.to_string();
        let lower = field(&record, c_lo, "lower_id")?.to_string();
        let a_value = number_field(&record, c_a, "A_s1")?;
        let wavelength = match c_wl {
            Some(c) if !field(&record, c, "wavelength_nm")?.is_empty() => {
                Some(number_field(&record, c, "wavelength_nm")?)
            }
            _ => None,
        };
        table.push(levels, &mut pairs, upper, lower, a_value, wavelength, Some(row))?;
    }
    Ok(table)
}

/// A selection rule that a pair of levels can violate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleViolation {
    /// ΔS ≠ 0.
    Spin,
    /// ΔL outside the allowed set, or L=0 ↔ L=0 for one photon.
    Orbital,
    Parity,
    /// ΔJ outside the allowed set, or J=0 ↔ J=0 for one photon.
    TotalJ,
}

impl fmt::Display for RuleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleViolation::Spin => "spin rule (ΔS=0)",
            RuleViolation::Orbital => "orbital rule (ΔL)",
            RuleViolation::Parity => "parity rule",
            RuleViolation::TotalJ => "total-J rule (ΔJ)",
        })
    }
}

/// Options for the two-photon rule set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TwoPhotonRules {
    /// Also require ΔJ ∈ {0, ±1, ±2}.
    pub require_j_rule: bool,
}

/// All electric-dipole (E1) rules violated by a single-photon transition.
pub fn single_photon_violations(a: &LevelRecord, b: &LevelRecord) -> Vec<RuleViolation> {
    let mut out = Vec::new();
    if a.parity() == b.parity() {
        out.push(RuleViolation::Parity);
    }
    if a.term.multiplicity != b.term.multiplicity {
        out.push(RuleViolation::Spin);
    }
    let dl = a.term.l.abs_diff(b.term.l);
    if dl > 1 || (a.term.l == 0 && b.term.l == 0) {
        out.push(RuleViolation::Orbital);
    }
    let dj = a.twice_j.abs_diff(b.twice_j);
    if dj > 2 || (a.twice_j == 0 && b.twice_j == 0) {
        out.push(RuleViolation::TotalJ);
    }
    out
}

/// LS-coupling E1 rules: parity change, ΔS=0, ΔL∈{0,±1} (not 0↔0),
/// ΔJ∈{0,±1} (not 0↔0).
pub fn single_photon_allowed(a: &LevelRecord, b: &LevelRecord) -> bool {
    single_photon_violations(a, b).is_empty()
}

pub fn two_photon_violations(g: &LevelRecord, e: &LevelRecord, rules: TwoPhotonRules) -> Vec<RuleViolation> {
    let mut out = Vec::new();
    if g.parity() != e.parity() {
        out.push(RuleViolation::Parity);
    }
    if g.term.multiplicity != e.term.multiplicity {
        out.push(RuleViolation::Spin);
    }
    if !matches!(g.term.l.abs_diff(e.term.l), 0 | 2) {
        out.push(RuleViolation::Orbital);
    }
    if rules.require_j_rule && g.twice_j.abs_diff(e.twice_j) > 4 {
        out.push(RuleViolation::TotalJ);
    }
    out
}

/// Two-photon rules: ΔS=0, ΔL∈{0,±2}, same parity, and optionally
/// ΔJ∈{0,±1,±2}.
pub fn two_photon_allowed(g: &LevelRecord, e: &LevelRecord, rules: TwoPhotonRules) -> bool {
    two_photon_violations(g, e, rules).is_empty()
}
