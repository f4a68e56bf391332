//! Search for two-photon transitions reachable with a degenerate SPDC pair.
//!
//! The pump photon carries the full transition energy, so a transition of
//! `E` cm⁻¹ needs a pump at `10⁷/E` nm and each photon of the degenerate
//! pair sits at twice that wavelength. A candidate must obey the two-photon
//! LS rules, put its pump inside the configured window and, optionally, be
//! bridged by a real intermediate level that is E1-connected to both ends.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::atomic::{
    single_photon_violations, two_photon_violations, LevelRecord, LevelTable, LineTable, RuleViolation, TwoPhotonRules,
};
use crate::plasma::PopulationResult;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FinderError {
    #[error("level table is empty")]
    EmptyLevels,
    #[error("unknown level '{0}'")]
    UnknownLevel(String),
    #[error("{0}")]
    Domain(String),
}

type Result<T> = std::result::Result<T, FinderError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchConstraints {
    /// Pump wavelength window `[min, max]` in nm, inclusive.
    pub pump_window_nm: (f64, f64),
    pub require_intermediate_path: bool,
    /// Accept intermediates outside the (lower, upper) energy interval.
    pub relax_intermediate_energy: bool,
    /// Let the two E1 steps through the intermediate change spin
    /// (intercombination); the lower-upper pair itself still needs ΔS=0.
    pub allow_intercombination: bool,
    pub apply_j_rule: bool,
}

impl Default for SearchConstraints {
    fn default() -> Self {
        SearchConstraints {
            pump_window_nm: (350.0, 400.0),
            require_intermediate_path: true,
            relax_intermediate_energy: false,
            allow_intercombination: false,
            apply_j_rule: false,
        }
    }
}

impl SearchConstraints {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.pump_window_nm;
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(FinderError::Domain(format!("pump window [{lo}, {hi}] nm must satisfy 0 < min < max")));
        }
        Ok(())
    }

    fn rules(&self) -> TwoPhotonRules {
        TwoPhotonRules { require_j_rule: self.apply_j_rule }
    }

    fn in_window(&self, pump_nm: f64) -> bool {
        pump_nm >= self.pump_window_nm.0 && pump_nm <= self.pump_window_nm.1
    }
}

/// Exponents of the three factors in the default score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoreWeights {
    pub lower_population: f64,
    pub branching: f64,
    pub inversion_penalty: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights { lower_population: 1.0, branching: 1.0, inversion_penalty: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Intermediate {
    pub id: String,
    /// Intermediate energy minus the two-photon midpoint `(E_lower + E_upper)/2`.
    pub detuning_cm1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluorescenceLine {
    pub lower: String,
    pub wavelength_nm: f64,
    pub a_value: f64,
    pub branching: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateTransition {
    pub lower: String,
    pub upper: String,
    pub transition_energy_cm1: f64,
    pub pump_wavelength_nm: f64,
    pub degenerate_photon_wavelength_nm: f64,
    pub intermediates: Vec<Intermediate>,
    pub lower_population: Option<f64>,
    pub upper_population: Option<f64>,
    pub fluorescence: Vec<FluorescenceLine>,
    pub score: f64,
    /// False when populations were unavailable and the score is 0.
    pub ranked: bool,
}

/// `λ_p = 10⁷ / E`, nm from cm⁻¹.
pub fn pump_wavelength(transition_energy_cm1: f64) -> Result<f64> {
    if !(transition_energy_cm1 > 0.0 && transition_energy_cm1.is_finite()) {
        return Err(FinderError::Domain(format!(
            "transition energy must be positive, got {transition_energy_cm1} cm-1"
        )));
    }
    Ok(1e7 / transition_energy_cm1)
}

/// Radiative decays of `upper` with branching fractions `A_k / ΣA`,
/// strongest first.
pub fn fluorescence_lines(upper: &str, lines: &LineTable) -> Vec<FluorescenceLine> {
    let decays: Vec<_> = lines.from_upper(upper).collect();
    let total: f64 = decays.iter().map(|l| l.a_value).sum();
    let mut out: Vec<FluorescenceLine> = decays
        .into_iter()
        .map(|l| FluorescenceLine {
            lower: l.lower.clone(),
            wavelength_nm: l.wavelength_nm(),
            a_value: l.a_value,
            branching: l.a_value / total,
        })
        .collect();
    out.sort_by(|a, b| b.a_value.total_cmp(&a.a_value).then_with(|| a.lower.cmp(&b.lower)));
    out
}

/// `N_lower^a · b_max^b / (1 + N_upper/N_lower)^c`; 0 without populations.
pub fn score_candidate(c: &CandidateTransition, weights: &ScoreWeights) -> f64 {
    let (Some(n_lower), Some(n_upper)) = (c.lower_population, c.upper_population) else {
        return 0.0;
    };
    if n_lower <= 0.0 {
        return 0.0;
    }
    let b_max = c.fluorescence.iter().map(|f| f.branching).fold(0.0, f64::max);
    n_lower.powf(weights.lower_population) * b_max.powf(weights.branching)
        / (1.0 + n_upper / n_lower).powf(weights.inversion_penalty)
}

fn e1_step(a: &LevelRecord, b: &LevelRecord, constraints: &SearchConstraints) -> bool {
    single_photon_violations(a, b).iter().all(|v| constraints.allow_intercombination && *v == RuleViolation::Spin)
}

fn intermediates(
    levels: &LevelTable,
    lower: &LevelRecord,
    upper: &LevelRecord,
    constraints: &SearchConstraints,
) -> Vec<Intermediate> {
    let midpoint = 0.5 * (lower.energy_cm1() + upper.energy_cm1());
    levels
        .iter()
        .filter(|i| i.id != lower.id && i.id != upper.id)
        .filter(|i| {
            constraints.relax_intermediate_energy
                || (i.energy_cm1() > lower.energy_cm1() && i.energy_cm1() < upper.energy_cm1())
        })
        .filter(|i| e1_step(lower, i, constraints) && e1_step(i, upper, constraints))
        .map(|i| Intermediate { id: i.id.clone(), detuning_cm1: i.energy_cm1() - midpoint })
        .collect()
}

/// Why a (lower, upper) pair is not a candidate.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum Exclusion {
    NotAbove,
    Rule { rule: RuleViolation },
    OutsideWindow { pump_nm: f64 },
    NoIntermediatePath,
}

impl fmt::Display for Exclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exclusion::NotAbove => f.write_str("upper level is not above lower level"),
            Exclusion::Rule { rule } => write!(f, "{rule}"),
            Exclusion::OutsideWindow { pump_nm } => write!(f, "pump {pump_nm:.3} nm outside window"),
            Exclusion::NoIntermediatePath => f.write_str("no E1-connected intermediate level"),
        }
    }
}

/// Every predicate that excludes `lower → upper`; empty means accepted.
pub fn explain(
    levels: &LevelTable,
    constraints: &SearchConstraints,
    lower: &str,
    upper: &str,
) -> Result<Vec<Exclusion>> {
    let lo = levels.get(lower).ok_or_else(|| FinderError::UnknownLevel(lower.to_string()))?;
    let hi = levels.get(upper).ok_or_else(|| FinderError::UnknownLevel(upper.to_string()))?;
    let mut out = Vec::new();
    let gap = hi.energy_cm1() - lo.energy_cm1();
    if !(gap > 0.0) {
        out.push(Exclusion::NotAbove);
    }
    out.extend(two_photon_violations(lo, hi, constraints.rules()).into_iter().map(|rule| Exclusion::Rule { rule }));
    if gap > 0.0 {
        let pump_nm = pump_wavelength(gap)?;
        if !constraints.in_window(pump_nm) {
            out.push(Exclusion::OutsideWindow { pump_nm });
        }
    }
    if constraints.require_intermediate_path && intermediates(levels, lo, hi, constraints).is_empty() {
        out.push(Exclusion::NoIntermediatePath);
    }
    Ok(out)
}

/// All accepted pairs, best score first.
///
/// Ties are broken by higher lower-level population, then lower transition
/// energy, then lower id and upper id lexically, so the order is fully
/// determined by the inputs.
pub fn find_candidates(
    levels: &LevelTable,
    lines: &LineTable,
    populations: Option<&PopulationResult>,
    constraints: &SearchConstraints,
    weights: &ScoreWeights,
) -> Result<Vec<CandidateTransition>> {
    if levels.is_empty() {
        return Err(FinderError::EmptyLevels);
    }
    constraints.validate()?;
    let rules = constraints.rules();
    let all = levels.levels();
    let mut out = Vec::new();
    for (i, lower) in all.iter().enumerate() {
        for upper in &all[i + 1..] {
            let gap = upper.energy_cm1() - lower.energy_cm1();
            if !(gap > 0.0) || !two_photon_violations(lower, upper, rules).is_empty() {
                continue;
            }
            let pump_nm = pump_wavelength(gap)?;
            if !constraints.in_window(pump_nm) {
                continue;
            }
            let bridges = intermediates(levels, lower, upper, constraints);
            if constraints.require_intermediate_path && bridges.is_empty() {
                continue;
            }
            let mut candidate = CandidateTransition {
                lower: lower.id.clone(),
                upper: upper.id.clone(),
                transition_energy_cm1: gap,
                pump_wavelength_nm: pump_nm,
                degenerate_photon_wavelength_nm: 2.0 * pump_nm,
                intermediates: bridges,
                lower_population: populations.and_then(|p| p.population(&lower.id)),
                upper_population: populations.and_then(|p| p.population(&upper.id)),
                fluorescence: fluorescence_lines(&upper.id, lines),
                score: 0.0,
                ranked: false,
            };
            candidate.ranked = candidate.lower_population.is_some() && candidate.upper_population.is_some();
            candidate.score = score_candidate(&candidate, weights);
            out.push(candidate);
        }
    }
    out.sort_by(rank_order);
    Ok(out)
}

fn rank_order(a: &CandidateTransition, b: &CandidateTransition) -> Ordering {
    let pop = |c: &CandidateTransition| c.lower_population.unwrap_or(f64::NEG_INFINITY);
    b.score
        .total_cmp(&a.score)
        .then_with(|| pop(b).total_cmp(&pop(a)))
        .then_with(|| a.transition_energy_cm1.total_cmp(&b.transition_energy_cm1))
        .then_with(|| a.lower.cmp(&b.lower))
        .then_with(|| a.upper.cmp(&b.upper))
}
