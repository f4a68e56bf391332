//! Planning toolkit for entangled two-photon absorption (ETPA) experiments
//! in plasma.
//!
//! - [`quantities`]: unit-tagged values and conversions.
//! - [`atomic`]: level and line tables, term symbols, selection rules.
//! - [`biphoton`]: SPDC pair source model.
//! - [`rates`]: photon flux, classical and entangled TPA rates.
//! - [`plasma`]: charge-state balance and collisional-radiative populations.
//! - [`finder`]: two-photon transition search and ranking.
//! - [`samples`]: bundled, non-authoritative Ar data for tests and demos.

// `!(x > 0.0)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atomic;
pub mod biphoton;
pub mod constants;
pub mod finder;
pub mod linalg;
pub mod plasma;
pub mod quantities;
pub mod rates;
pub mod samples;

pub use atomic::{LevelRecord, LevelTable, LineRecord, LineTable, Parity, TermSymbol};
pub use finder::{find_candidates, CandidateTransition, ScoreWeights, SearchConstraints};
pub use quantities::{Dimension, Quantity, QuantityError, Unit, UnitSystem};
