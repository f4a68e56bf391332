//! Bundled sample data.
//!
//! The Ar II level, line and collision tables and the Ar rate-coefficient
//! table are approximate, qualitatively correct placeholders for tests and
//! demonstrations. They are not evaluated atomic data.

use crate::atomic::{parse_level_table, parse_line_table, AtomicDataError, LevelTable, LineTable, TableFormat};
use crate::plasma::{parse_collision_table, parse_rate_table, CollisionData, PlasmaError, RateCoefficientTable};

pub const AR_II_LEVELS_CSV: &str = include_str!("../data/ar_ii_levels.csv");
pub const AR_II_LINES_CSV: &str = include_str!("../data/ar_ii_lines.csv");
pub const AR_II_COLLISIONS_CSV: &str = include_str!("../data/ar_ii_collisions.csv");
pub const AR_RATE_COEFFICIENTS_CSV: &str = include_str!("../data/ar_rate_coefficients.csv");

pub fn ar_ii_levels() -> Result<LevelTable, AtomicDataError> {
    parse_level_table(AR_II_LEVELS_CSV.as_bytes(), TableFormat::default())
}

pub fn ar_ii_lines(levels: &LevelTable) -> Result<LineTable, AtomicDataError> {
    parse_line_table(AR_II_LINES_CSV.as_bytes(), TableFormat::default(), levels)
}

pub fn ar_ii_collisions(levels: &LevelTable) -> Result<CollisionData, PlasmaError> {
    parse_collision_table(AR_II_COLLISIONS_CSV.as_bytes(), TableFormat::default(), levels)
}

pub fn ar_rate_table() -> Result<RateCoefficientTable, PlasmaError> {
    parse_rate_table(AR_RATE_COEFFICIENTS_CSV.as_bytes(), TableFormat::default())
}
