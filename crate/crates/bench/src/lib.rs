//! Shared inputs for the solver benchmarks.

use etpa_core::atomic::{LevelTable, LineTable};
use etpa_core::plasma::{find_metastables, CrSystem};
use etpa_core::samples::{ar_ii_collisions, ar_ii_levels, ar_ii_lines};

/// The bundled Ar II sample, driven by the ground level and every metastable.
pub fn ar_ii_system(te_ev: f64, n_e_cm3: f64) -> (CrSystem, Vec<f64>) {
    let levels = ar_ii_levels().expect("bundled levels");
    let lines = ar_ii_lines(&levels).expect("bundled lines");
    let collisions = ar_ii_collisions(&levels).expect("bundled collisions");
    let mut drivers = vec![levels.ground().id.clone()];
    drivers.extend(find_metastables(&levels, &lines));
    let pops = vec![1.0; drivers.len()];
    let sys = CrSystem::new(levels, lines, collisions, n_e_cm3, te_ev, drivers).expect("valid system");
    (sys, pops)
}

pub fn ar_ii_tables() -> (LevelTable, LineTable) {
    let levels = ar_ii_levels().expect("bundled levels");
    let lines = ar_ii_lines(&levels).expect("bundled lines");
    (levels, lines)
}
