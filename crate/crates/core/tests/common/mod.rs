#![allow(dead_code)]

use etpa_core::atomic::{LevelRecord, LevelTable, Parity, TermSymbol};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A level table with random LS terms and energies in `(0, e_max)`.
pub fn random_levels(rng: &mut ChaCha8Rng, n: usize, e_max: f64) -> LevelTable {
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let multiplicity = rng.gen_range(1..=4u32);
        let l = rng.gen_range(0..=3u32);
        let parity = if rng.gen_bool(0.5) { Parity::Even } else { Parity::Odd };
        let term = TermSymbol::new(multiplicity, l, parity).unwrap();
        // 2J runs from |2L - 2S| to 2L + 2S in steps of two.
        let s2 = multiplicity - 1;
        let lo = (2 * l).abs_diff(s2);
        let hi = 2 * l + s2;
        let twice_j = lo + 2 * rng.gen_range(0..=(hi - lo) / 2);
        let energy = if k == 0 { 0.0 } else { rng.gen_range(1.0..e_max) };
        out.push(LevelRecord::new(format!("L{k:02}"), "", term, twice_j, energy).unwrap());
    }
    LevelTable::new(out).unwrap()
}

fn parity_odd(level: &LevelRecord) -> bool {
    level.term.parity() == Parity::Odd
}

/// Electric-dipole rules written out directly from LS coupling; with
/// `spin_free` the ΔS=0 condition is dropped.
pub fn e1(a: &LevelRecord, b: &LevelRecord, spin_free: bool) -> bool {
    let (la, lb) = (a.term.l() as i64, b.term.l() as i64);
    let (ja, jb) = (a.twice_j as i64, b.twice_j as i64);
    parity_odd(a) != parity_odd(b)
        && (spin_free || a.term.multiplicity() == b.term.multiplicity())
        && (la - lb).abs() <= 1
        && !(la == 0 && lb == 0)
        && (ja - jb).abs() <= 2
        && !(ja == 0 && jb == 0)
}

pub fn two_photon(a: &LevelRecord, b: &LevelRecord, j_rule: bool) -> bool {
    let dl = (a.term.l() as i64 - b.term.l() as i64).abs();
    parity_odd(a) == parity_odd(b)
        && a.term.multiplicity() == b.term.multiplicity()
        && (dl == 0 || dl == 2)
        && (!j_rule || (a.twice_j as i64 - b.twice_j as i64).abs() <= 4)
}
