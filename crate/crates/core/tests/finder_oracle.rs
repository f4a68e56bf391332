mod common;

use std::collections::BTreeSet;

use common::{e1, random_levels, two_photon};
use etpa_core::atomic::{LevelTable, LineTable};
use etpa_core::finder::{find_candidates, ScoreWeights, SearchConstraints};
use etpa_core::plasma::{DriverPopulation, LevelPopulation, PopulationResult};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent double loop over all ordered pairs.
fn brute_force(levels: &LevelTable, c: &SearchConstraints) -> BTreeSet<(String, String)> {
    let all = levels.levels();
    let mut out = BTreeSet::new();
    for g in all {
        for e in all {
            let gap = e.energy_cm1() - g.energy_cm1();
            if gap <= 0.0 || !two_photon(g, e, c.apply_j_rule) {
                continue;
            }
            let pump = 1e7 / gap;
            if pump < c.pump_window_nm.0 || pump > c.pump_window_nm.1 {
                continue;
            }
            let bridged = all.iter().any(|i| {
                i.id != g.id
                    && i.id != e.id
                    && (c.relax_intermediate_energy
                        || (i.energy_cm1() > g.energy_cm1() && i.energy_cm1() < e.energy_cm1()))
                    && e1(g, i, c.allow_intercombination)
                    && e1(i, e, c.allow_intercombination)
            });
            if c.require_intermediate_path && !bridged {
                continue;
            }
            out.insert((g.id.clone(), e.id.clone()));
        }
    }
    out
}

fn random_constraints(rng: &mut ChaCha8Rng) -> SearchConstraints {
    let lo = rng.gen_range(250.0..450.0);
    SearchConstraints {
        pump_window_nm: (lo, lo + rng.gen_range(20.0..200.0)),
        require_intermediate_path: rng.gen_bool(0.7),
        relax_intermediate_energy: rng.gen_bool(0.3),
        allow_intercombination: rng.gen_bool(0.3),
        apply_j_rule: rng.gen_bool(0.3),
    }
}

#[test]
fn matches_brute_force_on_random_tables() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e57);
    let mut nonempty = 0;
    for _ in 0..100 {
        let n = rng.gen_range(2..=50);
        let levels = random_levels(&mut rng, n, 60000.0);
        let constraints = random_constraints(&mut rng);
        let found =
            find_candidates(&levels, &LineTable::default(), None, &constraints, &ScoreWeights::default()).unwrap();
        let got: BTreeSet<_> = found.iter().map(|c| (c.lower.clone(), c.upper.clone())).collect();
        assert_eq!(got.len(), found.len());
        let want = brute_force(&levels, &constraints);
        assert_eq!(got, want);
        nonempty += usize::from(!want.is_empty());
    }
    assert!(nonempty > 20, "too few non-trivial instances: {nonempty}");
}

#[test]
fn candidates_satisfy_soundness_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..50 {
        let levels = random_levels(&mut rng, 40, 60000.0);
        let constraints = random_constraints(&mut rng);
        for c in find_candidates(&levels, &LineTable::default(), None, &constraints, &ScoreWeights::default()).unwrap()
        {
            assert!(c.pump_wavelength_nm >= constraints.pump_window_nm.0);
            assert!(c.pump_wavelength_nm <= constraints.pump_window_nm.1);
            assert_eq!(c.degenerate_photon_wavelength_nm, 2.0 * c.pump_wavelength_nm);
            let lo = levels.get(&c.lower).unwrap();
            let hi = levels.get(&c.upper).unwrap();
            assert_eq!(lo.parity(), hi.parity());
            for i in &c.intermediates {
                let mid = levels.get(&i.id).unwrap();
                assert_ne!(mid.parity(), lo.parity());
                let expected = mid.energy_cm1() - 0.5 * (lo.energy_cm1() + hi.energy_cm1());
                assert!((i.detuning_cm1 - expected).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn pump_window_edges() {
    // 350-400 nm is 3.10-3.54 eV of pump photon energy
    let ev = |nm: f64| etpa_core::constants::PhysicalConstants::HC / (nm * 1e-9) / etpa_core::constants::EV_TO_J;
    assert!((ev(400.0) - 3.0996).abs() < 1e-3);
    assert!((ev(350.0) - 3.5424).abs() < 1e-3);
    assert!(ev(400.0) > 3.0);
}

fn fake_populations(levels: &LevelTable, scale: f64, rng: &mut ChaCha8Rng) -> PopulationResult {
    let mut all: Vec<(String, f64)> = levels.iter().map(|l| (l.id.clone(), rng.gen_range(1e-6..1.0))).collect();
    let (gid, gpop) = all.remove(0);
    PopulationResult {
        drivers: vec![DriverPopulation { id: gid, population: gpop * scale }],
        levels: all
            .into_iter()
            .map(|(id, p)| LevelPopulation { id, energy_cm1: 0.0, total: p * scale, contributions: vec![p * scale] })
            .collect(),
        clamped: vec![],
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ranking_invariant_under_population_scaling(seed in any::<u64>(), k in 1e-6f64..1e6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let levels = random_levels(&mut rng, 30, 60000.0);
        let c = SearchConstraints { require_intermediate_path: false, ..SearchConstraints::default() };
        let lines = LineTable::default();
        let mut r1 = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let mut r2 = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let p1 = fake_populations(&levels, 1.0, &mut r1);
        let p2 = fake_populations(&levels, k, &mut r2);
        let order = |p: &PopulationResult| -> Vec<(String, String)> {
            find_candidates(&levels, &lines, Some(p), &c, &ScoreWeights::default())
                .unwrap()
                .into_iter()
                .map(|c| (c.lower, c.upper))
                .collect()
        };
        prop_assert_eq!(order(&p1), order(&p2));
    }

    #[test]
    fn output_is_deterministic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let levels = random_levels(&mut rng, 25, 60000.0);
        let c = SearchConstraints { require_intermediate_path: false, ..SearchConstraints::default() };
        let a = find_candidates(&levels, &LineTable::default(), None, &c, &ScoreWeights::default()).unwrap();
        let b = find_candidates(&levels.clone(), &LineTable::default(), None, &c, &ScoreWeights::default()).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn unranked_ties_break_by_energy_then_id() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let levels = random_levels(&mut rng, 50, 60000.0);
    let c = SearchConstraints { require_intermediate_path: false, ..SearchConstraints::default() };
    let found = find_candidates(&levels, &LineTable::default(), None, &c, &ScoreWeights::default()).unwrap();
    assert!(found.len() > 1);
    for w in found.windows(2) {
        assert!(w[0].transition_energy_cm1 <= w[1].transition_energy_cm1);
    }
    assert!(found.iter().all(|c| !c.ranked && c.score == 0.0));
}
