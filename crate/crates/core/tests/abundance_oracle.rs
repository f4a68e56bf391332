use etpa_core::plasma::{fractional_abundance, scan_abundance, CoefficientKind, RateCoefficientTable};
use etpa_core::samples::ar_rate_table;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Null space of the full (Z+1)×(Z+1) balance generator by dense
/// Grassmann-Taksar-Heyman elimination.
///
/// `q[(i, j)]` is the rate from charge state i to j. The elimination never
/// forms the diagonal and never subtracts, so it stays componentwise
/// accurate even when the distribution spans hundreds of decades, which
/// a plain LU solve of the singular system does not.
fn null_space_oracle(s: &[f64], alpha: &[f64]) -> Vec<f64> {
    let n = s.len() + 1;
    let mut q = DMatrix::<f64>::zeros(n, n);
    for z in 0..n - 1 {
        q[(z, z + 1)] = s[z];
        q[(z + 1, z)] = alpha[z];
    }
    for k in (1..n).rev() {
        let out: f64 = (0..k).map(|j| q[(k, j)]).sum();
        for i in 0..k {
            q[(i, k)] /= out;
        }
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    q[(i, j)] += q[(i, k)] * q[(k, j)];
                }
            }
        }
    }
    let mut pi = vec![1.0; n];
    for k in 1..n {
        pi[k] = (0..k).map(|i| pi[i] * q[(i, k)]).sum();
    }
    let total: f64 = pi.iter().sum();
    pi.iter().map(|p| p / total).collect()
}

/// Plain dense LU with one balance row replaced by `Σ f = 1`; only good
/// to about cond(M)·ε, used as a coarse cross-check of the GTH oracle.
fn lu_oracle(s: &[f64], alpha: &[f64]) -> Vec<f64> {
    let n = s.len() + 1;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for z in 0..n - 1 {
        m[(z + 1, z)] += s[z];
        m[(z, z)] -= s[z];
        m[(z, z + 1)] += alpha[z];
        m[(z + 1, z + 1)] -= alpha[z];
    }
    m.row_mut(0).fill(1.0);
    let mut rhs = DVector::<f64>::zeros(n);
    rhs[0] = 1.0;
    m.lu().solve(&rhs).expect("nonsingular").iter().copied().collect()
}

fn coefficients(table: &RateCoefficientTable, te: f64) -> (Vec<f64>, Vec<f64>) {
    let z = table.max_charge();
    let s = (0..z).map(|k| table.interpolate(k, CoefficientKind::Ionization, te).unwrap()).collect();
    let a = (1..=z).map(|k| table.interpolate(k, CoefficientKind::Recombination, te).unwrap()).collect();
    (s, a)
}

/// Largest componentwise difference, absolute and relative (relative only
/// over components above `rel_floor`).
fn compare(got: &[f64], want: &[f64], rel_floor: f64) -> (f64, f64) {
    let mut abs = 0.0f64;
    let mut rel = 0.0f64;
    for (g, w) in got.iter().zip(want) {
        abs = abs.max((g - w).abs());
        if w.abs() > rel_floor {
            rel = rel.max(((g - w) / w).abs());
        }
    }
    (abs, rel)
}

#[test]
fn random_tables_match_null_space() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let z = rng.gen_range(1..=18);
        let grid = vec![1.0, 10.0, 100.0];
        let series = |rng: &mut ChaCha8Rng| -> Vec<Vec<f64>> {
            (0..z).map(|_| (0..3).map(|_| 10f64.powf(rng.gen_range(-12.0..-7.0))).collect()).collect()
        };
        let s = series(&mut rng);
        let a = series(&mut rng);
        let table = RateCoefficientTable::new("rand", grid, None, s, a).unwrap();
        let te = rng.gen_range(1.0..100.0);
        let got = fractional_abundance(&table, te).unwrap();
        assert!((got.fractions.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(got.fractions.iter().all(|f| *f >= 0.0));
        let (s, a) = coefficients(&table, te);
        let (abs, rel) = compare(&got.fractions, &null_space_oracle(&s, &a), 1e-200);
        assert!(compare(&got.fractions, &lu_oracle(&s, &a), f64::INFINITY).0 < 1e-8);
        worst = (worst.0.max(abs), worst.1.max(rel));
    }
    assert!(worst.0 <= 1e-10 && worst.1 <= 1e-10, "{worst:?}");
}

#[test]
fn sample_table_matches_null_space() {
    let table = ar_rate_table().unwrap();
    let mut worst = (0.0f64, 0.0f64);
    for te in [0.5, 1.0, 2.0, 3.0, 4.0, 10.0, 50.0, 300.0, 2000.0, 5000.0] {
        let got = fractional_abundance(&table, te).unwrap();
        let (s, a) = coefficients(&table, te);
        let (abs, rel) = compare(&got.fractions, &null_space_oracle(&s, &a), 1e-200);
        worst = (worst.0.max(abs), worst.1.max(rel));
    }
    assert!(worst.0 <= 1e-10 && worst.1 <= 1e-10, "{worst:?}");
}

#[test]
fn singly_ionized_dominates_somewhere_in_one_to_four_ev() {
    let table = ar_rate_table().unwrap();
    let te: Vec<f64> = (0..=60).map(|k| 1.0 + 3.0 * k as f64 / 60.0).collect();
    let hits: Vec<f64> = scan_abundance(&table, &te)
        .unwrap()
        .into_iter()
        .filter(|d| {
            let f1 = d.fractions[1];
            d.fractions.iter().all(|f| *f <= f1)
        })
        .map(|d| d.te_ev)
        .collect();
    assert!(!hits.is_empty());
    // cross-check one hit with the oracle
    let (s, a) = coefficients(&table, hits[0]);
    let oracle = null_space_oracle(&s, &a);
    assert!(oracle.iter().all(|f| *f <= oracle[1]));
}

#[test]
fn scan_is_continuous_under_refinement() {
    let table = ar_rate_table().unwrap();
    let coarse: Vec<f64> = (0..=30).map(|k| 1.0 + 0.1 * k as f64).collect();
    let fine: Vec<f64> = (0..=300).map(|k| 1.0 + 0.01 * k as f64).collect();
    let max_step = |te: &[f64]| {
        let d = scan_abundance(&table, te).unwrap();
        d.windows(2)
            .flat_map(|w| w[0].fractions.iter().zip(&w[1].fractions).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    };
    let (c, f) = (max_step(&coarse), max_step(&fine));
    assert!(f < c / 5.0, "coarse {c}, fine {f}");
}

#[test]
fn single_point_scan_equals_direct_solve() {
    let table = ar_rate_table().unwrap();
    let scan = scan_abundance(&table, &[2.5]).unwrap();
    assert_eq!(scan, vec![fractional_abundance(&table, 2.5).unwrap()]);
}
