//! Statistical behavior of the estimator: agreement with the closed-form
//! moment inversion on exact data, and consistency as the per-cell sample
//! size grows. Seeds are fixed throughout, so every run sees the same data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use opstat_core::estimation::{
    fit_mle, moment_estimate, simulate_counts, CellCount, CountTable, FitModel, FitOptions,
};
use opstat_core::ftt::{predict_dichotomies, FttParams, Label};

fn exact_counts(params: &FttParams<f64>, n: u64) -> CountTable {
    let pred = predict_dichotomies(params, None);
    let mut cells = [[CellCount { yes: 0, total: n }; 3]; 3];
    for disc in Label::ALL {
        for probe in Label::ALL {
            cells[disc.index()][probe.index()] = CellCount {
                yes: (pred.p(disc, probe) * n as f64).round() as u64,
                total: n,
            };
        }
    }
    CountTable::new(cells).unwrap()
}

#[test]
fn mle_matches_moment_inversion_on_exact_frequencies() {
    let mut rng = ChaCha8Rng::seed_from_u64(60_601);
    let options = FitOptions::<f64>::default();
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let truth = FttParams::new(
            rng.random_range(0.05..=0.95),
            rng.random_range(0.05..=0.95),
            rng.random_range(0.05..=0.95),
            rng.random_range(0.05..=0.95),
        )
        .unwrap();
        // Large enough that count rounding is far below the comparison
        // tolerance.
        let counts = exact_counts(&truth, 100_000_000);
        let fit = fit_mle(&counts, FitModel::FourParam, &options).unwrap();
        assert!(fit.converged);
        let moments = moment_estimate(&counts.frequencies::<f64>().unwrap());
        for (a, b) in fit.params.as_array().iter().zip(moments.params.as_array()) {
            worst = worst.max((a - b).abs());
            assert!(
                (a - b).abs() <= 1e-6,
                "fit {a} vs moments {b} for truth {truth:?}"
            );
        }
    }
    eprintln!("max |fit - moments| over 500 draws: {worst:.3e}");
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn replication_errors(n_per_cell: u64, replications: u64) -> Vec<f64> {
    let mut errors = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7_117);
    let options = FitOptions::<f64>::default();
    for rep in 0..replications {
        let truth = FttParams::new(
            rng.random_range(0.1..=0.9),
            rng.random_range(0.1..=0.9),
            rng.random_range(0.1..=0.9),
            rng.random_range(0.1..=0.9),
        )
        .unwrap();
        let counts = simulate_counts(&truth, None, n_per_cell, 900_000 + rep).unwrap();
        let fit = fit_mle(&counts, FitModel::FourParam, &options).unwrap();
        for (a, b) in fit.params.as_array().iter().zip(truth.as_array()) {
            errors.push((a - b).abs());
        }
    }
    errors
}

#[test]
fn estimation_error_is_small_at_large_n_and_shrinks_with_n() {
    let coarse = replication_errors(1_000, 200);
    let fine = replication_errors(100_000, 200);
    let coarse_median = median(coarse);
    let fine_median = median(fine);
    eprintln!("median abs error: n=1e3 {coarse_median:.5}, n=1e5 {fine_median:.5}");
    assert!(
        fine_median < 0.005,
        "median error at n=100000 is {fine_median}"
    );
    assert!(
        fine_median < coarse_median,
        "error must shrink: {fine_median} !< {coarse_median}"
    );
}
