//! Acceptance suite: one test per criterion, each printing a pass line with
//! its elapsed time (visible under `--nocapture`). Tolerances and runtime
//! limits are pinned in the assertions.

use std::collections::BTreeMap;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use opstat_core::estimation::{
    fit_mle, moment_estimate, simulate_counts, CellCount, CountTable, FitModel, FitOptions,
};
use opstat_core::ftt::{
    canonical_states, nine_dichotomy_manual, outcome_id, predict_dichotomies, tru_sums,
    FttParams, Label,
};
use opstat_core::logic::build_logic;
use opstat_core::manual::Manual;
use opstat_core::spin::{fit_density, frame_weights, random_density, random_frame};
use opstat_core::weights::{is_superposition, WeightFunction};

fn opstat(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_opstat"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).expect("utf-8 stdout"),
    )
}

fn finish(criterion: &str, started: Instant, limit: Duration) {
    let elapsed = started.elapsed();
    assert!(
        elapsed <= limit,
        "{criterion}: took {elapsed:?}, limit {limit:?}"
    );
    println!("[acceptance] {criterion}: PASS ({elapsed:?})");
}

#[test]
fn criterion_1_canonical_table_reproduction() {
    let started = Instant::now();
    // (params, nine expected values, discrimination-major by probe).
    let cases: [(&str, [[f64; 3]; 3]); 3] = [
        (
            r#"{"iota_t":1,"sigma_t":1,"nu_r":1,"sigma_r":1}"#,
            [[1., 0., 0.], [0., 1., 0.], [0., 0., 1.]],
        ),
        (
            r#"{"iota_t":0,"sigma_t":0,"nu_r":0,"sigma_r":0}"#,
            [[0., 0., 0.], [0., 0., 0.], [1., 1., 1.]],
        ),
        (
            r#"{"iota_t":0,"sigma_t":1,"nu_r":0,"sigma_r":1}"#,
            [[1., 1., 0.], [1., 1., 0.], [0., 0., 1.]],
        ),
    ];
    for (params, expected) in cases {
        let (code, stdout) = opstat(&["ftt", "predict", "--params", params]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&stdout).unwrap();
        for (d, disc) in ["T", "R", "U"].iter().enumerate() {
            for (p, probe) in ["T", "R", "U"].iter().enumerate() {
                let got = v["predictions"][disc][probe].as_f64().unwrap();
                assert_eq!(got, expected[d][p], "{disc}|{probe} under {params}");
            }
        }
    }
    finish("criterion 1 (canonical table reproduction)", started, Duration::from_secs(1));
}

#[test]
fn criterion_2_sum_rows() {
    let started = Instant::now();
    let gist = FttParams::new(0.0, 1.0, 0.0, 1.0).unwrap();
    assert_eq!(tru_sums(&gist), [2.0, 2.0, 1.0]);

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let st = rng.random_range(0.0..=1.0);
        let sr = rng.random_range(0.0..=1.0);
        let perfect_verbatim = FttParams::new(1.0, st, 1.0, sr).unwrap();
        assert_eq!(tru_sums(&perfect_verbatim), [1.0, 1.0, 1.0]);
    }
    finish("criterion 2 (sum rows)", started, Duration::from_secs(1));
}

#[test]
fn criterion_3_interference_demonstration() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for trial in 0..100 {
        let (i, st, v, sr) = (
            rng.random_range(0.0..1.0),
            rng.random_range(0.0..1.0),
            rng.random_range(0.0..1.0),
            rng.random_range(0.0..1.0),
        );
        let params = format!(
            r#"{{"iota_t":{i},"sigma_t":{st},"nu_r":{v},"sigma_r":{sr}}}"#
        );
        let (code, stdout) = opstat(&["demo", "interference", "--params", &params]);
        let out: Value = serde_json::from_str(&stdout).unwrap();
        let excess_t = out["excess"]["T"].as_f64().unwrap();
        let excess_r = out["excess"]["R"].as_f64().unwrap();
        assert!(
            (excess_t - (1.0 - i) * st).abs() <= 1e-12,
            "trial {trial}: excess_T {excess_t} vs {}",
            (1.0 - i) * st
        );
        assert!(
            (excess_r - (1.0 - v) * sr).abs() <= 1e-12,
            "trial {trial}: excess_R {excess_r} vs {}",
            (1.0 - v) * sr
        );
        let interior = (1.0 - i) * st > 1e-9 || (1.0 - v) * sr > 1e-9;
        assert_eq!(code != 0, interior);
        if interior {
            assert_eq!(out["violation"]["kind"], "OperationSumViolation");
        }
    }
    // Excess vanishes exactly when verbatim is perfect or gist absent.
    for params in [
        r#"{"iota_t":1,"sigma_t":0.7,"nu_r":1,"sigma_r":0.4}"#,
        r#"{"iota_t":0.3,"sigma_t":0,"nu_r":0.8,"sigma_r":0}"#,
        r#"{"iota_t":1,"sigma_t":1,"nu_r":0.5,"sigma_r":0}"#,
    ] {
        let (code, stdout) = opstat(&["demo", "interference", "--params", params]);
        assert_eq!(code, 0, "must validate: {params}");
        let out: Value = serde_json::from_str(&stdout).unwrap();
        assert_eq!(out["validates"], true);
        assert_eq!(out["excess"]["T"].as_f64().unwrap(), 0.0);
        assert_eq!(out["excess"]["R"].as_f64().unwrap(), 0.0);
    }
    finish("criterion 3 (interference demonstration)", started, Duration::from_secs(5));
}

#[test]
fn criterion_4_spin_additivity_contrast() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let rho = random_density::<f64>(&mut rng);
        let frame = random_frame::<f64>(&mut rng);
        let w = frame_weights(&rho, &frame);
        let coarse = frame
            .coarsen(&frame.projections()[1], &frame.projections()[2])
            .unwrap();
        let wc = frame_weights(&rho, &coarse);
        assert!(
            (wc[1] - (w[1] + w[2])).abs() <= 1e-10,
            "merged weight differs: {} vs {}",
            wc[1],
            w[1] + w[2]
        );
        assert!(
            (wc[0] - w[0]).abs() <= 1e-12,
            "untouched weight changed: {} vs {}",
            wc[0],
            w[0]
        );
    }
    finish("criterion 4 (spin-one additivity contrast)", started, Duration::from_secs(5));
}

#[test]
fn criterion_5_density_recovery() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..50 {
        let rho = random_density::<f64>(&mut rng);
        let frames: Vec<_> = (0..6).map(|_| random_frame::<f64>(&mut rng)).collect();
        let observed: Vec<Vec<f64>> = frames.iter().map(|f| frame_weights(&rho, f)).collect();
        let fit = fit_density(&frames, &observed).unwrap();
        assert!(
            fit.residual <= 1e-10,
            "trial {trial}: residual {}",
            fit.residual
        );
        let err = fit.matrix().max_abs_diff(rho.matrix());
        assert!(err <= 1e-6, "trial {trial}: entrywise error {err}");
    }
    finish("criterion 5 (density recovery)", started, Duration::from_secs(10));
}

#[test]
fn criterion_6_logic_structure() {
    let started = Instant::now();
    let nine = build_logic(&nine_dichotomy_manual()).unwrap();
    assert_eq!(nine.len(), 20);
    assert_eq!(nine.atoms().len(), 18);
    let verdict = nine.is_orthomodular_poset();
    assert!(verdict.orthomodular, "counterexample: {:?}", verdict.counterexample);

    let single = Manual::validate(vec![vec!["T", "R", "U"]]).unwrap();
    let boolean = build_logic(&single).unwrap();
    assert_eq!(boolean.len(), 8);
    assert_eq!(boolean.atoms().len(), 3);
    assert!(boolean.is_orthomodular_poset().orthomodular);
    finish("criterion 6 (logic structure)", started, Duration::from_secs(5));
}

#[test]
fn criterion_7_estimator_round_trip() {
    let started = Instant::now();
    let options = FitOptions::<f64>::default();

    // Noiseless check: the fit agrees with the closed-form inversion.
    let truth = FttParams::new(0.37, 0.81, 0.55, 0.22).unwrap();
    let pred = predict_dichotomies(&truth, None);
    let n = 100_000_000u64;
    let mut cells = [[CellCount { yes: 0, total: n }; 3]; 3];
    for disc in Label::ALL {
        for probe in Label::ALL {
            cells[disc.index()][probe.index()] = CellCount {
                yes: (pred.p(disc, probe) * n as f64).round() as u64,
                total: n,
            };
        }
    }
    let exact = CountTable::new(cells).unwrap();
    let fit = fit_mle(&exact, FitModel::FourParam, &options).unwrap();
    let moments = moment_estimate(&exact.frequencies::<f64>().unwrap());
    for (a, b) in fit.params.as_array().iter().zip(moments.params.as_array()) {
        assert!((a - b).abs() <= 1e-6, "noiseless: {a} vs {b}");
    }

    // Statistical round-trip at n = 100000 per cell over 50 fixed seeds.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut errors = Vec::with_capacity(200);
    for seed in 0..50u64 {
        let truth = FttParams::new(
            rng.random_range(0.1..=0.9),
            rng.random_range(0.1..=0.9),
            rng.random_range(0.1..=0.9),
            rng.random_range(0.1..=0.9),
        )
        .unwrap();
        let counts = simulate_counts(&truth, None, 100_000, 1_000 + seed).unwrap();
        let fit = fit_mle(&counts, FitModel::FourParam, &options).unwrap();
        assert!(fit.converged);
        for (a, b) in fit.params.as_array().iter().zip(truth.as_array()) {
            errors.push((a - b).abs());
        }
    }
    errors.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = 0.5 * (errors[99] + errors[100]);
    let max = *errors.last().unwrap();
    assert!(median <= 0.005, "median error {median}");
    assert!(max <= 0.02, "max error {max}");
    finish("criterion 7 (estimator round-trip)", started, Duration::from_secs(60));
}

#[test]
fn criterion_8_superposition_check() {
    let started = Instant::now();
    let states = canonical_states::<f64>();
    assert!(is_superposition(
        &states.omega_p,
        &[states.omega_0.clone(), states.omega_g.clone()]
    )
    .unwrap());

    let manual = Arc::new(nine_dichotomy_manual());
    let mut values: BTreeMap<_, _> = states.omega_0.values().clone();
    values.insert(outcome_id(Label::T, Label::T, false), 1.0);
    values.insert(outcome_id(Label::T, Label::T, true), 0.0);
    let point = WeightFunction::validate(manual, values).unwrap();
    assert!(!is_superposition(&point, std::slice::from_ref(&states.omega_0)).unwrap());
    finish("criterion 8 (superposition check)", started, Duration::from_secs(1));
}
