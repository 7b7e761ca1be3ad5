//! Calibrator fits checked against independent references: exhaustive
//! search for the isotonic solution, a high-precision external optimizer for
//! the sigmoid fits, and finite differences for the logistic gradient.

use calibra_core::calibrators::isotonic::pava;
use calibra_core::calibrators::logistic::{logistic_gradient, logistic_objective, logreg_fit};
use calibra_core::calibrators::platt::platt_fit;
use calibra_core::calibrators::{expand_features, CalibratorModel, LabeledScoreSet, Matrix};
use calibra_core::rng::UniformStream;

fn labeled(scores: Vec<f64>, labels: Vec<u8>) -> LabeledScoreSet {
    LabeledScoreSet::new(Matrix::from_column(scores), labels).unwrap()
}

/// Weighted isotonic objective of a fitted step vector.
fn objective(values: &[f64], weights: &[f64], fitted: &[f64]) -> f64 {
    values
        .iter()
        .zip(weights)
        .zip(fitted)
        .map(|((y, w), f)| w * (y - f) * (y - f))
        .sum()
}

/// Best monotone fit by brute force: every split of the indices into
/// consecutive blocks whose weighted means come out nondecreasing is a
/// feasible level-set pattern, and the optimum is one of them.
fn exhaustive_isotonic(values: &[f64], weights: &[f64]) -> (f64, Vec<f64>) {
    let n = values.len();
    let mut best = (f64::INFINITY, Vec::new());
    for mask in 0..(1u32 << (n - 1)) {
        let mut fitted = Vec::with_capacity(n);
        let mut means = Vec::new();
        let mut start = 0;
        let mut feasible = true;
        for end in 1..=n {
            let block_ends = end == n || mask & (1 << (end - 1)) != 0;
            if !block_ends {
                continue;
            }
            let wsum: f64 = weights[start..end].iter().sum();
            let mean: f64 = values[start..end]
                .iter()
                .zip(&weights[start..end])
                .map(|(y, w)| y * w)
                .sum::<f64>()
                / wsum;
            if let Some(&prev) = means.last() {
                if mean < prev {
                    feasible = false;
                    break;
                }
            }
            means.push(mean);
            fitted.extend(std::iter::repeat(mean).take(end - start));
            start = end;
        }
        if feasible {
            let obj = objective(values, weights, &fitted);
            if obj < best.0 {
                best = (obj, fitted);
            }
        }
    }
    best
}

#[test]
fn pava_matches_exhaustive_partition_search() {
    let mut stream = UniformStream::new(2026_08_01);
    let levels = [0.0, 0.25, 0.5, 0.75, 1.0];
    for round in 0..300 {
        let n = 2 + (stream.next_open01() * 7.0) as usize; // 2..=8
        let values: Vec<f64> = (0..n)
            .map(|_| levels[(stream.next_open01() * levels.len() as f64) as usize])
            .collect();
        let weights: Vec<f64> = (0..n)
            .map(|_| [0.5, 1.0, 2.0][(stream.next_open01() * 3.0) as usize])
            .collect();
        let fitted = pava(&values, &weights);
        let (best_obj, best_fit) = exhaustive_isotonic(&values, &weights);
        let got_obj = objective(&values, &weights, &fitted);
        assert!(
            (got_obj - best_obj).abs() <= 1e-12,
            "round {round}: objective {got_obj} vs exhaustive {best_obj} \
             (values {values:?}, weights {weights:?})"
        );
        for (a, b) in fitted.iter().zip(&best_fit) {
            assert!((a - b).abs() <= 1e-9, "round {round}: fit {fitted:?} vs {best_fit:?}");
        }
    }
}

/// Reference values from solving the smoothed-target stationarity equations
/// with an independent 50-digit root finder, rounded to f64.
#[test]
fn platt_matches_an_independent_optimizer() {
    let set = labeled(
        vec![-1.7, -0.9, -0.4, 0.2, 0.6, 1.3, 2.1],
        vec![0, 0, 1, 0, 1, 1, 1],
    );
    match platt_fit(&set).unwrap() {
        CalibratorModel::Platt { a, b } => {
            assert!((a - -0.8651006226240513).abs() < 1e-8, "a = {a}");
            assert!((b - -0.1669604487042502).abs() < 1e-8, "b = {b}");
        }
        other => panic!("unexpected model {other:?}"),
    }
}

/// Same independent root-finder reference, for the penalized quadratic fit.
#[test]
fn ridged_quadratic_logistic_matches_an_independent_optimizer() {
    let set = labeled(vec![-1.2, -0.4, -0.1, 0.3, 0.8, 1.5], vec![0, 0, 1, 0, 1, 1]);
    match logreg_fit(&set, 2, 0.05).unwrap() {
        CalibratorModel::Logistic { weights, intercept, separated, .. } => {
            assert!(!separated);
            assert!((weights[0] - 2.2307616775370267).abs() < 1e-8, "w1 = {}", weights[0]);
            assert!((weights[1] - 0.2361843392529389).abs() < 1e-8, "w2 = {}", weights[1]);
            assert!((intercept - -0.39701267456132605).abs() < 1e-8, "c = {intercept}");
        }
        other => panic!("unexpected model {other:?}"),
    }
}

/// Analytic gradient against central finite differences on two-score
/// degree-two features (five weights plus intercept).
#[test]
fn two_score_gradient_matches_finite_differences() {
    let mut stream = UniformStream::new(91_217);
    let rows = 40;
    let raw: Vec<f64> = (0..rows * 2).map(|_| stream.next_open01() * 4.0 - 2.0).collect();
    let x = Matrix::from_rows(raw, 2);
    let z = expand_features(&x, 2).unwrap();
    let targets: Vec<f64> = (0..rows)
        .map(|_| if stream.next_open01() < 0.5 { 0.0 } else { 1.0 })
        .collect();
    let ridge = 0.37;
    for _ in 0..20 {
        let weights: Vec<f64> = (0..5).map(|_| stream.next_open01() * 2.0 - 1.0).collect();
        let intercept = stream.next_open01() * 2.0 - 1.0;
        let (grad_w, grad_c) = logistic_gradient(&z, &targets, &weights, intercept, ridge);
        let h = 1e-6;
        for k in 0..=5 {
            let mut wp = weights.clone();
            let mut wm = weights.clone();
            let (mut ip, mut im) = (intercept, intercept);
            let analytic = if k < 5 {
                wp[k] += h;
                wm[k] -= h;
                grad_w[k]
            } else {
                ip += h;
                im -= h;
                grad_c
            };
            let fd = (logistic_objective(&z, &targets, &wp, ip, ridge)
                - logistic_objective(&z, &targets, &wm, im, ridge))
                / (2.0 * h);
            let rel = (analytic - fd).abs() / analytic.abs().max(1.0);
            assert!(rel < 1e-6, "component {k}: analytic {analytic} vs fd {fd}");
        }
    }
}
