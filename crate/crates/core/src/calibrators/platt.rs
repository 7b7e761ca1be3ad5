//! Platt scaling: a two-parameter sigmoid `p = 1 / (1 + exp(a h + b))` fitted
//! by maximum likelihood against smoothed class targets.
//!
//! The smoothed targets keep the optimum finite even on separated data, so
//! unlike the plain logistic fit no separation handling is needed.

use super::logistic::{newton_fit, NewtonOpts};
use super::{CalibratorModel, LabeledScoreSet, Matrix};
use crate::error::{CalibError, Result};

/// Smoothed regression targets for negatives and positives: with class
/// counts (n0, n1) the positives train toward (n1 + 1) / (n1 + 2) and the
/// negatives toward 1 / (n0 + 2).
pub fn platt_targets(n0: usize, n1: usize) -> (f64, f64) {
    let t_neg = 1.0 / (n0 as f64 + 2.0);
    let t_pos = (n1 as f64 + 1.0) / (n1 as f64 + 2.0);
    (t_neg, t_pos)
}

/// Fit the sigmoid on a single-score sample containing both classes.
pub fn platt_fit(data: &LabeledScoreSet) -> Result<CalibratorModel> {
    let (n0, n1) = data.class_counts();
    if n0 == 0 || n1 == 0 {
        return Err(CalibError::Fit(format!(
            "Platt scaling needs both classes, got ({n0}, {n1})"
        )));
    }
    let scores = data.single_column()?;
    let (t_neg, t_pos) = platt_targets(n0, n1);
    let targets: Vec<f64> = data
        .labels()
        .iter()
        .map(|&y| if y == 1 { t_pos } else { t_neg })
        .collect();
    let z = Matrix::from_column(scores);
    let opts = NewtonOpts {
        grad_tol: 1e-10,
        max_iter: 100,
        ridge: 0.0,
        separation_norm: None,
    };
    // The optimizer fits p = sigmoid(w h + c); the Platt convention has the
    // sign flipped, p = sigmoid(-(a h + b)).
    let fit = newton_fit(&z, &targets, &opts)?;
    Ok(CalibratorModel::Platt {
        a: -fit.weights[0],
        b: -fit.intercept,
    })
}
