//! Evaluation metrics: rank-based AUC, RMSE against a reference posterior,
//! and the root Brier score against binary labels.

use crate::calibrators::{CalibratorModel, LabeledScoreSet};
use crate::dist::PosteriorOracle;
use crate::error::{CalibError, Result};
use serde::{Deserialize, Serialize};

/// Empirical AUC of `scores` against binary `labels` via the rank-sum
/// identity: tied pairs count one half, equivalent to assigning midranks and
/// averaging. Exactly equal scores are the only ties.
pub fn mann_whitney_auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(CalibError::Domain(format!(
            "scores/labels length mismatch: {} vs {}",
            scores.len(),
            labels.len()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&y| y > 1) {
        return Err(CalibError::Domain(format!("labels must be 0 or 1, got {bad}")));
    }
    if let Some(&bad) = scores.iter().find(|s| !s.is_finite()) {
        return Err(CalibError::Domain(format!("scores must be finite, got {bad}")));
    }
    let n1 = labels.iter().filter(|&&y| y == 1).count();
    let n0 = labels.len() - n1;
    if n0 == 0 || n1 == 0 {
        return Err(CalibError::Domain(format!(
            "AUC needs both classes, got ({n0}, {n1})"
        )));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // positive-class rank sum with midranks over tie groups; ranks are
    // 1-based so a group spanning sorted positions [i, j) has midrank
    // (i + 1 + j) / 2
    let mut rank_sum = 0.0f64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let midrank = (i + 1 + j) as f64 / 2.0;
        let pos_in_group = order[i..j]
            .iter()
            .filter(|&&idx| labels[idx] == 1)
            .count();
        rank_sum += midrank * pos_in_group as f64;
        i = j;
    }
    let (n0, n1) = (n0 as f64, n1 as f64);
    Ok((rank_sum - n1 * (n1 + 1.0) / 2.0) / (n0 * n1))
}

/// Root-mean-square error of predicted posteriors against reference values.
pub fn rmse_hat(predicted: &[f64], reference: &[f64]) -> Result<f64> {
    if predicted.len() != reference.len() || predicted.is_empty() {
        return Err(CalibError::Domain(format!(
            "RMSE needs matching nonempty inputs, got {} vs {}",
            predicted.len(),
            reference.len()
        )));
    }
    let sq: f64 = predicted
        .iter()
        .zip(reference)
        .map(|(p, r)| (p - r) * (p - r))
        .sum();
    Ok((sq / predicted.len() as f64).sqrt())
}

/// Root Brier score: RMSE of predicted posteriors against 0/1 labels.
pub fn rb_hat(predicted: &[f64], labels: &[u8]) -> Result<f64> {
    if predicted.len() != labels.len() || predicted.is_empty() {
        return Err(CalibError::Domain(format!(
            "root Brier score needs matching nonempty inputs, got {} vs {}",
            predicted.len(),
            labels.len()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&y| y > 1) {
        return Err(CalibError::Domain(format!("labels must be 0 or 1, got {bad}")));
    }
    let sq: f64 = predicted
        .iter()
        .zip(labels)
        .map(|(p, &y)| (p - y as f64) * (p - y as f64))
        .sum();
    Ok((sq / predicted.len() as f64).sqrt())
}

/// Per-trial metric block: RMSE against the reference posterior where one is
/// available, root Brier against labels always. `sub` is the training
/// (substitution) sample, `ind` the independent test sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialMetrics {
    pub rmse_ind: Option<f64>,
    pub rmse_sub: Option<f64>,
    pub rb_ind: f64,
    pub rb_sub: f64,
}

/// One result row of a simulation run. Metric fields are `None` when the
/// trial failed (and `failure` then records why, for logs only — the flag is
/// what persists).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub config_id: String,
    pub calibrator: String,
    pub auc_target: f64,
    pub rho: Option<f64>,
    pub n: usize,
    pub trial: usize,
    pub rmse_ind: Option<f64>,
    pub rmse_sub: Option<f64>,
    pub rb_ind: Option<f64>,
    pub rb_sub: Option<f64>,
    pub failed: bool,
    /// Diagnostic only; never persisted.
    #[serde(skip)]
    pub failure: Option<String>,
}

impl EvalRecord {
    pub fn from_metrics(m: &TrialMetrics) -> EvalRecordBuilder {
        EvalRecordBuilder {
            rmse_ind: m.rmse_ind,
            rmse_sub: m.rmse_sub,
            rb_ind: Some(m.rb_ind),
            rb_sub: Some(m.rb_sub),
            failure: None,
        }
    }

    pub fn from_failure(err: &CalibError) -> EvalRecordBuilder {
        EvalRecordBuilder {
            rmse_ind: None,
            rmse_sub: None,
            rb_ind: None,
            rb_sub: None,
            failure: Some(err.to_string()),
        }
    }
}

/// Metric payload waiting for its identification fields.
pub struct EvalRecordBuilder {
    rmse_ind: Option<f64>,
    rmse_sub: Option<f64>,
    rb_ind: Option<f64>,
    rb_sub: Option<f64>,
    failure: Option<String>,
}

impl EvalRecordBuilder {
    #[allow(clippy::too_many_arguments)]
    pub fn tag(
        self,
        config_id: &str,
        calibrator: &str,
        auc_target: f64,
        rho: Option<f64>,
        n: usize,
        trial: usize,
    ) -> EvalRecord {
        EvalRecord {
            config_id: config_id.to_string(),
            calibrator: calibrator.to_string(),
            auc_target,
            rho,
            n,
            trial,
            rmse_ind: self.rmse_ind,
            rmse_sub: self.rmse_sub,
            rb_ind: self.rb_ind,
            rb_sub: self.rb_sub,
            failed: self.failure.is_some(),
            failure: self.failure,
        }
    }
}

/// Evaluate a fitted model on its training sample (substitution) and an
/// independent sample, with RMSE columns present only when truth vectors are
/// supplied.
pub fn trial_metrics(
    model: &CalibratorModel,
    train: &LabeledScoreSet,
    test: &LabeledScoreSet,
    truth_sub: Option<&[f64]>,
    truth_ind: Option<&[f64]>,
) -> Result<TrialMetrics> {
    let p_sub = model.predict(train.matrix())?;
    let p_ind = model.predict(test.matrix())?;
    Ok(TrialMetrics {
        rmse_ind: truth_ind.map(|t| rmse_hat(&p_ind, t)).transpose()?,
        rmse_sub: truth_sub.map(|t| rmse_hat(&p_sub, t)).transpose()?,
        rb_ind: rb_hat(&p_ind, test.labels())?,
        rb_sub: rb_hat(&p_sub, train.labels())?,
    })
}

/// [`trial_metrics`] with the truth vectors computed from a posterior oracle.
pub fn evaluate_trial(
    model: &CalibratorModel,
    train: &LabeledScoreSet,
    test: &LabeledScoreSet,
    oracle: Option<&PosteriorOracle>,
) -> Result<TrialMetrics> {
    let (truth_sub, truth_ind) = match oracle {
        Some(o) => (
            Some(o.posterior_batch(train.matrix())?),
            Some(o.posterior_batch(test.matrix())?),
        ),
        None => (None, None),
    };
    trial_metrics(
        model,
        train,
        test,
        truth_sub.as_deref(),
        truth_ind.as_deref(),
    )
}
