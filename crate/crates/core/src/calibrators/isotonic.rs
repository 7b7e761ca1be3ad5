//! Isotonic regression of labels on a single score via pool-adjacent
//! violators, with linear interpolation between the fitted knots.

use super::{CalibratorModel, LabeledScoreSet};
use crate::error::{CalibError, Result};

/// Fit the nondecreasing step/interpolation model. Single-class samples are
/// fine and produce a constant model.
pub fn isotonic_fit(data: &LabeledScoreSet) -> Result<CalibratorModel> {
    let scores = data.single_column()?;
    if scores.is_empty() {
        return Err(CalibError::Fit(
            "isotonic regression needs at least one observation".to_string(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // pool exact score ties into single weighted points first
    let labels = data.labels();
    let mut knots: Vec<f64> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    for &i in &order {
        let (s, y) = (scores[i], labels[i] as f64);
        if knots.last() == Some(&s) {
            let w = weights.last_mut().unwrap();
            let v = values.last_mut().unwrap();
            *v += (y - *v) / (*w + 1.0);
            *w += 1.0;
        } else {
            knots.push(s);
            values.push(y);
            weights.push(1.0);
        }
    }
    let fitted = pava(&values, &weights);
    Ok(CalibratorModel::Isotonic { knots, values: fitted })
}

/// Weighted pool-adjacent-violators: the nondecreasing vector minimizing the
/// weighted squared distance to `values`. Adjacent blocks merge only on a
/// strict violation, so flat stretches keep their boundaries.
pub fn pava(values: &[f64], weights: &[f64]) -> Vec<f64> {
    assert_eq!(values.len(), weights.len());
    // stack of (block mean, block weight, block length)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        let mut mean = v;
        let mut weight = w;
        let mut len = 1;
        while let Some(&(pm, pw, pl)) = blocks.last() {
            if pm <= mean {
                break;
            }
            mean = (pm * pw + mean * weight) / (pw + weight);
            weight += pw;
            len += pl;
            blocks.pop();
        }
        blocks.push((mean, weight, len));
    }
    let mut out = Vec::with_capacity(values.len());
    for (mean, _, len) in blocks {
        out.extend(std::iter::repeat(mean).take(len));
    }
    out
}

/// Evaluate the fitted curve: clamp outside the knot range, interpolate
/// linearly between adjacent knots, return the exact value on a knot.
pub fn interpolate(knots: &[f64], values: &[f64], h: f64) -> f64 {
    debug_assert_eq!(knots.len(), values.len());
    debug_assert!(!knots.is_empty());
    if h <= knots[0] {
        return values[0];
    }
    let last = knots.len() - 1;
    if h >= knots[last] {
        return values[last];
    }
    // first knot strictly greater than h; hi >= 1 because h > knots[0]
    let hi = knots.partition_point(|&k| k <= h);
    let lo = hi - 1;
    if knots[lo] == h {
        return values[lo];
    }
    let t = (h - knots[lo]) / (knots[hi] - knots[lo]);
    values[lo] + t * (values[hi] - values[lo])
}
