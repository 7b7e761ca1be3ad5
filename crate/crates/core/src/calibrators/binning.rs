//! Equal-width binning calibrator: per-bin class frequencies combined with
//! the sample class prior into a posterior per bin.

use super::{CalibratorModel, LabeledScoreSet};
use crate::error::{CalibError, Result};

/// Index of the bin holding `h` for `k` equal-width bins spanning [lo, hi],
/// clamped into range so out-of-range scores land in the first or last bin.
pub fn bin_index(h: f64, lo: f64, hi: f64, k: usize) -> usize {
    let raw = ((h - lo) / (hi - lo) * k as f64).floor();
    if raw <= 0.0 {
        0
    } else if raw >= (k - 1) as f64 {
        k - 1
    } else {
        raw as usize
    }
}

/// Fit `k` equal-width bins over the observed score range. Per-bin class
/// frequencies act as density estimates and combine with the sample prior
/// into a posterior, which algebraically reduces to the positive fraction
/// within each bin; empty bins inherit the nearest fitted posterior (lower
/// bin on ties).
pub fn binning_fit(data: &LabeledScoreSet, k: usize) -> Result<CalibratorModel> {
    if k < 2 {
        return Err(CalibError::Domain(format!("need at least 2 bins, got {k}")));
    }
    let scores = data.single_column()?;
    if scores.len() < 2 {
        return Err(CalibError::Fit(format!(
            "binning needs at least 2 observations, got {}",
            scores.len()
        )));
    }
    let lo = scores.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Err(CalibError::Fit(format!(
            "degenerate score range: all {} scores equal {lo}",
            scores.len()
        )));
    }

    let labels = data.labels();
    let mut c0 = vec![0.0f64; k];
    let mut c1 = vec![0.0f64; k];
    for (&h, &y) in scores.iter().zip(labels) {
        let b = bin_index(h, lo, hi, k);
        if y == 1 {
            c1[b] += 1.0;
        } else {
            c0[b] += 1.0;
        }
    }
    let n0: f64 = c0.iter().sum();
    let n1: f64 = c1.iter().sum();
    let n = n0 + n1;
    let pi = n1 / n;

    let mut posteriors = vec![f64::NAN; k];
    for b in 0..k {
        if c0[b] + c1[b] == 0.0 {
            continue;
        }
        // per-class relative frequencies as density estimates
        let f0 = if n0 > 0.0 { c0[b] / n0 } else { 0.0 };
        let f1 = if n1 > 0.0 { c1[b] / n1 } else { 0.0 };
        posteriors[b] = pi * f1 / (pi * f1 + (1.0 - pi) * f0);
    }
    let filled: Vec<bool> = posteriors.iter().map(|p| !p.is_nan()).collect();
    for b in 0..k {
        if filled[b] {
            continue;
        }
        let mut inherited = None;
        for d in 1..k {
            if b >= d && filled[b - d] {
                inherited = Some(posteriors[b - d]);
                break;
            }
            if b + d < k && filled[b + d] {
                inherited = Some(posteriors[b + d]);
                break;
            }
        }
        // at least one bin is nonempty, so a donor always exists
        posteriors[b] = inherited.unwrap();
    }

    let mut edges: Vec<f64> = (0..=k)
        .map(|j| lo + (hi - lo) * j as f64 / k as f64)
        .collect();
    edges[0] = lo;
    edges[k] = hi;
    Ok(CalibratorModel::Binning { edges, posteriors })
}
