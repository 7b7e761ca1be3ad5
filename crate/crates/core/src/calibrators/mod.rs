//! Calibrator fitting and prediction.
//!
//! Every calibrator maps one or two classifier scores to an estimate of the
//! class-1 posterior probability. Fitting consumes a [`LabeledScoreSet`];
//! the fitted [`CalibratorModel`] is an immutable value that can be applied
//! to arbitrary score matrices of the same dimensionality.

pub mod binning;
pub mod isotonic;
pub mod logistic;
pub mod platt;

pub use binning::binning_fit;
pub use isotonic::isotonic_fit;
pub use logistic::logreg_fit;
pub use platt::platt_fit;

use crate::error::{CalibError, Result};
use crate::num::sigmoid;
use serde::{Deserialize, Serialize};

/// Dense row-major score matrix: n observations by d score columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    data: Vec<f64>,
    cols: usize,
}

impl Matrix {
    /// Build from row-major data. `data.len()` must be a multiple of `cols`.
    pub fn from_rows(data: Vec<f64>, cols: usize) -> Matrix {
        assert!(cols >= 1, "matrix needs at least one column");
        assert!(
            data.len() % cols == 0,
            "row-major data length {} is not a multiple of {} columns",
            data.len(),
            cols
        );
        Matrix { data, cols }
    }

    pub fn from_column(col: Vec<f64>) -> Matrix {
        Matrix::from_rows(col, 1)
    }

    pub fn rows(&self) -> usize {
        self.data.len() / self.cols
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        assert!(j < self.cols, "column {j} out of range");
        self.data.iter().skip(j).step_by(self.cols).copied().collect()
    }
}

/// Observations with binary labels: the training (or evaluation) material
/// for every calibrator.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledScoreSet {
    matrix: Matrix,
    labels: Vec<u8>,
}

impl LabeledScoreSet {
    pub fn new(matrix: Matrix, labels: Vec<u8>) -> Result<LabeledScoreSet> {
        if labels.len() != matrix.rows() {
            return Err(CalibError::Domain(format!(
                "{} labels for {} score rows",
                labels.len(),
                matrix.rows()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&y| y > 1) {
            return Err(CalibError::Domain(format!(
                "labels must be 0 or 1, got {bad}"
            )));
        }
        if matrix.data().iter().any(|v| !v.is_finite()) {
            return Err(CalibError::Domain(
                "scores must all be finite".to_string(),
            ));
        }
        Ok(LabeledScoreSet { matrix, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of score columns.
    pub fn dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let n1 = self.labels.iter().filter(|&&y| y == 1).count();
        (self.labels.len() - n1, n1)
    }

    /// Column j split into (class-0 values, class-1 values).
    pub fn split_by_class(&self, j: usize) -> (Vec<f64>, Vec<f64>) {
        let mut s0 = Vec::new();
        let mut s1 = Vec::new();
        for (i, &y) in self.labels.iter().enumerate() {
            let v = self.matrix.row(i)[j];
            if y == 0 {
                s0.push(v);
            } else {
                s1.push(v);
            }
        }
        (s0, s1)
    }

    /// The single score column of a one-dimensional set.
    pub fn single_column(&self) -> Result<Vec<f64>> {
        if self.dim() != 1 {
            return Err(CalibError::Domain(format!(
                "expected a single score column, set has {}",
                self.dim()
            )));
        }
        Ok(self.matrix.data().to_vec())
    }

    /// Restrict a multi-score set to one of its columns.
    pub fn select_column(&self, j: usize) -> Result<LabeledScoreSet> {
        if j >= self.dim() {
            return Err(CalibError::Domain(format!(
                "column {} out of range for {} score columns",
                j,
                self.dim()
            )));
        }
        LabeledScoreSet::new(Matrix::from_column(self.matrix.column(j)), self.labels.clone())
    }
}

/// Polynomial feature expansion of a score matrix.
///
/// Degree 1 is the identity. Degree 2 appends the squares (and, for two
/// scores, the cross term): d=1 -> (h, h^2); d=2 -> (h1, h2, h1^2, h2^2,
/// h1*h2). Column order is fixed.
pub fn expand_features(x: &Matrix, degree: u8) -> Result<Matrix> {
    let d = x.cols();
    if d > 2 {
        return Err(CalibError::Domain(format!(
            "feature expansion supports 1 or 2 scores, got {d}"
        )));
    }
    match degree {
        1 => Ok(x.clone()),
        2 => {
            let n = x.rows();
            let p = if d == 1 { 2 } else { 5 };
            let mut out = Vec::with_capacity(n * p);
            for i in 0..n {
                let r = x.row(i);
                if d == 1 {
                    out.extend_from_slice(&[r[0], r[0] * r[0]]);
                } else {
                    out.extend_from_slice(&[
                        r[0],
                        r[1],
                        r[0] * r[0],
                        r[1] * r[1],
                        r[0] * r[1],
                    ]);
                }
            }
            Ok(Matrix::from_rows(out, p))
        }
        other => Err(CalibError::Domain(format!(
            "unsupported expansion degree {other} (expected 1 or 2)"
        ))),
    }
}

/// Number of expanded columns for a given input dimension and degree.
pub fn expanded_width(input_dim: usize, degree: u8) -> Result<usize> {
    match (degree, input_dim) {
        (1, 1) | (1, 2) => Ok(input_dim),
        (2, 1) => Ok(2),
        (2, 2) => Ok(5),
        _ => Err(CalibError::Domain(format!(
            "unsupported expansion: degree {degree}, {input_dim} scores"
        ))),
    }
}

/// A fitted calibrator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum CalibratorModel {
    /// p(h) = 1 / (1 + exp(a*h + b)); a is negative when higher scores
    /// mean class 1.
    Platt { a: f64, b: f64 },
    /// p(z) = sigmoid(weights . expand(z) + intercept). `separated` marks a
    /// fit stopped by complete-separation detection.
    Logistic {
        weights: Vec<f64>,
        intercept: f64,
        degree: u8,
        ridge: f64,
        input_dim: usize,
        separated: bool,
    },
    /// Step/interpolated monotone fit: `values[i]` at score `knots[i]`.
    Isotonic { knots: Vec<f64>, values: Vec<f64> },
    /// Equal-width histogram estimate: k = posteriors.len() bins over
    /// [edges[0], edges[k]].
    Binning { edges: Vec<f64>, posteriors: Vec<f64> },
}

impl CalibratorModel {
    pub fn method_name(&self) -> &'static str {
        match self {
            CalibratorModel::Platt { .. } => "platt",
            CalibratorModel::Logistic { .. } => "logistic",
            CalibratorModel::Isotonic { .. } => "isotonic",
            CalibratorModel::Binning { .. } => "binning",
        }
    }

    /// Score columns the model expects at prediction time.
    pub fn input_dim(&self) -> usize {
        match self {
            CalibratorModel::Logistic { input_dim, .. } => *input_dim,
            _ => 1,
        }
    }

    /// Posterior estimates for every row of a score matrix.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.cols() != self.input_dim() {
            return Err(CalibError::Domain(format!(
                "model expects {} score column(s), input has {}",
                self.input_dim(),
                x.cols()
            )));
        }
        if x.data().iter().any(|v| !v.is_finite()) {
            return Err(CalibError::Domain(
                "prediction input must be finite".to_string(),
            ));
        }
        match self {
            CalibratorModel::Platt { a, b } => Ok(x
                .data()
                .iter()
                .map(|&h| sigmoid(-(a * h + b)))
                .collect()),
            CalibratorModel::Logistic {
                weights,
                intercept,
                degree,
                input_dim,
                ..
            } => {
                if weights.len() != expanded_width(*input_dim, *degree)? {
                    return Err(CalibError::Domain(format!(
                        "logistic model has {} weights but expansion produces {}",
                        weights.len(),
                        expanded_width(*input_dim, *degree)?
                    )));
                }
                let z = expand_features(x, *degree)?;
                Ok((0..z.rows())
                    .map(|i| {
                        let m: f64 = z
                            .row(i)
                            .iter()
                            .zip(weights)
                            .map(|(zi, wi)| zi * wi)
                            .sum::<f64>()
                            + intercept;
                        sigmoid(m)
                    })
                    .collect())
            }
            CalibratorModel::Isotonic { knots, values } => {
                Ok(x.data().iter().map(|&h| isotonic::interpolate(knots, values, h)).collect())
            }
            CalibratorModel::Binning { edges, posteriors } => {
                let k = posteriors.len();
                let (lo, hi) = (edges[0], edges[k]);
                Ok(x.data()
                    .iter()
                    .map(|&h| posteriors[binning::bin_index(h, lo, hi, k)])
                    .collect())
            }
        }
    }
}

/// How to fit one calibrator; the engine's per-calibrator descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitMethod {
    Platt,
    Logistic { degree: u8, ridge: f64 },
    Isotonic,
    Binning { bins: usize },
}

pub fn fit(method: FitMethod, data: &LabeledScoreSet) -> Result<CalibratorModel> {
    match method {
        FitMethod::Platt => platt_fit(data),
        FitMethod::Logistic { degree, ridge } => logreg_fit(data, degree, ridge),
        FitMethod::Isotonic => isotonic_fit(data),
        FitMethod::Binning { bins } => binning_fit(data, bins),
    }
}

/// Combine K posterior estimates for the same observation, weighting each
/// source by its accuracy: sum_k p_k * A_k / sum_k A_k.
pub fn accuracy_weighted_mixture(posteriors: &[f64], accuracies: &[f64]) -> Result<f64> {
    if posteriors.is_empty() {
        return Err(CalibError::Domain(
            "mixture needs at least one posterior".to_string(),
        ));
    }
    if posteriors.len() != accuracies.len() {
        return Err(CalibError::Domain(format!(
            "{} posteriors but {} accuracies",
            posteriors.len(),
            accuracies.len()
        )));
    }
    if let Some(bad) = accuracies.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
        return Err(CalibError::Domain(format!(
            "accuracies must be positive, got {bad}"
        )));
    }
    if let Some(bad) = posteriors.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(CalibError::Domain(format!(
            "posteriors must lie in [0, 1], got {bad}"
        )));
    }
    let total: f64 = accuracies.iter().sum();
    Ok(posteriors
        .iter()
        .zip(accuracies)
        .map(|(p, a)| p * a / total)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::UniformStream;

    #[test]
    fn labeled_set_validates_input() {
        let m = Matrix::from_rows(vec![1.0, 2.0, 3.0], 1);
        assert!(LabeledScoreSet::new(m.clone(), vec![0, 1]).is_err());
        assert!(LabeledScoreSet::new(m.clone(), vec![0, 1, 2]).is_err());
        assert!(LabeledScoreSet::new(m, vec![0, 1, 1]).is_ok());
        let bad = Matrix::from_rows(vec![1.0, f64::NAN], 1);
        assert!(LabeledScoreSet::new(bad, vec![0, 1]).is_err());
    }

    #[test]
    fn split_and_counts() {
        let m = Matrix::from_rows(vec![1.0, 10.0, 2.0, 20.0, 3.0, 30.0], 2);
        let set = LabeledScoreSet::new(m, vec![0, 1, 0]).unwrap();
        assert_eq!(set.class_counts(), (2, 1));
        let (s0, s1) = set.split_by_class(1);
        assert_eq!(s0, vec![10.0, 30.0]);
        assert_eq!(s1, vec![20.0]);
        let col = set.select_column(0).unwrap();
        assert_eq!(col.matrix().data(), &[1.0, 2.0, 3.0]);
        assert_eq!(col.labels(), set.labels());
        assert!(set.select_column(2).is_err());
        assert!(set.single_column().is_err());
    }

    #[test]
    fn expansion_matches_hand_arithmetic() {
        let x = Matrix::from_rows(vec![2.0, 3.0], 2);
        let z = expand_features(&x, 2).unwrap();
        assert_eq!(z.row(0), &[2.0, 3.0, 4.0, 9.0, 6.0]);

        let x1 = Matrix::from_column(vec![-1.5]);
        let z1 = expand_features(&x1, 2).unwrap();
        assert_eq!(z1.row(0), &[-1.5, 2.25]);

        let same = expand_features(&x, 1).unwrap();
        assert_eq!(same, x);

        assert!(expand_features(&x, 3).is_err());
        let wide = Matrix::from_rows(vec![1.0, 2.0, 3.0], 3);
        assert!(expand_features(&wide, 1).is_err());
    }

    #[test]
    fn platt_predict_is_sigmoid_shaped() {
        let m = CalibratorModel::Platt { a: -1.0, b: 0.0 };
        let p = m.predict(&Matrix::from_column(vec![0.0])).unwrap();
        assert_eq!(p[0], 0.5);
        // a < 0 makes the fitted curve strictly increasing in the score.
        let p = m
            .predict(&Matrix::from_column(vec![-3.0, -1.0, 0.5, 2.0, 8.0]))
            .unwrap();
        for w in p.windows(2) {
            assert!(w[0] < w[1]);
        }
        assert!(p.iter().all(|v| *v > 0.0 && *v < 1.0));
    }

    #[test]
    fn isotonic_predict_interpolates_and_clamps() {
        let m = CalibratorModel::Isotonic {
            knots: vec![0.0, 1.0],
            values: vec![0.2, 0.8],
        };
        let p = m
            .predict(&Matrix::from_column(vec![0.5, -7.0, 9.0, 1.0, 0.25]))
            .unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15);
        assert_eq!(p[1], 0.2);
        assert_eq!(p[2], 0.8);
        assert_eq!(p[3], 0.8);
        assert!((p[4] - 0.35).abs() < 1e-15);
    }

    #[test]
    fn binning_predict_clamps_into_end_bins() {
        let m = CalibratorModel::Binning {
            edges: vec![0.0, 1.0, 2.0],
            posteriors: vec![0.1, 0.9],
        };
        let p = m
            .predict(&Matrix::from_column(vec![2.5, -1.0, 0.5, 1.5, 1.0]))
            .unwrap();
        assert_eq!(p, vec![0.9, 0.1, 0.1, 0.9, 0.9]);
    }

    #[test]
    fn predict_rejects_bad_input() {
        let m = CalibratorModel::Platt { a: -1.0, b: 0.0 };
        assert!(m.predict(&Matrix::from_rows(vec![0.0, 1.0], 2)).is_err());
        assert!(m
            .predict(&Matrix::from_column(vec![f64::INFINITY]))
            .is_err());
        let lg = CalibratorModel::Logistic {
            weights: vec![1.0],
            intercept: 0.0,
            degree: 2,
            ridge: 0.0,
            input_dim: 1,
            separated: false,
        };
        // one weight but degree-2 expansion of one score needs two
        assert!(lg.predict(&Matrix::from_column(vec![0.3])).is_err());
    }

    #[test]
    fn logistic_predict_applies_expansion() {
        let m = CalibratorModel::Logistic {
            weights: vec![0.0, 1.0],
            intercept: -4.0,
            degree: 2,
            ridge: 0.0,
            input_dim: 1,
            separated: false,
        };
        // sigmoid(h^2 - 4) at h = 2 sits exactly at 1/2
        let p = m.predict(&Matrix::from_column(vec![2.0])).unwrap();
        assert_eq!(p[0], 0.5);
    }

    #[test]
    fn mixture_matches_hand_arithmetic() {
        assert_eq!(accuracy_weighted_mixture(&[0.7], &[0.3]).unwrap(), 0.7);
        assert!(
            (accuracy_weighted_mixture(&[0.2, 0.8], &[2.0, 2.0]).unwrap() - 0.5).abs() < 1e-15
        );
        let p = accuracy_weighted_mixture(&[1.0, 0.0], &[0.9, 0.6]).unwrap();
        assert!((p - 0.6).abs() < 1e-15);
    }

    #[test]
    fn mixture_rejects_bad_input() {
        assert!(accuracy_weighted_mixture(&[], &[]).is_err());
        assert!(accuracy_weighted_mixture(&[0.5], &[1.0, 1.0]).is_err());
        assert!(accuracy_weighted_mixture(&[0.5], &[0.0]).is_err());
        assert!(accuracy_weighted_mixture(&[0.5], &[-1.0]).is_err());
        assert!(accuracy_weighted_mixture(&[1.5], &[1.0]).is_err());
    }

    #[test]
    fn mixture_stays_in_the_convex_hull() {
        let mut stream = UniformStream::new(41);
        for _ in 0..500 {
            let k = 1 + (stream.next_open01() * 5.0) as usize;
            let ps: Vec<f64> = (0..k).map(|_| stream.next_open01()).collect();
            let accs: Vec<f64> = (0..k).map(|_| stream.next_open01() + 1e-3).collect();
            let mix = accuracy_weighted_mixture(&ps, &accs).unwrap();
            let lo = ps.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = ps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(mix >= lo - 1e-12 && mix <= hi + 1e-12);
        }
    }
}
