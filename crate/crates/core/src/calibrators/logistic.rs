//! Logistic-regression calibrator and the Newton optimizer shared with the
//! Platt fit.
//!
//! The optimizer minimizes the (optionally ridge-penalized) binomial
//! cross-entropy with fractional targets, full Newton steps, and a
//! backtracking line search. The penalty applies to the weights only, never
//! the intercept.

use super::{expand_features, CalibratorModel, LabeledScoreSet, Matrix};
use crate::error::{CalibError, Result};
use crate::num::{sigmoid, softplus, KahanSum};

/// Fit a logistic calibrator on the (degree-1 or degree-2 expanded) score
/// matrix. `ridge = 0` means pure maximum likelihood with complete-separation
/// detection; a separated fit is returned with its flag set rather than
/// rejected.
pub fn logreg_fit(data: &LabeledScoreSet, degree: u8, ridge: f64) -> Result<CalibratorModel> {
    if !ridge.is_finite() || ridge < 0.0 {
        return Err(CalibError::Domain(format!(
            "ridge penalty must be finite and nonnegative, got {ridge}"
        )));
    }
    let (n0, n1) = data.class_counts();
    if n0 == 0 || n1 == 0 {
        return Err(CalibError::Fit(format!(
            "logistic regression needs both classes, got ({n0}, {n1})"
        )));
    }
    let z = expand_features(data.matrix(), degree)?;
    let targets: Vec<f64> = data.labels().iter().map(|&y| y as f64).collect();
    let opts = NewtonOpts {
        grad_tol: 1e-8,
        max_iter: 200,
        ridge,
        separation_norm: Some(30.0),
    };
    let fit = newton_fit(&z, &targets, &opts)?;
    Ok(CalibratorModel::Logistic {
        weights: fit.weights,
        intercept: fit.intercept,
        degree,
        ridge,
        input_dim: data.dim(),
        separated: fit.separated,
    })
}

/// Penalized cross-entropy objective, exposed so tests can verify the
/// analytic gradient against finite differences. Targets may be fractional.
pub fn logistic_objective(
    z: &Matrix,
    targets: &[f64],
    weights: &[f64],
    intercept: f64,
    ridge: f64,
) -> f64 {
    let mut acc = KahanSum::new();
    for (i, &t) in targets.iter().enumerate() {
        let m = margin(z.row(i), weights, intercept);
        acc.add(softplus(m) - t * m);
    }
    let penalty: f64 = 0.5 * ridge * weights.iter().map(|w| w * w).sum::<f64>();
    acc.value() + penalty
}

/// Gradient of [`logistic_objective`] with respect to (weights, intercept).
pub fn logistic_gradient(
    z: &Matrix,
    targets: &[f64],
    weights: &[f64],
    intercept: f64,
    ridge: f64,
) -> (Vec<f64>, f64) {
    let p = weights.len();
    let mut gw = vec![KahanSum::new(); p];
    let mut gb = KahanSum::new();
    for (i, &t) in targets.iter().enumerate() {
        let row = z.row(i);
        let r = sigmoid(margin(row, weights, intercept)) - t;
        for (acc, zi) in gw.iter_mut().zip(row) {
            acc.add(r * zi);
        }
        gb.add(r);
    }
    let gw: Vec<f64> = gw
        .iter()
        .zip(weights)
        .map(|(acc, w)| acc.value() + ridge * w)
        .collect();
    (gw, gb.value())
}

fn margin(row: &[f64], weights: &[f64], intercept: f64) -> f64 {
    row.iter().zip(weights).map(|(zi, wi)| zi * wi).sum::<f64>() + intercept
}

pub(crate) struct NewtonOpts {
    pub grad_tol: f64,
    pub max_iter: usize,
    pub ridge: f64,
    /// Parameter-norm threshold for complete-separation detection; `None`
    /// disables the check (the Platt targets keep its optimum finite).
    pub separation_norm: Option<f64>,
}

pub(crate) struct NewtonFit {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub separated: bool,
}

/// Newton minimization of the penalized cross-entropy from the origin.
pub(crate) fn newton_fit(z: &Matrix, targets: &[f64], opts: &NewtonOpts) -> Result<NewtonFit> {
    let p = z.cols();
    let mut w = vec![0.0; p];
    let mut b = 0.0;
    let mut f = logistic_objective(z, targets, &w, b, opts.ridge);
    let mut flat_steps = 0usize;
    for iter in 0..opts.max_iter {
        let (gw, gb) = logistic_gradient(z, targets, &w, b, opts.ridge);
        let gnorm = (gw.iter().map(|g| g * g).sum::<f64>() + gb * gb).sqrt();
        if gnorm <= opts.grad_tol {
            return finished(z, targets, w, b, opts);
        }

        let mut g = gw;
        g.push(gb);
        let h = hessian(z, &w, b, opts.ridge);
        let dir = match solve_linear(h.clone(), g.clone()) {
            Ok(d) => d,
            Err(_) => {
                // one diagonal safeguard, then give up
                let mut hs = h;
                for j in 0..=p {
                    hs[j * (p + 1) + j] += 1e-8;
                }
                solve_linear(hs, g.clone()).map_err(|_| {
                    CalibError::Numeric(format!(
                        "logistic Hessian singular at iteration {iter} (grad norm {gnorm:.3e})"
                    ))
                })?
            }
        };
        // directional derivative along the step -dir
        let gd: f64 = -g.iter().zip(&dir).map(|(gi, di)| gi * di).sum::<f64>();
        if !gd.is_finite() || gd >= 0.0 {
            return Err(CalibError::Numeric(format!(
                "logistic Newton direction is not a descent direction at iteration {iter}"
            )));
        }

        let f_before = f;
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let wt: Vec<f64> = w
                .iter()
                .zip(&dir)
                .map(|(wi, di)| wi - step * di)
                .collect();
            let bt = b - step * dir[p];
            let ft = logistic_objective(z, targets, &wt, bt, opts.ridge);
            if ft.is_finite() && ft <= f + 1e-4 * step * gd {
                w = wt;
                b = bt;
                f = ft;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // The objective is flat at floating-point resolution. Near the
            // optimum that is convergence; anywhere else it is a failure.
            if gnorm <= 1e-5 {
                return finished(z, targets, w, b, opts);
            }
            return Err(CalibError::Numeric(format!(
                "logistic line search stalled at iteration {iter} with grad norm {gnorm:.3e}"
            )));
        }
        // Armijo can also keep nominally accepting steps whose decrease
        // rounds to zero, leaving the iterate cycling in place; two such
        // steps in a row are the same flatness as a failed line search.
        if f_before - f < f64::EPSILON * f.abs() {
            flat_steps += 1;
            if flat_steps >= 2 {
                if gnorm <= 1e-5 {
                    return finished(z, targets, w, b, opts);
                }
                return Err(CalibError::Numeric(format!(
                    "logistic iterate stopped moving at iteration {iter} with grad norm {gnorm:.3e}"
                )));
            }
        } else {
            flat_steps = 0;
        }

        if let Some(limit) = opts.separation_norm {
            let norm = (w.iter().map(|v| v * v).sum::<f64>() + b * b).sqrt();
            if norm > limit {
                // Norm escaping while the likelihood still improves: the
                // maximizer sits at infinity.
                return Ok(NewtonFit {
                    weights: w,
                    intercept: b,
                    separated: true,
                });
            }
        }
    }
    let (gw, gb) = logistic_gradient(z, targets, &w, b, opts.ridge);
    let gnorm = (gw.iter().map(|g| g * g).sum::<f64>() + gb * gb).sqrt();
    Err(CalibError::Numeric(format!(
        "logistic Newton did not converge in {} iterations (grad norm {gnorm:.3e})",
        opts.max_iter
    )))
}

fn finished(
    z: &Matrix,
    targets: &[f64],
    w: Vec<f64>,
    b: f64,
    opts: &NewtonOpts,
) -> Result<NewtonFit> {
    // A converged unpenalized fit that reproduces every 0/1 label to within
    // 1e-6 can only happen on completely separated data; the parameters are
    // then an artifact of where the iteration stopped, not a maximizer.
    let separated = opts.separation_norm.is_some()
        && opts.ridge == 0.0
        && targets.iter().enumerate().all(|(i, &t)| {
            (sigmoid(margin(z.row(i), &w, b)) - t).abs() < 1e-6
        });
    Ok(NewtonFit {
        weights: w,
        intercept: b,
        separated,
    })
}

fn hessian(z: &Matrix, weights: &[f64], intercept: f64, ridge: f64) -> Vec<f64> {
    let p = weights.len();
    let d = p + 1; // intercept last
    let mut h = vec![0.0; d * d];
    for i in 0..z.rows() {
        let row = z.row(i);
        let s = sigmoid(margin(row, weights, intercept));
        let q = s * (1.0 - s);
        for a in 0..d {
            let za = if a < p { row[a] } else { 1.0 };
            for c in a..d {
                let zc = if c < p { row[c] } else { 1.0 };
                h[a * d + c] += q * za * zc;
            }
        }
    }
    for a in 0..d {
        for c in 0..a {
            h[a * d + c] = h[c * d + a];
        }
    }
    for j in 0..p {
        h[j * d + j] += ridge;
    }
    h
}

/// Gaussian elimination with partial pivoting; `a` is row-major n x n.
pub(crate) fn solve_linear(mut a: Vec<f64>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    let amax = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if amax == 0.0 {
        return Err(CalibError::Numeric("zero matrix in linear solve".to_string()));
    }
    let tol = amax * 1e-14;
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r * n + col].abs() > a[piv * n + col].abs() {
                piv = r;
            }
        }
        if a[piv * n + col].abs() <= tol {
            return Err(CalibError::Numeric(format!(
                "linear solve pivot {:.3e} below tolerance",
                a[piv * n + col].abs()
            )));
        }
        if piv != col {
            for c in 0..n {
                a.swap(piv * n + c, col * n + c);
            }
            b.swap(piv, col);
        }
        for r in col + 1..n {
            let f = a[r * n + col] / a[col * n + col];
            if f != 0.0 {
                for c in col..n {
                    a[r * n + c] -= f * a[col * n + c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut v = b[col];
        for c in col + 1..n {
            v -= a[col * n + c] * x[c];
        }
        x[col] = v / a[col * n + col];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibrators::Matrix;
    use crate::rng::UniformStream;

    fn set(scores: Vec<f64>, labels: Vec<u8>) -> LabeledScoreSet {
        LabeledScoreSet::new(Matrix::from_column(scores), labels).unwrap()
    }

    #[test]
    fn rejects_bad_input() {
        let d = set(vec![0.0, 1.0], vec![1, 1]);
        assert!(logreg_fit(&d, 1, 0.0).is_err()); // one class
        let d = set(vec![0.0, 1.0], vec![0, 1]);
        assert!(logreg_fit(&d, 1, -0.1).is_err());
        assert!(logreg_fit(&d, 3, 0.0).is_err());
    }

    #[test]
    fn separable_data_is_flagged() {
        let d = set(vec![-2.0, -1.0, 1.0, 2.0], vec![0, 0, 1, 1]);
        let m = logreg_fit(&d, 1, 0.0).unwrap();
        match &m {
            CalibratorModel::Logistic { separated, weights, .. } => {
                assert!(separated, "weights {weights:?}");
                assert!(weights[0] > 0.0);
            }
            _ => unreachable!(),
        }
        // flagged or not, the model still predicts sensibly
        let p = m.predict(&Matrix::from_column(vec![-5.0, 5.0])).unwrap();
        assert!((0.0..0.5).contains(&p[0]) && (0.5..=1.0).contains(&p[1]));
        // a ridge penalty restores a proper finite optimum
        let m = logreg_fit(&d, 1, 0.1).unwrap();
        match m {
            CalibratorModel::Logistic { separated, .. } => assert!(!separated),
            _ => unreachable!(),
        }
    }

    #[test]
    fn symmetric_data_gives_zero_intercept() {
        // invariant under (h, y) -> (-h, 1 - y), so the optimum has b = 0
        let d = set(vec![-1.5, -0.5, 0.5, 1.5], vec![0, 1, 0, 1]);
        let m = logreg_fit(&d, 1, 0.0).unwrap();
        match m {
            CalibratorModel::Logistic { intercept, separated, .. } => {
                assert!(!separated);
                assert!(intercept.abs() < 1e-6, "intercept {intercept}");
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let z = expand_features(
            &Matrix::from_rows(vec![0.3, -1.2, 1.7, 0.4, -0.6, 2.2, 0.9, -2.0], 2),
            2,
        )
        .unwrap();
        let targets = [0.0, 1.0, 0.3, 0.9];
        let mut stream = UniformStream::new(11);
        for _ in 0..20 {
            let w: Vec<f64> = (0..5).map(|_| stream.next_open01() * 2.0 - 1.0).collect();
            let b = stream.next_open01() * 2.0 - 1.0;
            let ridge = stream.next_open01() * 0.5;
            let (gw, gb) = logistic_gradient(&z, &targets, &w, b, ridge);
            let eps = 1e-6;
            for j in 0..=5 {
                let mut lo_w = w.clone();
                let mut hi_w = w.clone();
                let (mut lo_b, mut hi_b) = (b, b);
                if j < 5 {
                    lo_w[j] -= eps;
                    hi_w[j] += eps;
                } else {
                    lo_b -= eps;
                    hi_b += eps;
                }
                let fd = (logistic_objective(&z, &targets, &hi_w, hi_b, ridge)
                    - logistic_objective(&z, &targets, &lo_w, lo_b, ridge))
                    / (2.0 * eps);
                let an = if j < 5 { gw[j] } else { gb };
                let rel = (an - fd).abs() / an.abs().max(fd.abs()).max(1e-8);
                assert!(rel < 1e-5, "component {j}: analytic {an} fd {fd}");
            }
        }
    }

    #[test]
    fn fit_matches_grid_search_on_small_data() {
        let scores = vec![-1.2, -0.4, -0.1, 0.3, 0.8, 1.5];
        let labels = vec![0u8, 0, 1, 0, 1, 1];
        let d = set(scores.clone(), labels.clone());
        let ridge = 0.1;
        let m = logreg_fit(&d, 1, ridge).unwrap();
        let (w_fit, b_fit) = match m {
            CalibratorModel::Logistic { weights, intercept, .. } => (weights[0], intercept),
            _ => unreachable!(),
        };

        // four-stage refined grid search over (w, b)
        let z = Matrix::from_column(scores);
        let targets: Vec<f64> = labels.iter().map(|&y| y as f64).collect();
        let (mut cw, mut cb, mut half) = (0.0f64, 0.0f64, 10.0f64);
        for _ in 0..4 {
            let (mut best, mut best_w, mut best_b) = (f64::INFINITY, cw, cb);
            for i in 0..=100 {
                for j in 0..=100 {
                    let w = cw - half + 2.0 * half * i as f64 / 100.0;
                    let b = cb - half + 2.0 * half * j as f64 / 100.0;
                    let f = logistic_objective(&z, &targets, &[w], b, ridge);
                    if f < best {
                        best = f;
                        best_w = w;
                        best_b = b;
                    }
                }
            }
            cw = best_w;
            cb = best_b;
            half /= 10.0;
        }
        assert!((w_fit - cw).abs() < 1e-3, "w {w_fit} grid {cw}");
        assert!((b_fit - cb).abs() < 1e-3, "b {b_fit} grid {cb}");
    }

    #[test]
    fn ridge_shrinks_the_weights() {
        let d = set(
            vec![-2.1, -1.0, -0.2, -0.6, 0.4, 1.1, 0.1, 2.3],
            vec![0, 0, 0, 1, 0, 1, 1, 1],
        );
        let w = |ridge: f64| match logreg_fit(&d, 1, ridge).unwrap() {
            CalibratorModel::Logistic { weights, .. } => weights[0].abs(),
            _ => unreachable!(),
        };
        assert!(w(5.0) < w(0.1));
        assert!(w(0.1) < w(0.0));
    }

    #[test]
    fn recovers_binormal_posterior_at_large_n() {
        use crate::dist::{sample_pair, shape_d, PairConfig};
        let cfg = PairConfig::resolve(shape_d(), shape_d(), 0.9, 0.5).unwrap();
        let mu = cfg.shift;
        let train = sample_pair(&cfg, 20_000, 20_000, 20_260_501).unwrap();
        let m = logreg_fit(&train, 1, 0.0).unwrap();
        match m {
            CalibratorModel::Logistic { weights, intercept, separated, .. } => {
                assert!(!separated);
                // true posterior is sigmoid(mu h - mu^2/2)
                assert!((weights[0] - mu).abs() < 0.05, "w {} vs {}", weights[0], mu);
                assert!(
                    (intercept + mu * mu / 2.0).abs() < 0.05,
                    "b {} vs {}",
                    intercept,
                    -mu * mu / 2.0
                );
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn solve_linear_handles_pivoting() {
        // needs a row swap: leading zero pivot
        let a = vec![0.0, 2.0, 1.0, 1.0, 1.0, 1.0, 2.0, 1.0, -1.0];
        let b = vec![5.0, 4.0, 2.0];
        let x = solve_linear(a, b).unwrap();
        // verify residual instead of hand-solving
        let a = [[0.0, 2.0, 1.0], [1.0, 1.0, 1.0], [2.0, 1.0, -1.0]];
        let want = [5.0, 4.0, 2.0];
        for r in 0..3 {
            let got: f64 = (0..3).map(|c| a[r][c] * x[c]).sum();
            assert!((got - want[r]).abs() < 1e-12);
        }
        assert!(solve_linear(vec![1.0, 1.0, 1.0, 1.0], vec![1.0, 1.0]).is_err());
    }
}
