//! `calibra calibrate`: fit one calibrator to a labeled score file, report
//! the training AUC per score column, and save the model as JSON.

use calibra_core::calibrators::{fit, CalibratorModel, FitMethod};
use calibra_core::experiments::DEFAULT_RIDGE;
use calibra_core::io::{read_score_file, save_model};
use calibra_core::metrics::mann_whitney_auc;
use calibra_core::{CalibError, Result};
use std::path::PathBuf;

#[derive(clap::Args)]
pub struct CalibrateArgs {
    /// Labeled score CSV (scores..., then a `label` column of 0/1).
    scores: PathBuf,
    /// Calibrator family: platt, logreg, logreg_ext, iso, or bin.
    #[arg(long)]
    method: String,
    /// Polynomial degree for logreg (1 or 2).
    #[arg(long)]
    degree: Option<u8>,
    /// Ridge penalty for the logistic families.
    #[arg(long)]
    ridge: Option<f64>,
    /// Bin count for bin.
    #[arg(long)]
    bins: Option<usize>,
    /// Model output path.
    #[arg(long, default_value = "model.json")]
    out: PathBuf,
}

/// Map the flag surface onto a fit method, rejecting flags that do not
/// belong to the chosen family.
fn build_method(args: &CalibrateArgs) -> Result<FitMethod> {
    let reject = |flag: &str, set: bool| {
        if set {
            Err(CalibError::Config(format!(
                "--{flag} does not apply to method '{}'",
                args.method
            )))
        } else {
            Ok(())
        }
    };
    match args.method.as_str() {
        "platt" => {
            reject("degree", args.degree.is_some())?;
            reject("ridge", args.ridge.is_some())?;
            reject("bins", args.bins.is_some())?;
            Ok(FitMethod::Platt)
        }
        "logreg" | "logreg_ext" => {
            reject("bins", args.bins.is_some())?;
            let default_degree = if args.method == "logreg_ext" { 2 } else { 1 };
            let degree = match (args.method.as_str(), args.degree) {
                ("logreg_ext", Some(d)) if d != 2 => {
                    return Err(CalibError::Config(
                        "logreg_ext is the degree-2 fit; leave --degree unset".to_string(),
                    ))
                }
                (_, Some(d)) if d == 1 || d == 2 => d,
                (_, Some(d)) => {
                    return Err(CalibError::Config(format!(
                        "--degree must be 1 or 2, got {d}"
                    )))
                }
                (_, None) => default_degree,
            };
            Ok(FitMethod::Logistic { degree, ridge: args.ridge.unwrap_or(DEFAULT_RIDGE) })
        }
        "iso" => {
            reject("degree", args.degree.is_some())?;
            reject("ridge", args.ridge.is_some())?;
            reject("bins", args.bins.is_some())?;
            Ok(FitMethod::Isotonic)
        }
        "bin" => {
            reject("degree", args.degree.is_some())?;
            reject("ridge", args.ridge.is_some())?;
            Ok(FitMethod::Binning { bins: args.bins.unwrap_or(10) })
        }
        other => Err(CalibError::Config(format!(
            "unknown method '{other}' (expected platt, logreg, logreg_ext, iso, or bin)"
        ))),
    }
}

pub fn run(args: &CalibrateArgs) -> Result<()> {
    let method = build_method(args)?;
    let file = read_score_file(&args.scores)?;
    let set = file.to_labeled()?;
    let (n0, n1) = set.class_counts();
    if n0 == 0 || n1 == 0 {
        return Err(CalibError::Config(format!(
            "score file needs both classes; got {n0} rows of class 0 and {n1} of class 1"
        )));
    }

    for (j, name) in file.score_names.iter().enumerate() {
        let auc = mann_whitney_auc(&set.matrix().column(j), set.labels())?;
        println!("training AUC [{name}]: {auc:.12}");
    }

    let model = fit(method, &set)?;
    describe(&model);
    save_model(&args.out, &model)?;
    println!("saved model to {}", args.out.display());
    Ok(())
}

fn describe(model: &CalibratorModel) {
    match model {
        CalibratorModel::Platt { a, b } => {
            println!("fitted platt: a = {a:.12}, b = {b:.12}");
        }
        CalibratorModel::Logistic { weights, intercept, degree, separated, .. } => {
            let w: Vec<String> = weights.iter().map(|w| format!("{w:.12}")).collect();
            println!(
                "fitted logistic (degree {degree}): weights = [{}], intercept = {intercept:.12}",
                w.join(", ")
            );
            if *separated {
                eprintln!(
                    "warning: training data is perfectly separated; coefficients are capped \
                     and predictions saturate"
                );
            }
        }
        CalibratorModel::Isotonic { knots, .. } => {
            println!("fitted isotonic: {} knots", knots.len());
        }
        CalibratorModel::Binning { edges, posteriors } => {
            println!(
                "fitted binning: {} bins over [{:.6}, {:.6}]",
                posteriors.len(),
                edges[0],
                edges[edges.len() - 1]
            );
        }
    }
}
