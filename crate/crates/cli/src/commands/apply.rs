//! `calibra apply`: run a saved model over a score file, emitting the input
//! columns plus a `posterior` column. With labels present, the calibrated
//! root Brier score and AUC are reported too.

use calibra_core::io::{atomic_write, load_model, read_score_file};
use calibra_core::metrics::{mann_whitney_auc, rb_hat};
use calibra_core::{CalibError, Result};
use std::path::PathBuf;

#[derive(clap::Args)]
pub struct ApplyArgs {
    /// Fitted model JSON.
    model: PathBuf,
    /// Score CSV; the label column is optional here.
    scores: PathBuf,
    /// Output CSV path. Without it the CSV goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: &ApplyArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let file = read_score_file(&args.scores)?;
    let posteriors = model.predict(&file.matrix)?;

    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = file.score_names.clone();
    if file.labels.is_some() {
        header.push("label".to_string());
    }
    header.push("posterior".to_string());
    let encode = |e: csv::Error| CalibError::Io(format!("encoding output: {e}"));
    writer.write_record(&header).map_err(encode)?;
    for i in 0..file.matrix.rows() {
        let mut row: Vec<String> = file.matrix.row(i).iter().map(|v| format!("{v}")).collect();
        if let Some(labels) = &file.labels {
            row.push(format!("{}", labels[i]));
        }
        row.push(format!("{}", posteriors[i]));
        writer.write_record(&row).map_err(encode)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CalibError::Io(format!("encoding output: {e}")))?;

    match &args.out {
        Some(path) => {
            atomic_write(path, &bytes)?;
            println!("wrote {} posteriors to {}", posteriors.len(), path.display());
            if let Some(labels) = &file.labels {
                println!("calibrated RB: {:.12}", rb_hat(&posteriors, labels)?);
                println!("posterior AUC: {:.12}", mann_whitney_auc(&posteriors, labels)?);
            }
        }
        None => {
            let text = String::from_utf8(bytes)
                .map_err(|e| CalibError::Io(format!("encoding output: {e}")))?;
            print!("{text}");
        }
    }
    Ok(())
}
