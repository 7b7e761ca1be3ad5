//! Reading score CSVs: one header row naming the score columns, one row per
//! observation, and an optional trailing `label` column of 0/1 classes.

use super::read_text;
use crate::calibrators::{LabeledScoreSet, Matrix};
use crate::error::{CalibError, Result};
use std::path::Path;

#[derive(Debug, Clone)]
pub struct ScoreFile {
    pub matrix: Matrix,
    pub labels: Option<Vec<u8>>,
    pub score_names: Vec<String>,
}

impl ScoreFile {
    /// The score matrix with its labels, for fitting and label-based metrics.
    pub fn to_labeled(&self) -> Result<LabeledScoreSet> {
        let labels = self.labels.as_ref().ok_or_else(|| {
            CalibError::Domain("score file has no label column".to_string())
        })?;
        LabeledScoreSet::new(self.matrix.clone(), labels.clone())
    }
}

pub fn read_score_file(path: &Path) -> Result<ScoreFile> {
    let text = read_text(path)?;
    parse_score_csv(&text)
        .map_err(|e| CalibError::Config(format!("{}: {e}", path.display())))
}

/// Parse score CSV text. The header's last column may be `label`; all other
/// columns are finite numeric scores.
pub fn parse_score_csv(text: &str) -> Result<ScoreFile> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CalibError::Config(format!("bad header row: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        return Err(CalibError::Config("empty header row".to_string()));
    }
    let has_labels = headers.last().map(String::as_str) == Some("label");
    let cols = headers.len() - usize::from(has_labels);
    if cols == 0 {
        return Err(CalibError::Config(
            "need at least one score column besides the labels".to_string(),
        ));
    }
    if let Some(dup) = headers.iter().enumerate().find(|(i, h)| headers[..*i].contains(h)) {
        return Err(CalibError::Config(format!("duplicate column name '{}'", dup.1)));
    }

    let mut data: Vec<f64> = Vec::new();
    let mut labels: Vec<u8> = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i + 2; // header is line 1
        let row = row.map_err(|e| CalibError::Config(format!("line {line}: {e}")))?;
        if row.len() != headers.len() {
            return Err(CalibError::Config(format!(
                "line {line}: expected {} fields, got {}",
                headers.len(),
                row.len()
            )));
        }
        for (j, field) in row.iter().take(cols).enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                CalibError::Config(format!(
                    "line {line}: column '{}' has non-numeric value '{field}'",
                    headers[j]
                ))
            })?;
            if !v.is_finite() {
                return Err(CalibError::Config(format!(
                    "line {line}: column '{}' has non-finite value '{field}'",
                    headers[j]
                )));
            }
            data.push(v);
        }
        if has_labels {
            let field = &row[cols];
            match field {
                "0" => labels.push(0),
                "1" => labels.push(1),
                other => {
                    return Err(CalibError::Config(format!(
                        "line {line}: label must be 0 or 1, got '{other}'"
                    )))
                }
            }
        }
    }
    if data.is_empty() {
        return Err(CalibError::Config("no data rows".to_string()));
    }
    Ok(ScoreFile {
        matrix: Matrix::from_rows(data, cols),
        labels: if has_labels { Some(labels) } else { None },
        score_names: headers[..cols].to_vec(),
    })
}
