//! CSV encodings of run outputs: per-trial records, per-cell aggregates,
//! the compact summary, configuration ranking, and the two-score
//! comparison. Floats round-trip exactly (shortest representation);
//! missing values are empty cells.

use super::atomic_write;
use crate::error::{CalibError, Result};
use crate::experiments::{AggregateRow, ComparisonTable, RankedConfig, SummaryRow};
use crate::metrics::EvalRecord;
use serde::Serialize;
use std::path::Path;

fn to_csv<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer
            .serialize(row)
            .map_err(|e| CalibError::Io(format!("encoding CSV: {e}")))?;
    }
    writer
        .into_inner()
        .map_err(|e| CalibError::Io(format!("encoding CSV: {e}")))
}

pub fn results_to_csv(records: &[EvalRecord]) -> Result<Vec<u8>> {
    to_csv(records)
}

pub fn aggregates_to_csv(rows: &[AggregateRow]) -> Result<Vec<u8>> {
    to_csv(rows)
}

pub fn summary_to_csv(rows: &[SummaryRow]) -> Result<Vec<u8>> {
    to_csv(rows)
}

pub fn ranking_to_csv(rows: &[RankedConfig]) -> Result<Vec<u8>> {
    to_csv(rows)
}

pub fn comparison_to_csv(table: &ComparisonTable) -> Result<Vec<u8>> {
    to_csv(&table.rows)
}

pub fn write_results_csv(path: &Path, records: &[EvalRecord]) -> Result<()> {
    atomic_write(path, &results_to_csv(records)?)
}

pub fn write_aggregates_csv(path: &Path, rows: &[AggregateRow]) -> Result<()> {
    atomic_write(path, &aggregates_to_csv(rows)?)
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    atomic_write(path, &summary_to_csv(rows)?)
}

pub fn write_ranking_csv(path: &Path, rows: &[RankedConfig]) -> Result<()> {
    atomic_write(path, &ranking_to_csv(rows)?)
}

pub fn write_comparison_csv(path: &Path, table: &ComparisonTable) -> Result<()> {
    atomic_write(path, &comparison_to_csv(table)?)
}

/// Read back a per-trial results CSV, e.g. to build a report from an
/// earlier run. Failure messages are not persisted, so they come back as
/// the flag alone.
pub fn results_from_csv(text: &str) -> Result<Vec<EvalRecord>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut records = Vec::new();
    for (i, row) in reader.deserialize::<EvalRecord>().enumerate() {
        let record =
            row.map_err(|e| CalibError::Config(format!("results line {}: {e}", i + 2)))?;
        records.push(record);
    }
    if records.is_empty() {
        return Err(CalibError::Config(
            "results file has no data rows".to_string(),
        ));
    }
    Ok(records)
}

pub fn read_results_csv(path: &Path) -> Result<Vec<EvalRecord>> {
    let text = super::read_text(path)?;
    results_from_csv(&text).map_err(|e| CalibError::Config(format!("{}: {e}", path.display())))
}
