//! `calibra report`: rebuild the aggregate tables from a per-trial results
//! file and render per-metric charts of mean error against training size.

use calibra_core::experiments::{
    aggregate, compare_multi_vs_single, rank_configs_by_mean_rmse, summarize, SummaryRow,
    SUMMARY_METRICS,
};
use calibra_core::io::charts::{line_chart, Series};
use calibra_core::io::{atomic_write, results};
use calibra_core::{CalibError, Result};
use std::fs;
use std::path::PathBuf;

#[derive(clap::Args)]
pub struct ReportArgs {
    /// Per-trial results CSV from `calibra simulate`.
    results: PathBuf,
    /// Report output directory.
    #[arg(long, default_value = "report")]
    out: PathBuf,
    /// Skip the SVG charts.
    #[arg(long)]
    no_charts: bool,
}

pub fn run(args: &ReportArgs) -> Result<()> {
    let records = results::read_results_csv(&args.results)?;
    let aggregates = aggregate(&records);
    let summary = summarize(&records);
    let ranking = rank_configs_by_mean_rmse(&aggregates)?;
    // only meaningful when the records carry companion calibrators
    let comparison = compare_multi_vs_single(&records).ok();

    fs::create_dir_all(&args.out)
        .map_err(|e| CalibError::Io(format!("creating {}: {e}", args.out.display())))?;
    let mut outputs: Vec<String> = Vec::new();
    results::write_aggregates_csv(&args.out.join("aggregates.csv"), &aggregates)?;
    outputs.push("aggregates.csv".to_string());
    results::write_summary_csv(&args.out.join("summary.csv"), &summary)?;
    outputs.push("summary.csv".to_string());
    results::write_ranking_csv(&args.out.join("ranking.csv"), &ranking)?;
    outputs.push("ranking.csv".to_string());
    if let Some(table) = &comparison {
        results::write_comparison_csv(&args.out.join("comparison.csv"), table)?;
        outputs.push("comparison.csv".to_string());
    }
    if !args.no_charts {
        for metric in SUMMARY_METRICS {
            if let Some(svg) = metric_chart(&summary, metric)? {
                let name = format!("chart_{metric}.svg");
                atomic_write(&args.out.join(&name), svg.as_bytes())?;
                outputs.push(name);
            }
        }
    }

    let failures = records.iter().filter(|r| r.failed).count();
    println!("{} records ({} failed)", records.len(), failures);
    println!("wrote {} to {}", outputs.join(", "), args.out.display());
    Ok(())
}

/// One chart per metric: mean value against log2(training size), one series
/// per calibrator. Metrics absent from the summary produce no chart.
fn metric_chart(summary: &[SummaryRow], metric: &str) -> Result<Option<String>> {
    let mut series: Vec<Series> = Vec::new();
    for row in summary.iter().filter(|r| r.metric == metric) {
        let point = ((row.n as f64).log2(), row.mean);
        match series.iter_mut().find(|s| s.name == row.calibrator) {
            Some(s) => s.points.push(point),
            None => series.push(Series { name: row.calibrator.clone(), points: vec![point] }),
        }
    }
    if series.is_empty() {
        return Ok(None);
    }
    for s in &mut series {
        s.points.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    line_chart(
        &format!("mean {metric} by training size"),
        "log2(n)",
        &format!("mean {metric}"),
        &series,
    )
    .map(Some)
}
