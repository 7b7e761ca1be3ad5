//! Simulation grids: cell enumeration, deterministic per-trial seeding,
//! parallel execution, and the aggregation / ranking / comparison layers
//! that turn raw trial records into study outputs.

pub mod engine;
pub mod marginal;

pub use engine::{run_grid, RunResult};

use crate::calibrators::FitMethod;
use crate::error::{CalibError, Result};
use crate::metrics::EvalRecord;
use crate::rng::mix64;
use serde::Serialize;
use std::collections::HashMap;

/// Fixed seed for the empirical standardization of the built-in shapes:
/// every run standardizes against the same reference population no matter
/// what master seed it draws its trials from.
pub const STANDARDIZE_SEED: u64 = 1_000_003;

/// Ridge penalty applied to logistic calibrators unless overridden.
pub const DEFAULT_RIDGE: f64 = 1e-4;

/// What kind of score channels a grid simulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMode {
    /// One score per observation from a shape pair.
    Single,
    /// Two correlated scores per observation.
    Multi,
    /// One score from the mirrored truncated-exponential pair.
    TruncExp,
}

/// Which columns of the sampled matrix a calibrator trains on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InputChannel {
    /// All sampled score columns.
    Full,
    /// A single column, for the one-score companions in multi-score runs.
    Col(usize),
}

/// One calibrator entry of a grid: a fit method plus the channel it sees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibratorSpec {
    pub method: FitMethod,
    pub channel: InputChannel,
}

impl CalibratorSpec {
    /// Parse an identifier like `platt`, `logreg`, `logreg_ext`, `iso`,
    /// `bin25`, optionally suffixed `_h1` / `_h2` to train on a single
    /// column of a two-score sample. `ridge` applies to the logistic kinds.
    pub fn parse(id: &str, ridge: f64) -> Result<CalibratorSpec> {
        let (base, channel) = if let Some(b) = id.strip_suffix("_h1") {
            (b, InputChannel::Col(0))
        } else if let Some(b) = id.strip_suffix("_h2") {
            (b, InputChannel::Col(1))
        } else {
            (id, InputChannel::Full)
        };
        let method = match base {
            "platt" => FitMethod::Platt,
            "logreg" => FitMethod::Logistic { degree: 1, ridge },
            "logreg_ext" => FitMethod::Logistic { degree: 2, ridge },
            "iso" => FitMethod::Isotonic,
            _ => {
                if let Some(k) = base.strip_prefix("bin") {
                    let bins: usize = k.parse().map_err(|_| {
                        CalibError::Config(format!("bad bin count in calibrator id '{id}'"))
                    })?;
                    FitMethod::Binning { bins }
                } else {
                    return Err(CalibError::Config(format!(
                        "unknown calibrator id '{id}' (expected platt, logreg, \
                         logreg_ext, iso, or bin<k>, optionally with _h1/_h2)"
                    )));
                }
            }
        };
        Ok(CalibratorSpec { method, channel })
    }

    /// The identifier this spec round-trips through [`CalibratorSpec::parse`].
    pub fn id(&self) -> String {
        let base = match self.method {
            FitMethod::Platt => "platt".to_string(),
            FitMethod::Logistic { degree: 1, .. } => "logreg".to_string(),
            FitMethod::Logistic { .. } => "logreg_ext".to_string(),
            FitMethod::Isotonic => "iso".to_string(),
            FitMethod::Binning { bins } => format!("bin{bins}"),
        };
        match self.channel {
            InputChannel::Full => base,
            InputChannel::Col(j) => format!("{base}_h{}", j + 1),
        }
    }
}

/// Full description of a simulation run. Shapes are named (`a` through `d`);
/// resolution into concrete distributions happens inside the engine.
#[derive(Debug, Clone, Serialize)]
pub struct GridSpec {
    pub mode: GridMode,
    /// Single mode: (class-0 shape, class-1 shape) per score pair.
    pub pairs: Vec<(String, String)>,
    /// Multi mode: two shape pairs per combination, one per channel.
    pub combos: Vec<[(String, String); 2]>,
    pub auc_targets: Vec<f64>,
    /// Multi mode: in-class correlations of the second score.
    pub rho_values: Vec<f64>,
    /// Training sample sizes (total; split as evenly as possible, class 1
    /// first when odd sizes round).
    pub n_values: Vec<usize>,
    /// Monte-Carlo repetitions per cell.
    pub trials: usize,
    /// Independent test sample size (total).
    pub ind_test_size: usize,
    pub calibrators: Vec<CalibratorSpec>,
    pub master_seed: u64,
    /// Worker threads; 0 uses the global pool.
    pub threads: usize,
}

/// One executable cell of the grid: a resolved configuration at one
/// training size. `index` is the flattened enumeration position and feeds
/// the per-trial seed derivation.
#[derive(Debug, Clone, Serialize)]
pub struct CellSpec {
    pub index: usize,
    pub config_index: usize,
    pub config_id: String,
    pub auc_target: f64,
    pub rho: Option<f64>,
    pub n: usize,
}

impl GridSpec {
    /// The standard single-score calibrator set.
    pub fn default_calibrators() -> Vec<CalibratorSpec> {
        ["platt", "logreg", "logreg_ext", "iso", "bin10", "bin20", "bin30", "bin40", "bin50"]
            .iter()
            .map(|id| CalibratorSpec::parse(id, DEFAULT_RIDGE).unwrap())
            .collect()
    }

    /// Two-score calibrator set: each logistic variant on both scores and on
    /// each score alone.
    pub fn multi_calibrators() -> Vec<CalibratorSpec> {
        ["logreg", "logreg_h1", "logreg_h2", "logreg_ext", "logreg_ext_h1", "logreg_ext_h2"]
            .iter()
            .map(|id| CalibratorSpec::parse(id, DEFAULT_RIDGE).unwrap())
            .collect()
    }

    /// Desk-scale single-score benchmark: the four same-shape pairs, three
    /// separability levels, four training sizes, 50 trials.
    pub fn desk(master_seed: u64) -> GridSpec {
        GridSpec {
            mode: GridMode::Single,
            pairs: ["a", "b", "c", "d"]
                .iter()
                .map(|s| (s.to_string(), s.to_string()))
                .collect(),
            combos: Vec::new(),
            auc_targets: vec![0.6, 0.75, 0.9],
            rho_values: Vec::new(),
            n_values: vec![10, 80, 640, 5120],
            trials: 50,
            ind_test_size: 10_000,
            calibrators: GridSpec::default_calibrators(),
            master_seed,
            threads: 0,
        }
    }

    /// Full-scale single-score benchmark: all 16 shape pairs, training sizes
    /// 10 * 2^i for i = 0..=9, 1000 trials per cell.
    pub fn full(master_seed: u64) -> GridSpec {
        let shapes = ["a", "b", "c", "d"];
        let mut pairs = Vec::new();
        for f0 in shapes {
            for f1 in shapes {
                pairs.push((f0.to_string(), f1.to_string()));
            }
        }
        GridSpec {
            pairs,
            n_values: (0..10).map(|i| 10usize << i).collect(),
            trials: 1000,
            ..GridSpec::desk(master_seed)
        }
    }

    /// Small two-score benchmark over correlations.
    pub fn multi_small(master_seed: u64) -> GridSpec {
        GridSpec {
            mode: GridMode::Multi,
            pairs: Vec::new(),
            combos: vec![
                [("b".into(), "b".into()), ("c".into(), "c".into())],
                [("d".into(), "d".into()), ("d".into(), "d".into())],
            ],
            auc_targets: vec![0.75, 0.9],
            rho_values: vec![0.0, 0.5, 0.9],
            n_values: vec![40, 320],
            trials: 20,
            ind_test_size: 4000,
            calibrators: GridSpec::multi_calibrators(),
            master_seed,
            threads: 0,
        }
    }

    /// Truncated-exponential study, including the near-degenerate high
    /// separability level.
    pub fn trunc_exp_study(master_seed: u64) -> GridSpec {
        GridSpec {
            mode: GridMode::TruncExp,
            pairs: Vec::new(),
            combos: Vec::new(),
            auc_targets: vec![0.6, 0.75, 0.9, 0.99],
            rho_values: Vec::new(),
            n_values: vec![10, 80, 640, 5120],
            trials: 50,
            ind_test_size: 10_000,
            calibrators: GridSpec::default_calibrators(),
            master_seed,
            threads: 0,
        }
    }

    /// Look up a named preset.
    pub fn preset(name: &str, master_seed: u64) -> Result<GridSpec> {
        match name {
            "desk" => Ok(GridSpec::desk(master_seed)),
            "full" => Ok(GridSpec::full(master_seed)),
            "multi-small" => Ok(GridSpec::multi_small(master_seed)),
            "trunc-exp" => Ok(GridSpec::trunc_exp_study(master_seed)),
            other => Err(CalibError::Config(format!(
                "unknown preset '{other}' (expected desk, full, multi-small, or trunc-exp)"
            ))),
        }
    }

    /// Reject inconsistent grids before any work starts.
    pub fn validate(&self) -> Result<()> {
        match self.mode {
            GridMode::Single => {
                if self.pairs.is_empty() {
                    return Err(CalibError::Config("single mode needs at least one shape pair".into()));
                }
                if !self.combos.is_empty() || !self.rho_values.is_empty() {
                    return Err(CalibError::Config(
                        "combos/rho_values only apply to multi mode".into(),
                    ));
                }
            }
            GridMode::Multi => {
                if self.combos.is_empty() {
                    return Err(CalibError::Config("multi mode needs at least one shape combo".into()));
                }
                if self.rho_values.is_empty() {
                    return Err(CalibError::Config("multi mode needs at least one rho value".into()));
                }
                if !self.pairs.is_empty() {
                    return Err(CalibError::Config("pairs only apply to single mode".into()));
                }
            }
            GridMode::TruncExp => {
                if !self.pairs.is_empty() || !self.combos.is_empty() || !self.rho_values.is_empty() {
                    return Err(CalibError::Config(
                        "trunc_exp mode derives its shapes; pairs/combos/rho_values must be empty"
                            .into(),
                    ));
                }
            }
        }
        for &t in &self.auc_targets {
            if !(t > 0.5 && t < 1.0) {
                return Err(CalibError::Config(format!(
                    "AUC targets must lie in (0.5, 1), got {t}"
                )));
            }
        }
        if self.auc_targets.is_empty() {
            return Err(CalibError::Config("need at least one AUC target".into()));
        }
        for &r in &self.rho_values {
            if !(r.abs() < 1.0) {
                return Err(CalibError::Config(format!(
                    "correlations must satisfy |rho| < 1, got {r}"
                )));
            }
        }
        if self.n_values.is_empty() || self.n_values.iter().any(|&n| n < 2) {
            return Err(CalibError::Config(
                "training sizes must be present and at least 2".into(),
            ));
        }
        if self.trials == 0 {
            return Err(CalibError::Config("need at least one trial per cell".into()));
        }
        if self.ind_test_size < 2 {
            return Err(CalibError::Config("independent test size must be at least 2".into()));
        }
        if self.calibrators.is_empty() {
            return Err(CalibError::Config("need at least one calibrator".into()));
        }
        let mut seen = HashMap::new();
        for c in &self.calibrators {
            if let Some(_prev) = seen.insert(c.id(), ()) {
                return Err(CalibError::Config(format!(
                    "duplicate calibrator id '{}'",
                    c.id()
                )));
            }
            if let FitMethod::Logistic { degree, ridge } = c.method {
                if !(degree == 1 || degree == 2) {
                    return Err(CalibError::Config(format!(
                        "logistic degree must be 1 or 2, got {degree}"
                    )));
                }
                if !ridge.is_finite() || ridge < 0.0 {
                    return Err(CalibError::Config(format!(
                        "logistic ridge must be finite and nonnegative, got {ridge}"
                    )));
                }
            }
            if let FitMethod::Binning { bins } = c.method {
                if bins < 2 {
                    return Err(CalibError::Config(format!(
                        "binning needs at least 2 bins, got {bins}"
                    )));
                }
            }
            match c.channel {
                InputChannel::Col(j) if self.mode != GridMode::Multi => {
                    return Err(CalibError::Config(format!(
                        "calibrator '{}' selects column {j} but the grid is not multi-score",
                        c.id()
                    )));
                }
                InputChannel::Col(j) if j > 1 => {
                    return Err(CalibError::Config(format!(
                        "calibrator column index {j} out of range (two channels)"
                    )));
                }
                _ => {}
            }
        }
        for (f0, f1) in &self.pairs {
            crate::dist::shape_by_name(f0)?;
            crate::dist::shape_by_name(f1)?;
        }
        for combo in &self.combos {
            for (f0, f1) in combo {
                crate::dist::shape_by_name(f0)?;
                crate::dist::shape_by_name(f1)?;
            }
        }
        Ok(())
    }

    /// Number of resolved configurations (cells / training sizes).
    pub fn config_count(&self) -> usize {
        match self.mode {
            GridMode::Single => self.pairs.len() * self.auc_targets.len(),
            GridMode::Multi => {
                self.combos.len() * self.auc_targets.len() * self.rho_values.len()
            }
            GridMode::TruncExp => self.auc_targets.len(),
        }
    }

    /// Total result rows a run will produce.
    pub fn expected_rows(&self) -> usize {
        self.config_count() * self.n_values.len() * self.trials * self.calibrators.len()
    }
}

/// Per-trial seed: the master seed, cell index, and trial index pushed
/// through two rounds of 64-bit mixing so neighboring cells and trials land
/// in unrelated stream positions.
pub fn derive_trial_seed(master_seed: u64, cell_index: u64, trial: u64) -> u64 {
    mix64(mix64(mix64(master_seed) ^ cell_index) ^ trial)
}

/// Split a total sample size into (n0, n1) class counts, class 1 taking the
/// smaller half on odd totals.
pub fn class_split(total: usize) -> (usize, usize) {
    let n1 = total / 2;
    (total - n1, n1)
}

/// Per-cell, per-calibrator aggregation of trial records.
#[derive(Debug, Clone, Serialize)]
pub struct AggregateRow {
    pub config_id: String,
    pub calibrator: String,
    pub auc_target: f64,
    pub rho: Option<f64>,
    pub n: usize,
    pub trials: usize,
    pub failures: usize,
    pub mean_rmse_ind: Option<f64>,
    pub mean_rmse_sub: Option<f64>,
    pub mean_rb_ind: Option<f64>,
    pub mean_rb_sub: Option<f64>,
}

/// Group records by (config, cell, calibrator) in encounter order and mean
/// each metric over the non-failed trials.
pub fn aggregate(records: &[EvalRecord]) -> Vec<AggregateRow> {
    #[derive(Default)]
    struct Acc {
        trials: usize,
        failures: usize,
        rmse_ind: (f64, usize),
        rmse_sub: (f64, usize),
        rb_ind: (f64, usize),
        rb_sub: (f64, usize),
    }
    let mut order: Vec<(String, String, f64, Option<f64>, usize)> = Vec::new();
    let mut groups: HashMap<(String, String, u64, Option<u64>, usize), Acc> = HashMap::new();
    for r in records {
        let key = (
            r.config_id.clone(),
            r.calibrator.clone(),
            r.auc_target.to_bits(),
            r.rho.map(f64::to_bits),
            r.n,
        );
        let acc = groups.entry(key).or_insert_with(|| {
            order.push((r.config_id.clone(), r.calibrator.clone(), r.auc_target, r.rho, r.n));
            Acc::default()
        });
        acc.trials += 1;
        if r.failed {
            acc.failures += 1;
            continue;
        }
        for (slot, v) in [
            (&mut acc.rmse_ind, r.rmse_ind),
            (&mut acc.rmse_sub, r.rmse_sub),
            (&mut acc.rb_ind, r.rb_ind),
            (&mut acc.rb_sub, r.rb_sub),
        ] {
            if let Some(v) = v {
                slot.0 += v;
                slot.1 += 1;
            }
        }
    }
    let mean = |(sum, count): (f64, usize)| {
        if count == 0 { None } else { Some(sum / count as f64) }
    };
    order
        .into_iter()
        .map(|(config_id, calibrator, auc_target, rho, n)| {
            let acc = groups
                .remove(&(
                    config_id.clone(),
                    calibrator.clone(),
                    auc_target.to_bits(),
                    rho.map(f64::to_bits),
                    n,
                ))
                .unwrap();
            AggregateRow {
                config_id,
                calibrator,
                auc_target,
                rho,
                n,
                trials: acc.trials,
                failures: acc.failures,
                mean_rmse_ind: mean(acc.rmse_ind),
                mean_rmse_sub: mean(acc.rmse_sub),
                mean_rb_ind: mean(acc.rb_ind),
                mean_rb_sub: mean(acc.rb_sub),
            }
        })
        .collect()
}

/// One line of the compact run summary: a metric meaned over every
/// non-failed record at one (calibrator, training size) slot.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub metric: String,
    pub calibrator: String,
    pub n: usize,
    pub mean: f64,
    pub records_used: usize,
}

pub const SUMMARY_METRICS: [&str; 4] = ["rmse_ind", "rmse_sub", "rb_ind", "rb_sub"];

fn metric_value(r: &EvalRecord, metric: &str) -> Option<f64> {
    match metric {
        "rmse_ind" => r.rmse_ind,
        "rmse_sub" => r.rmse_sub,
        "rb_ind" => r.rb_ind,
        "rb_sub" => r.rb_sub,
        _ => None,
    }
}

/// Mean every metric over calibrators and training sizes, collapsing the
/// config axis. Slots with no successful values produce no row.
pub fn summarize(records: &[EvalRecord]) -> Vec<SummaryRow> {
    let mut calibrators: Vec<String> = Vec::new();
    let mut sizes: Vec<usize> = Vec::new();
    for r in records {
        if !calibrators.contains(&r.calibrator) {
            calibrators.push(r.calibrator.clone());
        }
        if !sizes.contains(&r.n) {
            sizes.push(r.n);
        }
    }
    sizes.sort_unstable();
    let mut rows = Vec::new();
    for metric in SUMMARY_METRICS {
        for calibrator in &calibrators {
            for &n in &sizes {
                let mut sum = 0.0;
                let mut count = 0usize;
                for r in records {
                    if r.failed || &r.calibrator != calibrator || r.n != n {
                        continue;
                    }
                    if let Some(v) = metric_value(r, metric) {
                        sum += v;
                        count += 1;
                    }
                }
                if count > 0 {
                    rows.push(SummaryRow {
                        metric: metric.to_string(),
                        calibrator: calibrator.clone(),
                        n,
                        mean: sum / count as f64,
                        records_used: count,
                    });
                }
            }
        }
    }
    rows
}

/// A configuration's difficulty rank within its run.
#[derive(Debug, Clone, Serialize)]
pub struct RankedConfig {
    pub config_id: String,
    pub auc_target: f64,
    pub rho: Option<f64>,
    pub mean_rmse: f64,
    /// 1 = smallest mean independent RMSE.
    pub rank: usize,
}

/// Rank configurations by their mean independent-sample RMSE, averaged over
/// every aggregate cell (all calibrators and training sizes) of the config.
/// Returned in the configs' enumeration order, carrying 1-based ranks; ties
/// keep enumeration order.
pub fn rank_configs_by_mean_rmse(aggregates: &[AggregateRow]) -> Result<Vec<RankedConfig>> {
    let mut order: Vec<(String, f64, Option<f64>)> = Vec::new();
    let mut sums: HashMap<(String, u64, Option<u64>), (f64, usize)> = HashMap::new();
    for a in aggregates {
        let key = (a.config_id.clone(), a.auc_target.to_bits(), a.rho.map(f64::to_bits));
        if !sums.contains_key(&key) {
            order.push((a.config_id.clone(), a.auc_target, a.rho));
        }
        let slot = sums.entry(key).or_insert((0.0, 0));
        if let Some(v) = a.mean_rmse_ind {
            slot.0 += v;
            slot.1 += 1;
        }
    }
    let mut configs: Vec<RankedConfig> = Vec::with_capacity(order.len());
    for (config_id, auc_target, rho) in order {
        let (sum, count) = sums[&(config_id.clone(), auc_target.to_bits(), rho.map(f64::to_bits))];
        if count == 0 {
            return Err(CalibError::Domain(format!(
                "configuration {config_id} (auc {auc_target}) has no successful \
                 trials with a reference posterior to rank by"
            )));
        }
        configs.push(RankedConfig {
            config_id,
            auc_target,
            rho,
            mean_rmse: sum / count as f64,
            rank: 0,
        });
    }
    let mut by_mean: Vec<usize> = (0..configs.len()).collect();
    by_mean.sort_by(|&a, &b| configs[a].mean_rmse.total_cmp(&configs[b].mean_rmse));
    for (pos, idx) in by_mean.into_iter().enumerate() {
        configs[idx].rank = pos + 1;
    }
    Ok(configs)
}

/// One comparison line: a two-score calibrator against its own single-score
/// companions in one cell, under one metric.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub metric: String,
    pub calibrator: String,
    pub config_id: String,
    pub auc_target: f64,
    pub rho: Option<f64>,
    pub n: usize,
    /// Cell-mean metric of the two-score fit.
    pub r12: Option<f64>,
    /// Cell-mean metric of the score-1-only companion.
    pub r1: Option<f64>,
    /// Cell-mean metric of the score-2-only companion.
    pub r2: Option<f64>,
    pub ratio1: Option<f64>,
    pub ratio2: Option<f64>,
    /// Whether the two-score fit beat both companions.
    pub win: Option<bool>,
    /// Any contributing trial failed.
    pub flagged: bool,
    /// Fraction of cells won within this (metric, calibrator, n) group.
    pub p_cell: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

/// Compare each two-score calibrator against its `_h1` / `_h2` companions,
/// cell by cell, under every metric; `p_cell` is the winning fraction over
/// the cells sharing the calibrator and training size.
pub fn compare_multi_vs_single(records: &[EvalRecord]) -> Result<ComparisonTable> {
    // base calibrators having both companions
    let ids: Vec<String> = {
        let mut seen = Vec::new();
        for r in records {
            if !seen.contains(&r.calibrator) {
                seen.push(r.calibrator.clone());
            }
        }
        seen
    };
    let bases: Vec<String> = ids
        .iter()
        .filter(|id| {
            ids.contains(&format!("{id}_h1")) && ids.contains(&format!("{id}_h2"))
        })
        .cloned()
        .collect();
    if bases.is_empty() {
        return Err(CalibError::Domain(
            "no two-score calibrator with both single-score companions found".to_string(),
        ));
    }

    // cells in encounter order
    type CellKey = (String, u64, Option<u64>, usize);
    let mut cells: Vec<(String, f64, Option<f64>, usize)> = Vec::new();
    let mut seen_cells: HashMap<CellKey, ()> = HashMap::new();
    for r in records {
        let key = (r.config_id.clone(), r.auc_target.to_bits(), r.rho.map(f64::to_bits), r.n);
        if seen_cells.insert(key, ()).is_none() {
            cells.push((r.config_id.clone(), r.auc_target, r.rho, r.n));
        }
    }

    let cell_mean = |config_id: &str, auc: f64, rho: Option<f64>, n: usize, calibrator: &str, metric: &str| {
        let mut sum = 0.0;
        let mut count = 0usize;
        let mut flagged = false;
        for r in records {
            if r.config_id != config_id
                || r.auc_target != auc
                || r.rho != rho
                || r.n != n
                || r.calibrator != calibrator
            {
                continue;
            }
            if r.failed {
                flagged = true;
                continue;
            }
            if let Some(v) = metric_value(r, metric) {
                sum += v;
                count += 1;
            }
        }
        (if count == 0 { None } else { Some(sum / count as f64) }, flagged)
    };

    let mut rows: Vec<ComparisonRow> = Vec::new();
    for metric in SUMMARY_METRICS {
        for base in &bases {
            for (config_id, auc, rho, n) in &cells {
                let (r12, f12) = cell_mean(config_id, *auc, *rho, *n, base, metric);
                let (r1, f1) = cell_mean(config_id, *auc, *rho, *n, &format!("{base}_h1"), metric);
                let (r2, f2) = cell_mean(config_id, *auc, *rho, *n, &format!("{base}_h2"), metric);
                let ratio = |num: Option<f64>, den: Option<f64>| match (num, den) {
                    (Some(a), Some(b)) if b > 0.0 => Some(a / b),
                    _ => None,
                };
                let win = match (r12, r1, r2) {
                    (Some(a), Some(b), Some(c)) => Some(a < b.min(c)),
                    _ => None,
                };
                rows.push(ComparisonRow {
                    metric: metric.to_string(),
                    calibrator: base.clone(),
                    config_id: config_id.clone(),
                    auc_target: *auc,
                    rho: *rho,
                    n: *n,
                    r12,
                    r1,
                    r2,
                    ratio1: ratio(r12, r1),
                    ratio2: ratio(r12, r2),
                    win,
                    flagged: f12 || f1 || f2,
                    p_cell: None,
                });
            }
        }
    }

    // winning fraction per (metric, calibrator, n) over cells with a verdict
    let mut stats: HashMap<(String, String, usize), (usize, usize)> = HashMap::new();
    for row in &rows {
        if let Some(win) = row.win {
            let e = stats
                .entry((row.metric.clone(), row.calibrator.clone(), row.n))
                .or_insert((0, 0));
            e.1 += 1;
            if win {
                e.0 += 1;
            }
        }
    }
    for row in &mut rows {
        row.p_cell = stats
            .get(&(row.metric.clone(), row.calibrator.clone(), row.n))
            .map(|&(wins, total)| wins as f64 / total as f64);
    }
    Ok(ComparisonTable { rows })
}
