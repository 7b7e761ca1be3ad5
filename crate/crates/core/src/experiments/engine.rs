//! Grid execution: configuration resolution, deterministic parallel trial
//! runs, and assembly of the aggregated outputs.

use super::marginal::{channel_marginal, ChannelMarginal};
use super::{
    aggregate, class_split, compare_multi_vs_single, derive_trial_seed,
    rank_configs_by_mean_rmse, AggregateRow, CellSpec, ComparisonTable, GridMode, GridSpec,
    InputChannel, RankedConfig, STANDARDIZE_SEED,
};
use crate::calibrators::{fit, LabeledScoreSet};
use crate::dist::{
    sample_correlated_pair_with, sample_pair_with, shape_by_name, DistSpec, MultiConfig,
    PairConfig, PosteriorOracle,
};
use crate::error::{CalibError, Result};
use crate::metrics::{trial_metrics, EvalRecord};
use crate::rng::UniformStream;
use rayon::prelude::*;
use std::collections::HashMap;

/// Class-balance prior baked into every simulated configuration.
pub const PRIOR_PI: f64 = 0.5;

/// Everything a finished run carries.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub spec: GridSpec,
    pub cells: Vec<CellSpec>,
    pub records: Vec<EvalRecord>,
    pub aggregates: Vec<AggregateRow>,
    pub ranking: Vec<RankedConfig>,
    /// Present for multi-score grids only.
    pub comparison: Option<ComparisonTable>,
}

enum Sampler {
    Single(PairConfig),
    Multi(MultiConfig),
}

/// One configuration with its sampler, full-input oracle, and (for
/// two-score grids) whatever per-column references the calibrator set needs.
struct ResolvedConfig {
    id: String,
    auc_target: f64,
    rho: Option<f64>,
    sampler: Sampler,
    oracle: PosteriorOracle,
    marginals: [Option<ChannelMarginal>; 2],
}

enum ConfigKind {
    Single { pair: (String, String) },
    Multi { combo: [(String, String); 2], rho: f64 },
    TruncExp,
}

struct ConfigDescriptor {
    id: String,
    auc_target: f64,
    kind: ConfigKind,
}

fn enumerate_configs(spec: &GridSpec) -> Vec<ConfigDescriptor> {
    let mut out = Vec::new();
    match spec.mode {
        GridMode::Single => {
            for pair in &spec.pairs {
                for &auc in &spec.auc_targets {
                    out.push(ConfigDescriptor {
                        id: format!("{}{}", pair.0, pair.1),
                        auc_target: auc,
                        kind: ConfigKind::Single { pair: pair.clone() },
                    });
                }
            }
        }
        GridMode::Multi => {
            for combo in &spec.combos {
                for &auc in &spec.auc_targets {
                    for &rho in &spec.rho_values {
                        out.push(ConfigDescriptor {
                            id: format!(
                                "{}{}x{}{}",
                                combo[0].0, combo[0].1, combo[1].0, combo[1].1
                            ),
                            auc_target: auc,
                            kind: ConfigKind::Multi { combo: combo.clone(), rho },
                        });
                    }
                }
            }
        }
        GridMode::TruncExp => {
            for &auc in &spec.auc_targets {
                out.push(ConfigDescriptor {
                    id: "te".to_string(),
                    auc_target: auc,
                    kind: ConfigKind::TruncExp,
                });
            }
        }
    }
    out
}

/// Standardize each referenced shape once, against the fixed reference
/// population. Shape `d` is already standard and keeps its exact form.
fn standardized_shapes(spec: &GridSpec) -> Result<HashMap<String, DistSpec>> {
    let mut names: Vec<String> = Vec::new();
    let mut note = |n: &str| {
        if !names.iter().any(|have| have == n) {
            names.push(n.to_string());
        }
    };
    for (f0, f1) in &spec.pairs {
        note(f0);
        note(f1);
    }
    for combo in &spec.combos {
        for (f0, f1) in combo {
            note(f0);
            note(f1);
        }
    }
    let standardized: Vec<(String, DistSpec)> = names
        .into_par_iter()
        .map(|name| -> Result<(String, DistSpec)> {
            let base = shape_by_name(&name)?;
            let shape = if name == "d" { base } else { base.standardize(STANDARDIZE_SEED)? };
            Ok((name, shape))
        })
        .collect::<Result<_>>()?;
    Ok(standardized.into_iter().collect())
}

fn resolve_one(
    desc: &ConfigDescriptor,
    shapes: &HashMap<String, DistSpec>,
    col_needed: [bool; 2],
) -> Result<ResolvedConfig> {
    match &desc.kind {
        ConfigKind::Single { pair } => {
            let config =
                PairConfig::resolve(shapes[&pair.0], shapes[&pair.1], desc.auc_target, PRIOR_PI)?;
            Ok(ResolvedConfig {
                id: desc.id.clone(),
                auc_target: desc.auc_target,
                rho: None,
                sampler: Sampler::Single(config),
                oracle: PosteriorOracle::single(config),
                marginals: [None, None],
            })
        }
        ConfigKind::TruncExp => {
            let config = PairConfig::resolve_trunc_exp(desc.auc_target, PRIOR_PI)?;
            Ok(ResolvedConfig {
                id: desc.id.clone(),
                auc_target: desc.auc_target,
                rho: None,
                sampler: Sampler::Single(config),
                oracle: PosteriorOracle::single(config),
                marginals: [None, None],
            })
        }
        ConfigKind::Multi { combo, rho } => {
            let pairs = [
                (shapes[&combo[0].0], shapes[&combo[0].1]),
                (shapes[&combo[1].0], shapes[&combo[1].1]),
            ];
            let config = MultiConfig::resolve(pairs, desc.auc_target, *rho, PRIOR_PI)?;
            let mut marginals = [None, None];
            for (j, slot) in marginals.iter_mut().enumerate() {
                if col_needed[j] {
                    *slot = Some(channel_marginal(&config, j)?);
                }
            }
            Ok(ResolvedConfig {
                id: desc.id.clone(),
                auc_target: desc.auc_target,
                rho: Some(*rho),
                sampler: Sampler::Multi(config),
                oracle: PosteriorOracle::multi(config),
                marginals,
            })
        }
    }
}

/// Training/evaluation material for one input channel of one trial.
enum ChannelData {
    Ready {
        train: LabeledScoreSet,
        test: LabeledScoreSet,
        truth_sub: Vec<f64>,
        truth_ind: Vec<f64>,
    },
    Failed(CalibError),
}

fn full_channel(
    config: &ResolvedConfig,
    train: &LabeledScoreSet,
    test: &LabeledScoreSet,
) -> ChannelData {
    let truth = config
        .oracle
        .posterior_batch(train.matrix())
        .and_then(|sub| Ok((sub, config.oracle.posterior_batch(test.matrix())?)));
    match truth {
        Ok((truth_sub, truth_ind)) => ChannelData::Ready {
            train: train.clone(),
            test: test.clone(),
            truth_sub,
            truth_ind,
        },
        Err(e) => ChannelData::Failed(e),
    }
}

fn column_channel(
    config: &ResolvedConfig,
    train: &LabeledScoreSet,
    test: &LabeledScoreSet,
    j: usize,
) -> ChannelData {
    let marginal = match &config.marginals[j] {
        Some(m) => m,
        None => {
            return ChannelData::Failed(CalibError::Domain(format!(
                "no marginal reference resolved for column {j}"
            )))
        }
    };
    let build = || -> Result<ChannelData> {
        let train_j = train.select_column(j)?;
        let test_j = test.select_column(j)?;
        let truth_sub = marginal.posterior_batch(train_j.matrix())?;
        let truth_ind = marginal.posterior_batch(test_j.matrix())?;
        Ok(ChannelData::Ready { train: train_j, test: test_j, truth_sub, truth_ind })
    };
    build().unwrap_or_else(ChannelData::Failed)
}

fn run_trial(
    spec: &GridSpec,
    cell: &CellSpec,
    config: &ResolvedConfig,
    trial: usize,
) -> Result<Vec<EvalRecord>> {
    let seed = derive_trial_seed(spec.master_seed, cell.index as u64, trial as u64);
    let mut stream = UniformStream::new(seed);
    let (n0, n1) = class_split(cell.n);
    let (t0, t1) = class_split(spec.ind_test_size);
    let (train, test) = match &config.sampler {
        Sampler::Single(pc) => (
            sample_pair_with(pc, n0, n1, &mut stream)?,
            sample_pair_with(pc, t0, t1, &mut stream)?,
        ),
        Sampler::Multi(mc) => (
            sample_correlated_pair_with(mc, n0, n1, &mut stream)?,
            sample_correlated_pair_with(mc, t0, t1, &mut stream)?,
        ),
    };

    // Shared per-channel material, built once for however many calibrators
    // use the channel.
    let mut channels: [Option<ChannelData>; 3] = [None, None, None];
    let channel_slot = |c: InputChannel| match c {
        InputChannel::Full => 0usize,
        InputChannel::Col(j) => j + 1,
    };
    for spec_c in &spec.calibrators {
        let slot = channel_slot(spec_c.channel);
        if channels[slot].is_none() {
            channels[slot] = Some(match spec_c.channel {
                InputChannel::Full => full_channel(config, &train, &test),
                InputChannel::Col(j) => column_channel(config, &train, &test, j),
            });
        }
    }

    let mut records = Vec::with_capacity(spec.calibrators.len());
    for spec_c in &spec.calibrators {
        let data = channels[channel_slot(spec_c.channel)].as_ref().unwrap();
        let builder = match data {
            ChannelData::Failed(e) => EvalRecord::from_failure(e),
            ChannelData::Ready { train, test, truth_sub, truth_ind } => {
                match fit(spec_c.method, train).and_then(|model| {
                    trial_metrics(&model, train, test, Some(truth_sub), Some(truth_ind))
                }) {
                    Ok(m) => EvalRecord::from_metrics(&m),
                    Err(e) => EvalRecord::from_failure(&e),
                }
            }
        };
        records.push(builder.tag(
            &config.id,
            &spec_c.id(),
            config.auc_target,
            config.rho,
            cell.n,
            trial,
        ));
    }
    Ok(records)
}

fn run_inner(spec: &GridSpec) -> Result<RunResult> {
    let descriptors = enumerate_configs(spec);
    let col_needed = [
        spec.calibrators.iter().any(|c| c.channel == InputChannel::Col(0)),
        spec.calibrators.iter().any(|c| c.channel == InputChannel::Col(1)),
    ];
    let shapes = standardized_shapes(spec)?;
    let resolved: Vec<ResolvedConfig> = descriptors
        .par_iter()
        .map(|d| resolve_one(d, &shapes, col_needed))
        .collect::<Result<_>>()?;

    let mut cells = Vec::with_capacity(resolved.len() * spec.n_values.len());
    for (config_index, rc) in resolved.iter().enumerate() {
        for &n in &spec.n_values {
            cells.push(CellSpec {
                index: cells.len(),
                config_index,
                config_id: rc.id.clone(),
                auc_target: rc.auc_target,
                rho: rc.rho,
                n,
            });
        }
    }

    let jobs: Vec<(usize, usize)> = cells
        .iter()
        .flat_map(|c| (0..spec.trials).map(move |t| (c.index, t)))
        .collect();
    let nested: Vec<Vec<EvalRecord>> = jobs
        .par_iter()
        .map(|&(ci, trial)| run_trial(spec, &cells[ci], &resolved[cells[ci].config_index], trial))
        .collect::<Result<_>>()?;
    let records: Vec<EvalRecord> = nested.into_iter().flatten().collect();

    let aggregates = aggregate(&records);
    let ranking = rank_configs_by_mean_rmse(&aggregates)?;
    let comparison = match spec.mode {
        GridMode::Multi => Some(compare_multi_vs_single(&records)?),
        _ => None,
    };
    Ok(RunResult { spec: spec.clone(), cells, records, aggregates, ranking, comparison })
}

/// Validate and execute a grid. A nonzero `threads` runs everything inside
/// a dedicated pool of that size; results are identical either way, only
/// wall time changes.
pub fn run_grid(spec: &GridSpec) -> Result<RunResult> {
    spec.validate()?;
    if spec.threads == 0 {
        run_inner(spec)
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(spec.threads)
            .build()
            .map_err(|e| CalibError::Config(format!("cannot build thread pool: {e}")))?;
        pool.install(|| run_inner(spec))
    }
}

/// [`run_grid`] restricted to single-score grids.
pub fn run_single_score_grid(spec: &GridSpec) -> Result<RunResult> {
    expect_mode(spec, GridMode::Single)?;
    run_grid(spec)
}

/// [`run_grid`] restricted to two-score grids.
pub fn run_multi_score_grid(spec: &GridSpec) -> Result<RunResult> {
    expect_mode(spec, GridMode::Multi)?;
    run_grid(spec)
}

/// [`run_grid`] restricted to the truncated-exponential study.
pub fn run_truncexp_study(spec: &GridSpec) -> Result<RunResult> {
    expect_mode(spec, GridMode::TruncExp)?;
    run_grid(spec)
}

fn expect_mode(spec: &GridSpec, mode: GridMode) -> Result<()> {
    if spec.mode != mode {
        return Err(CalibError::Config(format!(
            "grid mode {:?} does not match the requested entry point {mode:?}",
            spec.mode
        )));
    }
    Ok(())
}
