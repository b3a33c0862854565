use rayon::prelude::*;

use super::config::ExperimentSpec;
use super::stats::{aggregate_stats, rank_sum_pvalue};
use crate::error::Error;
use crate::objective::FunctionId;
use crate::optimizers::{run, Algorithm, OptimizerConfig, RunRecord};
use crate::rng::run_seed;

/// The algorithm every other configuration is compared against in the `p_value` column.
pub const REFERENCE_ALGORITHM: Algorithm = Algorithm::Dsdpso;

/// Aggregated results of one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct StatRow {
    pub name: String,
    pub algo: Algorithm,
    pub function: FunctionId,
    pub dim: usize,
    /// Successful runs.
    pub runs: usize,
    pub mean: f64,
    pub std_dev: f64,
    /// `None` for the reference algorithm itself, or when no comparable reference exists.
    pub p_value: Option<f64>,
}

#[derive(Debug)]
pub struct RunFailure {
    pub experiment: String,
    pub run: usize,
    pub error: Error,
}

/// Runs of one configuration, ordered by run index.
#[derive(Debug)]
pub struct ConfigResult {
    pub name: String,
    pub config: OptimizerConfig,
    pub runs: Vec<(usize, RunRecord)>,
}

impl ConfigResult {
    pub fn finals(&self) -> Vec<f64> {
        self.runs.iter().map(|(_, r)| r.final_best).collect()
    }
}

#[derive(Debug)]
pub struct ExperimentOutcome {
    pub results: Vec<ConfigResult>,
    pub stats: Vec<StatRow>,
    pub failures: Vec<RunFailure>,
}

/// Seed used by run `run` of every configuration, so all algorithms start from the
/// same population in the same run.
pub fn seed_for_run(master_seed: u64, run: usize) -> u64 {
    run_seed(master_seed, run as u64)
}

/// Executes `spec.runs` runs of every configuration (in parallel) and aggregates them.
///
/// A failing run is recorded in `failures` and does not stop the others.
pub fn run_experiment(spec: &ExperimentSpec) -> ExperimentOutcome {
    let jobs: Vec<(usize, usize)> = (0..spec.experiments.len())
        .flat_map(|e| (0..spec.runs).map(move |r| (e, r)))
        .collect();
    let outputs: Vec<_> = jobs
        .par_iter()
        .map(|&(e, r)| {
            let mut cfg = spec.experiments[e].config.clone();
            cfg.seed = seed_for_run(spec.master_seed, r);
            (e, r, run(&cfg))
        })
        .collect();

    let mut results: Vec<ConfigResult> = spec
        .experiments
        .iter()
        .map(|e| ConfigResult {
            name: e.name.clone(),
            config: e.config.clone(),
            runs: Vec::new(),
        })
        .collect();
    let mut failures = Vec::new();
    for (e, r, out) in outputs {
        match out {
            Ok(record) => results[e].runs.push((r, record)),
            Err(error) => failures.push(RunFailure {
                experiment: spec.experiments[e].name.clone(),
                run: r,
                error,
            }),
        }
    }
    let stats = summarize(&results);
    ExperimentOutcome {
        results,
        stats,
        failures,
    }
}

/// One row per configuration with at least one successful run, sorted by
/// (algo, function, dim) and then by position in the config file.
pub fn summarize(results: &[ConfigResult]) -> Vec<StatRow> {
    let mut rows: Vec<(usize, StatRow)> = Vec::new();
    for (idx, res) in results.iter().enumerate() {
        let finals = res.finals();
        let Ok((mean, std_dev)) = aggregate_stats(&finals) else {
            continue;
        };
        let p_value = if res.config.algo == REFERENCE_ALGORITHM {
            None
        } else {
            results
                .iter()
                .find(|other| {
                    other.config.algo == REFERENCE_ALGORITHM
                        && other.config.function == res.config.function
                        && other.config.dim == res.config.dim
                })
                .and_then(|reference| rank_sum_pvalue(&finals, &reference.finals()).ok())
        };
        rows.push((
            idx,
            StatRow {
                name: res.name.clone(),
                algo: res.config.algo,
                function: res.config.function,
                dim: res.config.dim,
                runs: finals.len(),
                mean,
                std_dev,
                p_value,
            },
        ));
    }
    rows.sort_by(|(i, a), (j, b)| {
        (a.algo, a.function.number(), a.dim, i).cmp(&(b.algo, b.function.number(), b.dim, j))
    });
    rows.into_iter().map(|(_, row)| row).collect()
}
