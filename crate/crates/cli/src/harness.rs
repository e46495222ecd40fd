//! Replicated experiment runs: one simulated dataset per replicate, the
//! chosen estimators on each, CSV rendering with a summary block.

use std::time::{Duration, Instant};

use crossings_core::crossing_count::GridCount;
use crossings_core::density_estimation::quantile;
use crossings_core::estimators::{
    kr_nonstationary, kr_stationary, monte_carlo, CrossingEstimate, KrConfig, SpeedProjection,
};
use crossings_core::psp_sim::{simulate_dataset, GridTrajectory, ProcessModel};
use crossings_core::surfaces::{QuadratureNodes, Surface};
use crossings_core::Result;
use rayon::prelude::*;

use crate::config::{EstimatorChoice, ExperimentConfig};

/// First line of every experiment CSV; golden tests pin it.
pub const SCHEMA_LINE: &str = "# crossings experiment schema v1";

/// One estimator outcome within a replicate. Failures are recorded as
/// messages so a bad replicate does not abort the sweep.
#[derive(Debug, Clone)]
pub struct EstimatorValue {
    pub estimator: EstimatorChoice,
    pub outcome: std::result::Result<CrossingEstimate, String>,
}

/// All estimator values of one replicate.
#[derive(Debug, Clone)]
pub struct ReplicateResult {
    pub replicate: u32,
    pub seed: u64,
    pub values: Vec<EstimatorValue>,
    /// Wall time of the replicate; reported on stderr, never written into
    /// the CSV, so equal configs render byte-identical output.
    pub wall_time: Duration,
}

/// Distribution summary of one estimator over its successful replicates.
#[derive(Debug, Clone)]
pub struct EstimatorSummary {
    pub estimator: EstimatorChoice,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub q1: Option<f64>,
    pub median: Option<f64>,
    pub q3: Option<f64>,
    pub n_ok: usize,
    pub n_failed: usize,
}

/// Everything an experiment run produces.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub results: Vec<ReplicateResult>,
    pub summaries: Vec<EstimatorSummary>,
}

/// Runs every replicate in the work-stealing pool. Replicate r draws its
/// trajectories from streams keyed by (base_seed, r), so results do not
/// depend on scheduling and come back in replicate order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let results = match config.surface.build()? {
        Surface::Level(level) => {
            run_replicates(&config.process.build_line()?, &level, &level, config)
        }
        Surface::Segment(segment) => {
            run_replicates(&config.process.build_plane()?, &segment, &segment, config)
        }
        Surface::Polyline(polyline) => {
            run_replicates(&config.process.build_plane()?, &polyline, &polyline, config)
        }
    };
    let summaries = summarize(&results, &config.estimators);
    Ok(ExperimentOutput { results, summaries })
}

fn run_replicates<const D: usize>(
    model: &ProcessModel<D>,
    counter: &(impl GridCount<D> + Sync + ?Sized),
    nodes: &(impl QuadratureNodes<D> + Sync + ?Sized),
    config: &ExperimentConfig,
) -> Vec<ReplicateResult> {
    let sp = SpeedProjection::from_model(model);
    let kr = KrConfig {
        bandwidth: config.bandwidth,
        time_quadrature: config.time_quadrature,
        surface_step: config.surface_step,
    };
    (0..config.replicates as u32)
        .into_par_iter()
        .map(|replicate| {
            let start = Instant::now();
            let dataset = simulate_dataset(
                model,
                config.horizon,
                config.n_points,
                config.n_trajectories,
                config.base_seed,
                replicate,
            );
            let values = config
                .estimators
                .iter()
                .map(|&estimator| {
                    let outcome = match &dataset {
                        Ok(dataset) => run_estimator(estimator, dataset, counter, nodes, &sp, &kr)
                            .map_err(|err| err.to_string()),
                        Err(err) => Err(err.to_string()),
                    };
                    EstimatorValue { estimator, outcome }
                })
                .collect();
            ReplicateResult {
                replicate,
                seed: config.base_seed,
                values,
                wall_time: start.elapsed(),
            }
        })
        .collect()
}

fn run_estimator<const D: usize>(
    which: EstimatorChoice,
    dataset: &[GridTrajectory<D>],
    counter: &(impl GridCount<D> + ?Sized),
    nodes: &(impl QuadratureNodes<D> + ?Sized),
    sp: &SpeedProjection<D>,
    kr: &KrConfig,
) -> Result<CrossingEstimate> {
    match which {
        EstimatorChoice::Mc => monte_carlo(dataset, counter),
        EstimatorChoice::KrNs => kr_nonstationary(dataset, nodes, sp, kr),
        EstimatorChoice::KrS => kr_stationary(dataset, nodes, sp, kr).map(|(_, mean)| mean),
    }
}

fn summarize(results: &[ReplicateResult], estimators: &[EstimatorChoice]) -> Vec<EstimatorSummary> {
    estimators
        .iter()
        .map(|&estimator| {
            let outcomes = results
                .iter()
                .flat_map(|r| &r.values)
                .filter(|v| v.estimator == estimator);
            let mut values = Vec::new();
            let mut n_failed = 0;
            for outcome in outcomes {
                match &outcome.outcome {
                    Ok(estimate) => values.push(estimate.value),
                    Err(_) => n_failed += 1,
                }
            }
            let n_ok = values.len();
            let mean = (n_ok > 0).then(|| values.iter().sum::<f64>() / n_ok as f64);
            let sd = (n_ok > 1).then(|| {
                let m = mean.expect("nonempty");
                (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n_ok - 1) as f64).sqrt()
            });
            values.sort_by(f64::total_cmp);
            let q = |p: f64| (n_ok > 0).then(|| quantile(&values, p));
            EstimatorSummary {
                estimator,
                mean,
                sd,
                q1: q(0.25),
                median: q(0.5),
                q3: q(0.75),
                n_ok,
                n_failed,
            }
        })
        .collect()
}

fn csv_block(write_rows: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<()>) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    write_rows(&mut writer)?;
    let bytes = writer.into_inner().expect("in-memory writer cannot fail");
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Renders the schema line, one row per (replicate, estimator), and the
/// summary block. Optional fields render as empty cells.
pub fn render_csv(output: &ExperimentOutput) -> Result<String> {
    let cell = |value: Option<f64>| value.map(|v| v.to_string()).unwrap_or_default();
    let mut text = String::from(SCHEMA_LINE);
    text.push('\n');
    text.push_str(&csv_block(|writer| {
        writer.write_record([
            "replicate",
            "seed",
            "estimator",
            "value",
            "std_error",
            "error",
        ])?;
        for result in &output.results {
            for v in &result.values {
                let (value, std_error, error) = match &v.outcome {
                    Ok(estimate) => (
                        estimate.value.to_string(),
                        cell(estimate.meta.standard_error),
                        String::new(),
                    ),
                    Err(message) => (String::new(), String::new(), message.clone()),
                };
                writer.write_record([
                    result.replicate.to_string(),
                    result.seed.to_string(),
                    v.estimator.as_str().to_string(),
                    value,
                    std_error,
                    error,
                ])?;
            }
        }
        Ok(())
    })?);
    text.push_str("# summary\n");
    text.push_str(&csv_block(|writer| {
        writer.write_record([
            "estimator",
            "mean",
            "sd",
            "q1",
            "median",
            "q3",
            "n_ok",
            "n_failed",
        ])?;
        for s in &output.summaries {
            writer.write_record([
                s.estimator.as_str().to_string(),
                cell(s.mean),
                cell(s.sd),
                cell(s.q1),
                cell(s.median),
                cell(s.q3),
                s.n_ok.to_string(),
                s.n_failed.to_string(),
            ])?;
        }
        Ok(())
    })?);
    Ok(text)
}
