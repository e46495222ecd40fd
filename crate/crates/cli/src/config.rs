//! Experiment configuration: merged from an optional JSON file and flag
//! overrides, where flags win, then validated into a runnable form.

use std::path::{Path, PathBuf};

use crossings_core::density_estimation::BandwidthMethod;
use crossings_core::estimators::TimeQuadrature;
use crossings_core::psp_sim::{
    double_well_potential, pdsa, telegraph1d, telegraph2d, ProcessModel,
};
use crossings_core::surfaces::SurfaceSpec;
use crossings_core::{Error, Result};
use serde::{Deserialize, Serialize};

fn default_rate_slow() -> f64 {
    1.0
}

fn default_rate_fast() -> f64 {
    2.0
}

fn default_beta() -> f64 {
    7.0
}

/// Process identifier with its parameters, as written in config files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum ProcessSpec {
    /// Telegraph process on the line, switching rates 0 < a < b.
    #[serde(alias = "telegraph1d")]
    Telegraph {
        #[serde(default = "default_rate_slow")]
        a: f64,
        #[serde(default = "default_rate_fast")]
        b: f64,
    },
    /// Planar telegraph process with cardinal unit velocities.
    Telegraph2d {
        #[serde(default = "default_rate_slow")]
        a: f64,
        #[serde(default = "default_rate_fast")]
        b: f64,
    },
    /// Switching sampler of the double-well Gibbs law at inverse
    /// temperature beta.
    Pdsa {
        #[serde(default = "default_beta")]
        beta: f64,
    },
}

/// Process identifiers accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ProcessKind {
    #[value(alias = "telegraph1d")]
    Telegraph,
    Telegraph2d,
    Pdsa,
}

impl ProcessSpec {
    pub fn id(&self) -> &'static str {
        match self {
            ProcessSpec::Telegraph { .. } => "telegraph",
            ProcessSpec::Telegraph2d { .. } => "telegraph2d",
            ProcessSpec::Pdsa { .. } => "pdsa",
        }
    }

    /// State dimension of the process.
    pub fn dim(&self) -> usize {
        match self {
            ProcessSpec::Telegraph2d { .. } => 2,
            _ => 1,
        }
    }

    pub fn build_line(&self) -> Result<ProcessModel<1>> {
        match *self {
            ProcessSpec::Telegraph { a, b } => telegraph1d(a, b),
            ProcessSpec::Pdsa { beta } => pdsa(beta, double_well_potential()),
            ProcessSpec::Telegraph2d { .. } => Err(Error::InvalidParameter(
                "telegraph2d is planar; pair it with a planar surface".into(),
            )),
        }
    }

    pub fn build_plane(&self) -> Result<ProcessModel<2>> {
        match *self {
            ProcessSpec::Telegraph2d { a, b } => telegraph2d(a, b),
            _ => Err(Error::InvalidParameter(format!(
                "{} lives on the line; pair it with a level surface",
                self.id()
            ))),
        }
    }

    /// Validates the parameters by constructing the model once.
    pub fn check(&self) -> Result<()> {
        match self.dim() {
            1 => self.build_line().map(|_| ()),
            _ => self.build_plane().map(|_| ()),
        }
    }
}

/// Applies process parameter flags on top of an optional config-file
/// process. A `--process` flag switches the id and keeps the file's
/// parameters only when the id is unchanged; bare parameter flags modify
/// the file's process in place.
pub fn merge_process(
    file: Option<ProcessSpec>,
    kind: Option<ProcessKind>,
    a: Option<f64>,
    b: Option<f64>,
    beta: Option<f64>,
) -> Result<Option<ProcessSpec>> {
    let id = match kind {
        Some(ProcessKind::Telegraph) => Some("telegraph"),
        Some(ProcessKind::Telegraph2d) => Some("telegraph2d"),
        Some(ProcessKind::Pdsa) => Some("pdsa"),
        None => file.as_ref().map(|spec| spec.id()),
    };
    let Some(id) = id else {
        if a.is_some() || b.is_some() || beta.is_some() {
            return Err(Error::InvalidParameter(
                "process parameter flags need --process or a config-file process".into(),
            ));
        }
        return Ok(None);
    };
    let base = file.filter(|spec| spec.id() == id);
    let spec = match id {
        "pdsa" => {
            if a.is_some() || b.is_some() {
                return Err(Error::InvalidParameter(
                    "pdsa takes --beta, not --a or --b".into(),
                ));
            }
            let file_beta = match base {
                Some(ProcessSpec::Pdsa { beta }) => beta,
                _ => default_beta(),
            };
            ProcessSpec::Pdsa {
                beta: beta.unwrap_or(file_beta),
            }
        }
        _ => {
            if beta.is_some() {
                return Err(Error::InvalidParameter(format!(
                    "{id} takes --a and --b, not --beta"
                )));
            }
            let (file_a, file_b) = match base {
                Some(ProcessSpec::Telegraph { a, b }) | Some(ProcessSpec::Telegraph2d { a, b }) => {
                    (a, b)
                }
                _ => (default_rate_slow(), default_rate_fast()),
            };
            let a = a.unwrap_or(file_a);
            let b = b.unwrap_or(file_b);
            if id == "telegraph" {
                ProcessSpec::Telegraph { a, b }
            } else {
                ProcessSpec::Telegraph2d { a, b }
            }
        }
    };
    Ok(Some(spec))
}

/// Estimator selector, spelled the same way in configs, flags, and CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorChoice {
    /// Mean grid-chord crossing count.
    #[value(name = "mc")]
    Mc,
    /// Non-stationary kernel plug-in.
    #[value(name = "kr_ns")]
    KrNs,
    /// Stationary kernel plug-in.
    #[value(name = "kr_s")]
    KrS,
}

impl EstimatorChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorChoice::Mc => "mc",
            EstimatorChoice::KrNs => "kr_ns",
            EstimatorChoice::KrS => "kr_s",
        }
    }
}

/// State dimension a surface lives in.
pub fn surface_dim(spec: &SurfaceSpec) -> usize {
    match spec {
        SurfaceSpec::Level { .. } => 1,
        _ => 2,
    }
}

/// Experiment fields before validation; every field optional so a config
/// file and flags can each fill part. Unknown fields in the file are
/// rejected by name.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub process: Option<ProcessSpec>,
    pub surface: Option<SurfaceSpec>,
    pub horizon: Option<f64>,
    pub step: Option<f64>,
    pub n_points: Option<usize>,
    pub n_trajectories: Option<usize>,
    pub replicates: Option<usize>,
    pub estimators: Option<Vec<EstimatorChoice>>,
    pub bandwidth: Option<BandwidthMethod>,
    pub surface_step: Option<f64>,
    pub time_quadrature: Option<TimeQuadrature>,
    pub base_seed: Option<u64>,
    pub output: Option<PathBuf>,
}

impl PartialConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|err| Error::Data(format!("{}: {err}", path.display())))?;
        serde_json::from_str(&text).map_err(|err| Error::Data(format!("{}: {err}", path.display())))
    }

    /// Fills defaults and validates into a runnable configuration.
    pub fn resolve(self) -> Result<ExperimentConfig> {
        let missing =
            |field: &str| Error::InvalidParameter(format!("missing config field `{field}`"));
        let process = self.process.ok_or_else(|| missing("process"))?;
        let surface = self.surface.ok_or_else(|| missing("surface"))?;
        if process.dim() != surface_dim(&surface) {
            return Err(Error::InvalidParameter(format!(
                "process {} is {}-dimensional but the surface is {}-dimensional",
                process.id(),
                process.dim(),
                surface_dim(&surface)
            )));
        }
        process.check()?;
        let horizon = self.horizon.ok_or_else(|| missing("horizon"))?;
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        let (n_points, _step) = resolve_grid(horizon, self.step, self.n_points)?;
        let n_trajectories = self
            .n_trajectories
            .ok_or_else(|| missing("n_trajectories"))?;
        if n_trajectories == 0 {
            return Err(Error::InvalidParameter(
                "n_trajectories must be at least 1".into(),
            ));
        }
        let replicates = self.replicates.unwrap_or(1);
        if replicates == 0 {
            return Err(Error::InvalidParameter(
                "replicates must be at least 1".into(),
            ));
        }
        let estimators = self.estimators.unwrap_or_else(|| {
            vec![
                EstimatorChoice::Mc,
                EstimatorChoice::KrNs,
                EstimatorChoice::KrS,
            ]
        });
        if estimators.is_empty() {
            return Err(Error::InvalidParameter(
                "estimators must name at least one estimator".into(),
            ));
        }
        let surface_step = self.surface_step.unwrap_or(0.1);
        if !(surface_step.is_finite() && surface_step > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "surface_step must be positive, got {surface_step}"
            )));
        }
        Ok(ExperimentConfig {
            process,
            surface,
            horizon,
            n_points,
            n_trajectories,
            replicates,
            estimators,
            bandwidth: self.bandwidth.unwrap_or(BandwidthMethod::NormalReference),
            surface_step,
            time_quadrature: self.time_quadrature.unwrap_or_default(),
            base_seed: self.base_seed.unwrap_or(424242),
            output: self.output,
        })
    }
}

/// Resolves the grid pair: either field determines the other, and when
/// both are given they must satisfy step * (n_points - 1) = horizon
/// within 1e-9.
pub fn resolve_grid(
    horizon: f64,
    step: Option<f64>,
    n_points: Option<usize>,
) -> Result<(usize, f64)> {
    const TOL: f64 = 1e-9;
    match (step, n_points) {
        (None, None) => Err(Error::InvalidParameter(
            "one of `step` and `n_points` is required".into(),
        )),
        (None, Some(m)) => {
            if m < 2 {
                return Err(Error::InvalidParameter(format!(
                    "n_points must be at least 2, got {m}"
                )));
            }
            Ok((m, horizon / (m - 1) as f64))
        }
        (Some(h), maybe_m) => {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "step must be positive and finite, got {h}"
                )));
            }
            let m = match maybe_m {
                Some(m) => m,
                None => (horizon / h).round() as usize + 1,
            };
            if m < 2 {
                return Err(Error::InvalidParameter(format!(
                    "n_points must be at least 2, got {m}"
                )));
            }
            let implied = h * (m - 1) as f64;
            if (implied - horizon).abs() > TOL {
                let message = if maybe_m.is_some() {
                    format!(
                        "step and n_points disagree: step * (n_points - 1) = {implied} but horizon = {horizon}"
                    )
                } else {
                    format!(
                        "step {h} does not tile the horizon {horizon}; the nearest grid has n_points = {m}"
                    )
                };
                return Err(Error::InvalidParameter(message));
            }
            Ok((m, h))
        }
    }
}

/// A validated experiment: replicated simulation plus the chosen
/// estimators over one process/surface pair.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub process: ProcessSpec,
    pub surface: SurfaceSpec,
    pub horizon: f64,
    pub n_points: usize,
    pub n_trajectories: usize,
    pub replicates: usize,
    pub estimators: Vec<EstimatorChoice>,
    pub bandwidth: BandwidthMethod,
    pub surface_step: f64,
    pub time_quadrature: TimeQuadrature,
    pub base_seed: u64,
    pub output: Option<PathBuf>,
}
