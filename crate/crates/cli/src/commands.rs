//! The simulate, estimate, experiment, and oracle subcommands, plus the
//! flag groups they share.

use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use crossings_core::crossing_count::GridCount;
use crossings_core::density_estimation::BandwidthMethod;
use crossings_core::estimators::{
    exact_oracle, kr_nonstationary, kr_stationary, monte_carlo, CrossingEstimate, KrConfig,
    SpeedProjection, TimeQuadrature,
};
use crossings_core::psp_sim::{
    read_grid_csv, simulate_dataset, write_grid_csv, GridTrajectory, ProcessModel,
};
use crossings_core::surfaces::{QuadratureNodes, Surface, SurfaceSpec};

use crate::config::{self, EstimatorChoice, PartialConfig, ProcessKind, ProcessSpec};
use crate::{data_error, harness, Failure};

/// Process selection shared by the simulation-backed subcommands.
#[derive(Debug, clap::Args)]
pub struct ProcessArgs {
    /// Process to simulate.
    #[arg(long, value_enum)]
    pub process: Option<ProcessKind>,
    /// Slow switching rate of the telegraph processes.
    #[arg(long)]
    pub a: Option<f64>,
    /// Fast switching rate of the telegraph processes.
    #[arg(long)]
    pub b: Option<f64>,
    /// Inverse temperature of the double-well switching process.
    #[arg(long)]
    pub beta: Option<f64>,
}

impl ProcessArgs {
    fn spec(&self) -> Result<Option<ProcessSpec>, Failure> {
        Ok(config::merge_process(
            None,
            self.process,
            self.a,
            self.b,
            self.beta,
        )?)
    }

    fn require(&self) -> Result<ProcessSpec, Failure> {
        self.spec()?
            .ok_or_else(|| Failure::Usage("--process is required".into()))
    }
}

/// Crossing surface shared by the estimator subcommands; exactly one flag
/// selects it.
#[derive(Debug, clap::Args)]
#[group(multiple = false)]
pub struct SurfaceArgs {
    /// Level to cross, for processes on the line.
    #[arg(long, value_name = "X", allow_negative_numbers = true)]
    pub level: Option<f64>,
    /// Planar segment to cross.
    #[arg(long, value_name = "AX,AY,BX,BY", value_parser = parse_segment, allow_hyphen_values = true)]
    pub segment: Option<([f64; 2], [f64; 2])>,
    /// Axis-aligned square with vertices (+-c, +-c).
    #[arg(long, value_name = "C")]
    pub square: Option<f64>,
}

impl SurfaceArgs {
    fn spec(&self) -> Option<SurfaceSpec> {
        // The clap group guarantees at most one flag is set.
        if let Some(x) = self.level {
            Some(SurfaceSpec::Level { x })
        } else if let Some((a, b)) = self.segment {
            Some(SurfaceSpec::Segment { a, b })
        } else {
            self.square.map(|c| SurfaceSpec::Square { c })
        }
    }

    fn require(&self) -> Result<SurfaceSpec, Failure> {
        self.spec()
            .ok_or_else(|| Failure::Usage("one of --level, --segment, --square is required".into()))
    }
}

/// Bandwidth rules selectable on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BandwidthArg {
    /// Rule of thumb for one-dimensional data.
    #[value(name = "silverman1d")]
    Silverman1d,
    /// Normal-reference rule scaled to the sample covariance.
    #[value(name = "normal_reference")]
    NormalReference,
}

impl From<BandwidthArg> for BandwidthMethod {
    fn from(arg: BandwidthArg) -> Self {
        match arg {
            BandwidthArg::Silverman1d => BandwidthMethod::Silverman1d,
            BandwidthArg::NormalReference => BandwidthMethod::NormalReference,
        }
    }
}

/// Time rules of the non-stationary estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum TimeQuadratureArg {
    Rectangle,
    Trapezoid,
}

impl From<TimeQuadratureArg> for TimeQuadrature {
    fn from(arg: TimeQuadratureArg) -> Self {
        match arg {
            TimeQuadratureArg::Rectangle => TimeQuadrature::Rectangle,
            TimeQuadratureArg::Trapezoid => TimeQuadrature::Trapezoid,
        }
    }
}

pub fn parse_f64_list<const N: usize>(text: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated numbers"));
    }
    let mut out = [0.0; N];
    for (slot, part) in out.iter_mut().zip(parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|err| format!("{part:?}: {err}"))?;
    }
    Ok(out)
}

pub fn parse_segment(text: &str) -> Result<([f64; 2], [f64; 2]), String> {
    let v: [f64; 4] = parse_f64_list(text)?;
    Ok(([v[0], v[1]], [v[2], v[3]]))
}

pub fn parse_point(text: &str) -> Result<[f64; 2], String> {
    parse_f64_list::<2>(text)
}

fn print_json(estimate: &CrossingEstimate) {
    println!(
        "{}",
        serde_json::to_string_pretty(estimate).expect("estimates serialize")
    );
}

/// Arguments of `crossings simulate`.
#[derive(Debug, clap::Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub process: ProcessArgs,
    /// Time horizon.
    #[arg(long = "H", visible_alias = "horizon")]
    pub horizon: f64,
    /// Grid step h; h * (n_points - 1) must equal the horizon.
    #[arg(long)]
    pub step: Option<f64>,
    /// Grid points per trajectory, both endpoints included.
    #[arg(long)]
    pub n_points: Option<usize>,
    /// Trajectories to simulate.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Base seed of the RNG streams.
    #[arg(long, default_value_t = 424242)]
    pub seed: u64,
    /// Replicate index of the RNG streams.
    #[arg(long, default_value_t = 0)]
    pub replicate: u32,
    /// Directory receiving traj_NNNN.csv files.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out_dir: PathBuf,
}

pub fn run_simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let spec = args.process.require()?;
    let (n_points, _) = config::resolve_grid(args.horizon, args.step, args.n_points)?;
    if args.n == 0 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    std::fs::create_dir_all(&args.out_dir).map_err(|err| data_error(&args.out_dir, err))?;
    match spec.dim() {
        1 => write_trajectories(&spec.build_line()?, args, n_points),
        _ => write_trajectories(&spec.build_plane()?, args, n_points),
    }
}

fn write_trajectories<const D: usize>(
    model: &ProcessModel<D>,
    args: &SimulateArgs,
    n_points: usize,
) -> Result<(), Failure> {
    let dataset = simulate_dataset(
        model,
        args.horizon,
        n_points,
        args.n,
        args.seed,
        args.replicate,
    )?;
    for (i, trajectory) in dataset.iter().enumerate() {
        let path = args.out_dir.join(format!("traj_{i:04}.csv"));
        let mut file = File::create(&path).map_err(|err| data_error(&path, err))?;
        write_grid_csv(trajectory, &mut file)?;
    }
    eprintln!(
        "wrote {} trajectories to {}",
        dataset.len(),
        args.out_dir.display()
    );
    Ok(())
}

/// Arguments of `crossings estimate`.
#[derive(Debug, clap::Args)]
pub struct EstimateArgs {
    /// Estimator to run.
    #[arg(long, value_enum)]
    pub method: EstimatorChoice,
    #[command(flatten)]
    pub surface: SurfaceArgs,
    /// Process whose mode velocities feed the plug-in speed projection
    /// (the kr methods need it; mc does not).
    #[command(flatten)]
    pub process: ProcessArgs,
    /// Bandwidth rule of the plug-in estimators.
    #[arg(long, value_enum, default_value_t = BandwidthArg::NormalReference)]
    pub bandwidth: BandwidthArg,
    /// Line quadrature step on planar surfaces.
    #[arg(long, default_value_t = 0.1)]
    pub surface_step: f64,
    /// Time rule of the non-stationary estimator.
    #[arg(long, value_enum, default_value_t = TimeQuadratureArg::Rectangle)]
    pub time_quadrature: TimeQuadratureArg,
    /// Trajectory CSV files on a common grid.
    #[arg(required = true, value_name = "CSV")]
    pub inputs: Vec<PathBuf>,
}

fn load_dataset<const D: usize>(paths: &[PathBuf]) -> Result<Vec<GridTrajectory<D>>, Failure> {
    paths
        .iter()
        .map(|path| {
            let file = File::open(path).map_err(|err| data_error(path, err))?;
            read_grid_csv(file).map_err(|err| data_error(path, err))
        })
        .collect()
}

pub fn run_estimate(args: &EstimateArgs) -> Result<(), Failure> {
    // The kr methods plug a model-derived speed projection into the
    // surface integral; mc only counts chords.
    let spec = match args.method {
        EstimatorChoice::Mc => None,
        _ => Some(args.process.spec()?.ok_or_else(|| {
            Failure::Usage(format!(
                "--method {} needs --process to derive the speed projection",
                args.method.as_str()
            ))
        })?),
    };
    let estimate = match args.surface.require()?.build()? {
        Surface::Level(level) => {
            let model = spec.map(|s| s.build_line()).transpose()?;
            let dataset = load_dataset::<1>(&args.inputs)?;
            estimate_with(args, &dataset, &level, &level, model.as_ref())?
        }
        Surface::Segment(segment) => {
            let model = spec.map(|s| s.build_plane()).transpose()?;
            let dataset = load_dataset::<2>(&args.inputs)?;
            estimate_with(args, &dataset, &segment, &segment, model.as_ref())?
        }
        Surface::Polyline(polyline) => {
            let model = spec.map(|s| s.build_plane()).transpose()?;
            let dataset = load_dataset::<2>(&args.inputs)?;
            estimate_with(args, &dataset, &polyline, &polyline, model.as_ref())?
        }
    };
    print_json(&estimate);
    Ok(())
}

fn estimate_with<const D: usize>(
    args: &EstimateArgs,
    dataset: &[GridTrajectory<D>],
    counter: &(impl GridCount<D> + ?Sized),
    nodes: &(impl QuadratureNodes<D> + ?Sized),
    model: Option<&ProcessModel<D>>,
) -> Result<CrossingEstimate, Failure> {
    match args.method {
        EstimatorChoice::Mc => Ok(monte_carlo(dataset, counter)?),
        EstimatorChoice::KrNs | EstimatorChoice::KrS => {
            let model = model.expect("checked before dispatch");
            let sp = SpeedProjection::from_model(model);
            let kr = KrConfig {
                bandwidth: args.bandwidth.into(),
                time_quadrature: args.time_quadrature.into(),
                surface_step: args.surface_step,
            };
            match args.method {
                EstimatorChoice::KrNs => Ok(kr_nonstationary(dataset, nodes, &sp, &kr)?),
                _ => Ok(kr_stationary(dataset, nodes, &sp, &kr)?.1),
            }
        }
    }
}

/// Arguments of `crossings oracle`.
#[derive(Debug, clap::Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub process: ProcessArgs,
    #[command(flatten)]
    pub surface: SurfaceArgs,
    /// Time horizon.
    #[arg(long = "H", visible_alias = "horizon")]
    pub horizon: f64,
    /// Independent simulations averaged into the reference value.
    #[arg(long, default_value_t = 5000)]
    pub n_ref: usize,
    /// Base seed of the reference streams.
    #[arg(long, default_value_t = 424242)]
    pub seed: u64,
}

pub fn run_oracle(args: &OracleArgs) -> Result<(), Failure> {
    let spec = args.process.require()?;
    let estimate = match args.surface.require()?.build()? {
        Surface::Level(level) => exact_oracle(
            &spec.build_line()?,
            &level,
            args.horizon,
            args.n_ref,
            args.seed,
        ),
        Surface::Segment(segment) => exact_oracle(
            &spec.build_plane()?,
            &segment,
            args.horizon,
            args.n_ref,
            args.seed,
        ),
        Surface::Polyline(polyline) => exact_oracle(
            &spec.build_plane()?,
            &polyline,
            args.horizon,
            args.n_ref,
            args.seed,
        ),
    }?;
    print_json(&estimate);
    Ok(())
}

/// Arguments of `crossings experiment`.
#[derive(Debug, clap::Args)]
pub struct ExperimentArgs {
    /// JSON config file; flags override its fields.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub process: ProcessArgs,
    #[command(flatten)]
    pub surface: SurfaceArgs,
    /// Time horizon.
    #[arg(long = "H", visible_alias = "horizon")]
    pub horizon: Option<f64>,
    /// Grid step h.
    #[arg(long)]
    pub step: Option<f64>,
    /// Grid points per trajectory, both endpoints included.
    #[arg(long)]
    pub n_points: Option<usize>,
    /// Trajectories per replicate.
    #[arg(long)]
    pub n: Option<usize>,
    /// Independent replicates to run.
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Estimators to run, comma-separated.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub estimators: Option<Vec<EstimatorChoice>>,
    /// Bandwidth rule of the plug-in estimators.
    #[arg(long, value_enum)]
    pub bandwidth: Option<BandwidthArg>,
    /// Line quadrature step on planar surfaces.
    #[arg(long)]
    pub surface_step: Option<f64>,
    /// Time rule of the non-stationary estimator.
    #[arg(long, value_enum)]
    pub time_quadrature: Option<TimeQuadratureArg>,
    /// Base seed of the replicate streams.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV path; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Suppress the per-replicate timing report.
    #[arg(long)]
    pub quiet: bool,
}

pub fn run_experiment_cmd(args: &ExperimentArgs) -> Result<(), Failure> {
    let file = match &args.config {
        Some(path) => PartialConfig::load(path)?,
        None => PartialConfig::default(),
    };
    let process = config::merge_process(
        file.process,
        args.process.process,
        args.process.a,
        args.process.b,
        args.process.beta,
    )?;
    // Either grid flag replaces the file's grid pair wholesale, so a step
    // override is not checked against a stale n_points.
    let (step, n_points) = if args.step.is_some() || args.n_points.is_some() {
        (args.step, args.n_points)
    } else {
        (file.step, file.n_points)
    };
    let merged = PartialConfig {
        process,
        surface: args.surface.spec().or(file.surface),
        horizon: args.horizon.or(file.horizon),
        step,
        n_points,
        n_trajectories: args.n.or(file.n_trajectories),
        replicates: args.replicates.or(file.replicates),
        estimators: args.estimators.clone().or(file.estimators),
        bandwidth: args.bandwidth.map(Into::into).or(file.bandwidth),
        surface_step: args.surface_step.or(file.surface_step),
        time_quadrature: args
            .time_quadrature
            .map(Into::into)
            .or(file.time_quadrature),
        base_seed: args.seed.or(file.base_seed),
        output: args.out.clone().or(file.output),
    };
    let config = merged.resolve()?;
    let start = Instant::now();
    let output = harness::run_experiment(&config)?;
    let text = harness::render_csv(&output)?;
    match &config.output {
        Some(path) => {
            std::fs::write(path, &text).map_err(|err| data_error(path, err))?;
            eprintln!(
                "wrote {} replicates to {}",
                config.replicates,
                path.display()
            );
        }
        None => {
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(Failure::from)?;
        }
    }
    if !args.quiet {
        for result in &output.results {
            eprintln!(
                "replicate {} finished in {:.2} s",
                result.replicate,
                result.wall_time.as_secs_f64()
            );
        }
        eprintln!("total {:.2} s", start.elapsed().as_secs_f64());
    }
    Ok(())
}
