//! Crossing estimators: naive Monte Carlo chord counting, the
//! non-stationary and stationary density-plug-in estimators, closed forms
//! for models with known invariant laws, and a simulation-based reference
//! oracle.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crossing_count::{count_exact, CrossingTarget, GridCount};
use crate::density_estimation::{
    select_bandwidth, time_slice_samples, BandwidthMethod, DensityEstimate,
};
use crate::error::{Error, Result};
use crate::psp_sim::{simulate_event, GridTrajectory, ModeId, Potential, ProcessModel};
use crate::rng::trajectory_rng;
use crate::surfaces::{Level, QuadratureNodes};

/// How a crossing estimate was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MonteCarlo,
    KrNonstationary,
    KrStationary,
    ClosedForm,
    ExactOracle,
}

/// Time weights for the non-stationary plug-in estimator. The rectangle
/// rule weights every slice by H/(n_H - 1), so the weights total more than
/// H; the trapezoid option halves the two boundary slices instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeQuadrature {
    #[default]
    Rectangle,
    Trapezoid,
}

/// Estimation context carried along with the value.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EstimateMeta {
    /// Number of trajectories.
    pub n: usize,
    /// Grid points per trajectory.
    pub n_points: usize,
    /// Grid step h.
    pub step: f64,
    /// Surface quadrature step, for planar surfaces.
    pub surface_step: Option<f64>,
    /// Mean bandwidth scale sqrt(det B) across the fitted densities.
    pub bandwidth_scale: Option<f64>,
    /// Standard error of the reported mean, where one is defined.
    pub standard_error: Option<f64>,
    /// Base seed, for estimates that simulate.
    pub seed: Option<u64>,
}

/// A crossing-count estimate with the method and settings that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingEstimate {
    pub value: f64,
    pub method: Method,
    pub meta: EstimateMeta,
}

/// Where a speed projection comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeedSource {
    ModelDerived,
    DataEstimated,
}

type FieldFn<const D: usize> = dyn Fn(&[f64; D], &[f64; D]) -> (f64, f64) + Send + Sync;
type ModeVelocityFn<const D: usize> = dyn Fn(ModeId, &[f64; D]) -> [f64; D] + Send + Sync;

enum SpeedKind<const D: usize> {
    /// Pointwise (positive, negative) parts of the normal speed.
    Field(Arc<FieldFn<D>>),
    /// Per-mode velocity fields, combined with observed mode occupancy.
    PerMode {
        n_modes: usize,
        velocity: Arc<ModeVelocityFn<D>>,
    },
}

impl<const D: usize> Clone for SpeedKind<D> {
    fn clone(&self) -> Self {
        match self {
            SpeedKind::Field(f) => SpeedKind::Field(Arc::clone(f)),
            SpeedKind::PerMode { n_modes, velocity } => SpeedKind::PerMode {
                n_modes: *n_modes,
                velocity: Arc::clone(velocity),
            },
        }
    }
}

/// The normal speed (r(x), nu(x)) on a surface, split into the positive
/// (outward) and negative (inward) parts the crossing formulas integrate.
#[derive(Clone)]
pub struct SpeedProjection<const D: usize> {
    kind: SpeedKind<D>,
    source: SpeedSource,
}

impl<const D: usize> SpeedProjection<D> {
    /// Projection given directly as a pointwise split of the normal speed.
    pub fn from_field(
        eval: impl Fn(&[f64; D], &[f64; D]) -> (f64, f64) + Send + Sync + 'static,
        source: SpeedSource,
    ) -> Self {
        SpeedProjection {
            kind: SpeedKind::Field(Arc::new(eval)),
            source,
        }
    }

    /// Projection derived from a model's mode velocity fields; estimators
    /// combine the per-mode speeds with the observed mode occupancy, so the
    /// dataset must carry mode labels.
    pub fn from_model(model: &ProcessModel<D>) -> Self {
        let flows = Arc::clone(model.flows());
        SpeedProjection {
            kind: SpeedKind::PerMode {
                n_modes: model.n_modes(),
                velocity: Arc::new(move |mode, x: &[f64; D]| flows[mode].field().eval(x)),
            },
            source: SpeedSource::ModelDerived,
        }
    }

    pub fn source(&self) -> SpeedSource {
        self.source
    }

    fn needs_modes(&self) -> Option<usize> {
        match &self.kind {
            SpeedKind::Field(_) => None,
            SpeedKind::PerMode { n_modes, .. } => Some(*n_modes),
        }
    }

    /// (positive, negative) parts at a surface point, weighting per-mode
    /// speeds by `occupancy` when the projection is mode-resolved.
    fn eval(&self, x: &[f64; D], nu: &[f64; D], occupancy: Option<&[f64]>) -> Result<(f64, f64)> {
        match &self.kind {
            SpeedKind::Field(f) => Ok(f(x, nu)),
            SpeedKind::PerMode { n_modes, velocity } => {
                let occ = occupancy.ok_or_else(|| {
                    Error::InvalidParameter(
                        "mode-resolved speed projection needs mode labels in the dataset; \
                         supply a pointwise projection otherwise"
                            .into(),
                    )
                })?;
                let mut pos = 0.0;
                let mut neg = 0.0;
                for (y, o) in occ.iter().take(*n_modes).enumerate() {
                    let v = velocity(y, x);
                    let toward: f64 = v.iter().zip(nu).map(|(a, b)| a * b).sum();
                    pos += o * toward.max(0.0);
                    neg += o * (-toward).max(0.0);
                }
                Ok((pos, neg))
            }
        }
    }

    /// |(r, nu)| at a surface point.
    pub fn magnitude(&self, x: &[f64; D], nu: &[f64; D], occupancy: Option<&[f64]>) -> Result<f64> {
        self.eval(x, nu, occupancy).map(|(p, n)| p + n)
    }

    /// Directional parts at a surface point.
    pub fn parts(
        &self,
        x: &[f64; D],
        nu: &[f64; D],
        occupancy: Option<&[f64]>,
    ) -> Result<(f64, f64)> {
        self.eval(x, nu, occupancy)
    }
}

/// Configuration shared by the two plug-in estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrConfig {
    pub bandwidth: BandwidthMethod,
    pub time_quadrature: TimeQuadrature,
    /// Surface quadrature step; ignored by levels.
    pub surface_step: f64,
}

impl KrConfig {
    pub fn new(bandwidth: BandwidthMethod) -> Self {
        KrConfig {
            bandwidth,
            time_quadrature: TimeQuadrature::Rectangle,
            surface_step: 0.1,
        }
    }
}

fn check_common_grid<const D: usize>(dataset: &[GridTrajectory<D>]) -> Result<&GridTrajectory<D>> {
    let first = dataset.first().ok_or(Error::EmptyDataset)?;
    for traj in dataset {
        if traj.n_points() != first.n_points() || traj.horizon() != first.horizon() {
            return Err(Error::GridMismatch(
                "estimators need a common grid across trajectories".into(),
            ));
        }
    }
    Ok(first)
}

/// Mode occupancy across trajectories at one grid index.
fn slice_occupancy<const D: usize>(
    dataset: &[GridTrajectory<D>],
    j: usize,
    n_modes: usize,
) -> Result<Vec<f64>> {
    let mut occ = vec![0.0; n_modes];
    for traj in dataset {
        let modes = traj.modes().ok_or_else(|| {
            Error::InvalidParameter(
                "mode-resolved speed projection needs mode labels in the dataset".into(),
            )
        })?;
        let m = modes[j];
        if m >= n_modes {
            return Err(Error::Data(format!(
                "mode label {m} out of range for {n_modes} modes"
            )));
        }
        occ[m] += 1.0;
    }
    for w in &mut occ {
        *w /= dataset.len() as f64;
    }
    Ok(occ)
}

/// Mode occupancy along one trajectory.
fn trajectory_occupancy<const D: usize>(
    traj: &GridTrajectory<D>,
    n_modes: usize,
) -> Result<Vec<f64>> {
    let modes = traj.modes().ok_or_else(|| {
        Error::InvalidParameter(
            "mode-resolved speed projection needs mode labels in the dataset".into(),
        )
    })?;
    let mut occ = vec![0.0; n_modes];
    for &m in modes {
        if m >= n_modes {
            return Err(Error::Data(format!(
                "mode label {m} out of range for {n_modes} modes"
            )));
        }
        occ[m] += 1.0;
    }
    for w in &mut occ {
        *w /= modes.len() as f64;
    }
    Ok(occ)
}

fn mean_and_se(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, Some(0.0));
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, Some((var / n as f64).sqrt()))
}

/// Mean over trajectories of the grid-chord crossing count.
pub fn monte_carlo<const D: usize>(
    dataset: &[GridTrajectory<D>],
    surface: &(impl GridCount<D> + ?Sized),
) -> Result<CrossingEstimate> {
    let first = dataset.first().ok_or(Error::EmptyDataset)?;
    let counts: Vec<f64> = dataset
        .iter()
        .map(|traj| surface.count_grid(traj).total as f64)
        .collect();
    let (value, standard_error) = mean_and_se(&counts);
    Ok(CrossingEstimate {
        value,
        method: Method::MonteCarlo,
        meta: EstimateMeta {
            n: dataset.len(),
            n_points: first.n_points(),
            step: first.step(),
            standard_error,
            ..EstimateMeta::default()
        },
    })
}

/// Non-stationary plug-in estimator: the surface integral of |(r, nu)|
/// times the time-weighted sum of per-slice kernel density estimates, with
/// one bandwidth selected per time slice.
pub fn kr_nonstationary<const D: usize>(
    dataset: &[GridTrajectory<D>],
    surface: &(impl QuadratureNodes<D> + ?Sized),
    sp: &SpeedProjection<D>,
    config: &KrConfig,
) -> Result<CrossingEstimate> {
    let first = check_common_grid(dataset)?;
    let n_h = first.n_points();
    let h = first.step();
    let nodes = surface.quadrature_nodes(config.surface_step);
    let slices: Vec<(Vec<f64>, f64, Option<Vec<f64>>)> = (0..n_h)
        .into_par_iter()
        .map(|j| {
            let samples = time_slice_samples(dataset, j);
            let bw = select_bandwidth(&samples, config.bandwidth)?;
            let est = DensityEstimate::new(samples, bw)?;
            let densities: Vec<f64> = nodes.iter().map(|(x, _, _)| est.eval(x)).collect();
            let occupancy = match sp.needs_modes() {
                Some(n_modes) => Some(slice_occupancy(dataset, j, n_modes)?),
                None => None,
            };
            Ok((densities, bw.scale(), occupancy))
        })
        .collect::<Result<_>>()?;
    let mut value = 0.0;
    for (k, (x, nu, w)) in nodes.iter().enumerate() {
        let mut time_sum = 0.0;
        for (j, (densities, _, occupancy)) in slices.iter().enumerate() {
            let tw = match config.time_quadrature {
                TimeQuadrature::Rectangle => h,
                TimeQuadrature::Trapezoid if j == 0 || j == n_h - 1 => 0.5 * h,
                TimeQuadrature::Trapezoid => h,
            };
            let speed = sp.magnitude(x, nu, occupancy.as_deref())?;
            time_sum += tw * speed * densities[k];
        }
        value += w * time_sum;
    }
    let bandwidth_scale = slices.iter().map(|(_, s, _)| s).sum::<f64>() / n_h as f64;
    Ok(CrossingEstimate {
        value,
        method: Method::KrNonstationary,
        meta: EstimateMeta {
            n: dataset.len(),
            n_points: n_h,
            step: h,
            surface_step: (D > 1).then_some(config.surface_step),
            bandwidth_scale: Some(bandwidth_scale),
            ..EstimateMeta::default()
        },
    })
}

/// Stationary plug-in estimator: per trajectory, the invariant density is
/// estimated from that trajectory's own samples and plugged into
/// H * integral of |(r, nu)| against it; the mean across trajectories is
/// returned alongside the per-trajectory values.
pub fn kr_stationary<const D: usize>(
    dataset: &[GridTrajectory<D>],
    surface: &(impl QuadratureNodes<D> + ?Sized),
    sp: &SpeedProjection<D>,
    config: &KrConfig,
) -> Result<(Vec<CrossingEstimate>, CrossingEstimate)> {
    let first = check_common_grid(dataset)?;
    let nodes = surface.quadrature_nodes(config.surface_step);
    let horizon = first.horizon();
    let per_trajectory: Vec<(f64, f64)> = dataset
        .par_iter()
        .map(|traj| {
            let bw = select_bandwidth(traj.samples(), config.bandwidth)?;
            let est = DensityEstimate::new(traj.samples().to_vec(), bw)?;
            let occupancy = match sp.needs_modes() {
                Some(n_modes) => Some(trajectory_occupancy(traj, n_modes)?),
                None => None,
            };
            let mut integral = 0.0;
            for (x, nu, w) in &nodes {
                integral += w * sp.magnitude(x, nu, occupancy.as_deref())? * est.eval(x);
            }
            Ok((horizon * integral, bw.scale()))
        })
        .collect::<Result<_>>()?;
    let meta_for = |bw: Option<f64>, se: Option<f64>, n: usize| EstimateMeta {
        n,
        n_points: first.n_points(),
        step: first.step(),
        surface_step: (D > 1).then_some(config.surface_step),
        bandwidth_scale: bw,
        standard_error: se,
        ..EstimateMeta::default()
    };
    let estimates: Vec<CrossingEstimate> = per_trajectory
        .iter()
        .map(|&(value, bw)| CrossingEstimate {
            value,
            method: Method::KrStationary,
            meta: meta_for(Some(bw), None, 1),
        })
        .collect();
    let values: Vec<f64> = per_trajectory.iter().map(|&(v, _)| v).collect();
    let (mean, se) = mean_and_se(&values);
    let mean_bw = per_trajectory.iter().map(|&(_, b)| b).sum::<f64>() / per_trajectory.len() as f64;
    let mean_estimate = CrossingEstimate {
        value: mean,
        method: Method::KrStationary,
        meta: meta_for(Some(mean_bw), se, dataset.len()),
    };
    Ok((estimates, mean_estimate))
}

/// Stationary crossing rate of the telegraph process at a level:
/// C_x(H) = H (b - a)/2 exp(-(b - a)|x|).
pub fn closed_form_telegraph(
    a: f64,
    b: f64,
    level: &Level,
    horizon: f64,
) -> Result<CrossingEstimate> {
    if !(a > 0.0 && b > a) {
        return Err(Error::InvalidParameter(format!(
            "telegraph rates need 0 < a < b, got a = {a}, b = {b}"
        )));
    }
    if !(horizon > 0.0) {
        return Err(Error::InvalidParameter("horizon must be positive".into()));
    }
    let gap = b - a;
    let value = horizon * 0.5 * gap * (-gap * level.x_star.abs()).exp();
    Ok(CrossingEstimate {
        value,
        method: Method::ClosedForm,
        meta: EstimateMeta::default(),
    })
}

/// Stationary crossing rate of the potential-driven sampler at a level:
/// C_x(H) = H exp(-beta U(x)) / Z_beta, with the normalizing constant
/// integrated adaptively over [-10, 10] (the Gibbs tails beyond are far
/// below quadrature tolerance for the potentials of interest).
pub fn closed_form_pdsa(
    beta: f64,
    potential: &Potential,
    level: &Level,
    horizon: f64,
) -> Result<CrossingEstimate> {
    if !(beta > 0.0 && horizon > 0.0) {
        return Err(Error::InvalidParameter(
            "inverse temperature and horizon must be positive".into(),
        ));
    }
    let z = adaptive_simpson(&|x| (-beta * potential.value(x)).exp(), -10.0, 10.0, 1e-12);
    if !(z.is_finite() && z > 0.0) {
        return Err(Error::Numeric(format!(
            "normalizing constant came out as {z}"
        )));
    }
    let value = horizon * (-beta * potential.value(level.x_star)).exp() / z;
    Ok(CrossingEstimate {
        value,
        method: Method::ClosedForm,
        meta: EstimateMeta::default(),
    })
}

/// Adaptive Simpson quadrature with Richardson acceptance.
fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, width: f64) -> f64 {
        width / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let refined = left + right;
        if depth == 0 || (refined - whole).abs() <= 15.0 * tol {
            return refined + (refined - whole) / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(fa, fm, fb, b - a);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Reference value: the mean exact crossing count over `n_ref` fresh
/// simulations, with its standard error. Serves as ground truth where no
/// closed form exists.
pub fn exact_oracle<const D: usize>(
    model: &ProcessModel<D>,
    target: &(impl CrossingTarget<D> + Sync + ?Sized),
    horizon: f64,
    n_ref: usize,
    base_seed: u64,
) -> Result<CrossingEstimate> {
    if n_ref == 0 {
        return Err(Error::InvalidParameter("n_ref must be at least 1".into()));
    }
    let counts: Vec<f64> = (0..n_ref as u32)
        .into_par_iter()
        .map(|i| {
            let mut rng = trajectory_rng(base_seed, 0, i);
            let traj = simulate_event(model, &mut rng, horizon)?;
            Ok(count_exact(&traj, target)?.total as f64)
        })
        .collect::<Result<_>>()?;
    let (value, standard_error) = mean_and_se(&counts);
    Ok(CrossingEstimate {
        value,
        method: Method::ExactOracle,
        meta: EstimateMeta {
            n: n_ref,
            standard_error,
            seed: Some(base_seed),
            ..EstimateMeta::default()
        },
    })
}
