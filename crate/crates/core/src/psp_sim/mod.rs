//! Process models and exact event-level simulation.
//!
//! A model is a finite set of modes, one deterministic flow per mode, a
//! state-dependent jump rate, a post-jump mark kernel, and an initial law.
//! Between jumps the state follows the active mode's flow; jump times are
//! drawn from the survival function exp(-integrated rate along the flow).
//!
//! Simulation is exact: by inversion when the model registers a
//! piecewise-constant rate profile along arcs (both telegraph models), and
//! by thinning against a locally computed dominating rate otherwise.

mod models;

pub use models::{
    builtin_model_names, double_well_potential, pdsa, telegraph1d, telegraph2d,
    telegraph_invariant_sample, Potential, CARDINAL_VELOCITIES, TELEGRAPH_VELOCITIES,
};

use std::io::{Read, Write};
use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::Exp1;

use crate::error::{Error, Result};

/// Index into a model's mode set.
pub type ModeId = usize;

type FieldFn<const D: usize> = dyn Fn(&[f64; D]) -> [f64; D] + Send + Sync;
type FlowMap<const D: usize> = dyn Fn(&[f64; D], f64) -> [f64; D] + Send + Sync;

/// A velocity field on R^D.
#[derive(Clone)]
pub struct VectorField<const D: usize> {
    eval: Arc<FieldFn<D>>,
}

impl<const D: usize> VectorField<D> {
    pub fn new(eval: impl Fn(&[f64; D]) -> [f64; D] + Send + Sync + 'static) -> Self {
        VectorField {
            eval: Arc::new(eval),
        }
    }

    pub fn constant(v: [f64; D]) -> Self {
        VectorField::new(move |_| v)
    }

    pub fn eval(&self, x: &[f64; D]) -> [f64; D] {
        (self.eval)(x)
    }

    pub fn dim(&self) -> usize {
        D
    }
}

/// Default integration step for flows without a closed form.
pub const DEFAULT_FLOW_STEP: f64 = 1e-3;

/// The solution map of one mode's ODE. Closed-form maps are used when
/// registered; otherwise the field is integrated by the classical
/// fourth-order one-step scheme with a fixed step.
#[derive(Clone)]
pub struct Flow<const D: usize> {
    field: VectorField<D>,
    analytic: Option<Arc<FlowMap<D>>>,
    constant_velocity: Option<[f64; D]>,
    step: f64,
}

impl<const D: usize> Flow<D> {
    /// Constant-velocity flow x + t v. Crossing times against levels and
    /// segments are solved in closed form for such flows.
    pub fn linear(v: [f64; D]) -> Self {
        Flow {
            field: VectorField::constant(v),
            analytic: Some(Arc::new(move |x: &[f64; D], t: f64| {
                let mut y = *x;
                for i in 0..D {
                    y[i] += t * v[i];
                }
                y
            })),
            constant_velocity: Some(v),
            step: DEFAULT_FLOW_STEP,
        }
    }

    /// Flow with a registered closed-form solution map.
    pub fn analytic(
        field: VectorField<D>,
        map: impl Fn(&[f64; D], f64) -> [f64; D] + Send + Sync + 'static,
    ) -> Self {
        Flow {
            field,
            analytic: Some(Arc::new(map)),
            constant_velocity: None,
            step: DEFAULT_FLOW_STEP,
        }
    }

    /// Flow integrated numerically with the given fixed step.
    pub fn numeric(field: VectorField<D>, step: f64) -> Self {
        Flow {
            field,
            analytic: None,
            constant_velocity: None,
            step,
        }
    }

    pub fn field(&self) -> &VectorField<D> {
        &self.field
    }

    /// The velocity vector when the flow is a straight line, used for
    /// closed-form crossing times.
    pub fn constant_velocity(&self) -> Option<[f64; D]> {
        self.constant_velocity
    }

    /// State after following the flow for time `t` from `x`.
    pub fn at(&self, x: &[f64; D], t: f64) -> [f64; D] {
        if let Some(map) = &self.analytic {
            return map(x, t);
        }
        self.integrate(x, t)
    }

    fn integrate(&self, x: &[f64; D], t: f64) -> [f64; D] {
        if t == 0.0 {
            return *x;
        }
        let n = (t.abs() / self.step).ceil().max(1.0) as usize;
        let dt = t / n as f64;
        let mut y = *x;
        for _ in 0..n {
            y = rk4_step(&self.field, &y, dt);
        }
        y
    }
}

fn rk4_step<const D: usize>(field: &VectorField<D>, x: &[f64; D], dt: f64) -> [f64; D] {
    let axpy = |x: &[f64; D], s: f64, v: &[f64; D]| {
        let mut y = *x;
        for i in 0..D {
            y[i] += s * v[i];
        }
        y
    };
    let k1 = field.eval(x);
    let k2 = field.eval(&axpy(x, dt / 2.0, &k1));
    let k3 = field.eval(&axpy(x, dt / 2.0, &k2));
    let k4 = field.eval(&axpy(x, dt, &k3));
    let mut y = *x;
    for i in 0..D {
        y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    y
}

/// Jump rate along an arc as a piecewise-constant profile: `pieces` are
/// (end time, rate) entries covering [previous end, end), and `tail` is the
/// rate beyond the last piece. Models whose rate is piecewise constant along
/// flows register this to enable exact inversion sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstRate {
    pub pieces: Vec<(f64, f64)>,
    pub tail: f64,
}

impl PiecewiseConstRate {
    pub fn constant(rate: f64) -> Self {
        PiecewiseConstRate {
            pieces: Vec::new(),
            tail: rate,
        }
    }

    /// First time the integrated rate reaches `target`, or infinity when the
    /// total integral stays below it.
    fn inverse(&self, target: f64) -> f64 {
        let mut acc = 0.0;
        let mut t_prev = 0.0;
        for &(end, rate) in &self.pieces {
            let seg = rate * (end - t_prev);
            if acc + seg >= target {
                return t_prev + (target - acc) / rate;
            }
            acc += seg;
            t_prev = end;
        }
        if self.tail > 0.0 {
            t_prev + (target - acc) / self.tail
        } else {
            f64::INFINITY
        }
    }
}

type RateFn<const D: usize> = dyn Fn(&[f64; D], ModeId) -> f64 + Send + Sync;
type TransitionFn<const D: usize> =
    dyn Fn(&[f64; D], ModeId, &mut dyn RngCore) -> ([f64; D], ModeId) + Send + Sync;
type InitialFn<const D: usize> = dyn Fn(&mut dyn RngCore) -> ([f64; D], ModeId) + Send + Sync;
type ArcRateFn<const D: usize> = dyn Fn(&[f64; D], ModeId) -> PiecewiseConstRate + Send + Sync;

/// Thinning parameters for models without an exact rate inverse.
#[derive(Debug, Clone, Copy)]
pub struct ThinningConfig {
    /// Lookahead window over which a dominating rate is computed.
    pub window: f64,
    /// Number of subintervals in the window scanned for the rate maximum.
    pub subgrid: usize,
    /// Multiplier applied to the scanned maximum.
    pub safety: f64,
    /// Bound-doubling attempts per window before giving up.
    pub max_refinements: u32,
}

impl Default for ThinningConfig {
    fn default() -> Self {
        ThinningConfig {
            window: 0.1,
            subgrid: 16,
            safety: 1.5,
            max_refinements: 8,
        }
    }
}

/// Default cap on events per trajectory; reaching it signals an explosive
/// rate rather than a legitimate path.
pub const DEFAULT_EVENT_CAP: usize = 1_000_000;

/// A piecewise smooth process: per-mode flows, a jump rate, a post-jump mark
/// kernel, and an initial law.
#[derive(Clone)]
pub struct ProcessModel<const D: usize> {
    name: String,
    flows: Arc<Vec<Flow<D>>>,
    rate: Arc<RateFn<D>>,
    transition: Arc<TransitionFn<D>>,
    initial: Arc<InitialFn<D>>,
    arc_rate: Option<Arc<ArcRateFn<D>>>,
    event_cap: usize,
    thinning: ThinningConfig,
}

impl<const D: usize> ProcessModel<D> {
    pub fn new(
        name: impl Into<String>,
        flows: Vec<Flow<D>>,
        rate: impl Fn(&[f64; D], ModeId) -> f64 + Send + Sync + 'static,
        transition: impl Fn(&[f64; D], ModeId, &mut dyn RngCore) -> ([f64; D], ModeId)
            + Send
            + Sync
            + 'static,
        initial: impl Fn(&mut dyn RngCore) -> ([f64; D], ModeId) + Send + Sync + 'static,
    ) -> Result<Self> {
        if flows.is_empty() {
            return Err(Error::InvalidParameter(
                "model needs at least one mode".into(),
            ));
        }
        Ok(ProcessModel {
            name: name.into(),
            flows: Arc::new(flows),
            rate: Arc::new(rate),
            transition: Arc::new(transition),
            initial: Arc::new(initial),
            arc_rate: None,
            event_cap: DEFAULT_EVENT_CAP,
            thinning: ThinningConfig::default(),
        })
    }

    /// Registers an exact piecewise-constant rate profile along arcs,
    /// switching simulation from thinning to inversion.
    pub fn with_arc_rate(
        mut self,
        arc_rate: impl Fn(&[f64; D], ModeId) -> PiecewiseConstRate + Send + Sync + 'static,
    ) -> Self {
        self.arc_rate = Some(Arc::new(arc_rate));
        self
    }

    /// Replaces the initial law.
    pub fn with_initial(
        mut self,
        initial: impl Fn(&mut dyn RngCore) -> ([f64; D], ModeId) + Send + Sync + 'static,
    ) -> Self {
        self.initial = Arc::new(initial);
        self
    }

    pub fn with_event_cap(mut self, cap: usize) -> Self {
        self.event_cap = cap;
        self
    }

    pub fn with_thinning(mut self, config: ThinningConfig) -> Self {
        self.thinning = config;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_modes(&self) -> usize {
        self.flows.len()
    }

    pub fn flow(&self, mode: ModeId) -> &Flow<D> {
        &self.flows[mode]
    }

    pub fn flows(&self) -> &Arc<Vec<Flow<D>>> {
        &self.flows
    }

    /// Jump rate at a state.
    pub fn rate(&self, x: &[f64; D], mode: ModeId) -> f64 {
        (self.rate)(x, mode)
    }

    /// Exact rate profile along the arc started at `x` in `mode`, when the
    /// model registers one.
    pub fn arc_rate_profile(&self, x: &[f64; D], mode: ModeId) -> Option<PiecewiseConstRate> {
        self.arc_rate.as_ref().map(|f| f(x, mode))
    }

    /// Velocity of the given mode's field at `x`.
    pub fn mode_velocity(&self, mode: ModeId, x: &[f64; D]) -> [f64; D] {
        self.flows[mode].field().eval(x)
    }

    /// True when every mode moves at nonzero speed at `x`, the
    /// transversality condition exact counting relies on at a level.
    pub fn transversal_at(&self, x: &[f64; D]) -> bool {
        (0..self.n_modes()).all(|m| {
            let v = self.mode_velocity(m, x);
            v.iter().map(|c| c * c).sum::<f64>().sqrt() > 1e-12
        })
    }

    pub fn draw_initial(&self, rng: &mut dyn RngCore) -> ([f64; D], ModeId) {
        (self.initial)(rng)
    }
}

/// One jump of the marked point process: the time and the post-jump mark.
/// The entry at index 0 is the initial condition at time 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event<const D: usize> {
    pub time: f64,
    pub point: [f64; D],
    pub mode: ModeId,
}

/// An exact event-level trajectory on [0, horizon]. Between consecutive
/// events the state follows the flow of the event's mode; the final arc
/// extends from the last event to the horizon.
#[derive(Clone)]
pub struct EventTrajectory<const D: usize> {
    horizon: f64,
    events: Vec<Event<D>>,
    flows: Arc<Vec<Flow<D>>>,
}

/// One inter-jump arc of a trajectory.
#[derive(Clone, Copy)]
pub struct ArcView<'a, const D: usize> {
    pub t_start: f64,
    pub duration: f64,
    pub start: [f64; D],
    pub mode: ModeId,
    pub flow: &'a Flow<D>,
}

impl<'a, const D: usize> ArcView<'a, D> {
    /// State at time `dt` into the arc.
    pub fn state(&self, dt: f64) -> [f64; D] {
        self.flow.at(&self.start, dt)
    }
}

impl<const D: usize> EventTrajectory<D> {
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn events(&self) -> &[Event<D>] {
        &self.events
    }

    /// Number of jumps (the initial condition is not a jump).
    pub fn n_jumps(&self) -> usize {
        self.events.len() - 1
    }

    /// State and mode at time `t`, right-continuous at jump times.
    pub fn state_at(&self, t: f64) -> ([f64; D], ModeId) {
        let idx = match self
            .events
            .binary_search_by(|e| e.time.partial_cmp(&t).expect("event times are finite"))
        {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        let ev = &self.events[idx];
        (self.flows[ev.mode].at(&ev.point, t - ev.time), ev.mode)
    }

    /// The inter-jump arcs in time order, the last one ending at the horizon.
    pub fn arcs(&self) -> impl Iterator<Item = ArcView<'_, D>> {
        self.events.iter().enumerate().map(move |(i, ev)| {
            let t_end = self
                .events
                .get(i + 1)
                .map(|next| next.time)
                .unwrap_or(self.horizon);
            ArcView {
                t_start: ev.time,
                duration: t_end - ev.time,
                start: ev.point,
                mode: ev.mode,
                flow: &self.flows[ev.mode],
            }
        })
    }
}

/// A trajectory observed on the regular grid {H (j-1)/(n_H - 1) : j = 1..n_H}.
/// `velocities` and `modes` are carried when the sampler knows them; datasets
/// from external sources may omit either.
#[derive(Debug, Clone, PartialEq)]
pub struct GridTrajectory<const D: usize> {
    horizon: f64,
    samples: Vec<[f64; D]>,
    velocities: Option<Vec<[f64; D]>>,
    modes: Option<Vec<ModeId>>,
}

impl<const D: usize> GridTrajectory<D> {
    pub fn from_parts(
        horizon: f64,
        samples: Vec<[f64; D]>,
        velocities: Option<Vec<[f64; D]>>,
        modes: Option<Vec<ModeId>>,
    ) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidParameter(
                "grid trajectory needs at least 2 samples".into(),
            ));
        }
        if !(horizon > 0.0) {
            return Err(Error::InvalidParameter("horizon must be positive".into()));
        }
        if let Some(v) = &velocities {
            if v.len() != samples.len() {
                return Err(Error::GridMismatch(
                    "velocity count differs from sample count".into(),
                ));
            }
        }
        if let Some(m) = &modes {
            if m.len() != samples.len() {
                return Err(Error::GridMismatch(
                    "mode count differs from sample count".into(),
                ));
            }
        }
        Ok(GridTrajectory {
            horizon,
            samples,
            velocities,
            modes,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_points(&self) -> usize {
        self.samples.len()
    }

    /// Grid step h = H / (n_H - 1).
    pub fn step(&self) -> f64 {
        self.horizon / (self.samples.len() - 1) as f64
    }

    /// Time of the j-th sample (0-based).
    pub fn time(&self, j: usize) -> f64 {
        self.horizon * j as f64 / (self.samples.len() - 1) as f64
    }

    pub fn samples(&self) -> &[[f64; D]] {
        &self.samples
    }

    pub fn velocities(&self) -> Option<&[[f64; D]]> {
        self.velocities.as_deref()
    }

    pub fn modes(&self) -> Option<&[ModeId]> {
        self.modes.as_deref()
    }
}

/// Simulates one exact event-level trajectory on [0, horizon].
///
/// Inter-jump times are drawn by exact inversion when the model registers an
/// arc rate profile, and by thinning otherwise. Deterministic given the
/// generator state. The mark kernel is assumed to produce strictly positive
/// inter-jump times; a zero jump time is reported as a numeric failure
/// instead of being merged with its predecessor.
pub fn simulate_event<const D: usize>(
    model: &ProcessModel<D>,
    rng: &mut dyn RngCore,
    horizon: f64,
) -> Result<EventTrajectory<D>> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidParameter("horizon must be positive".into()));
    }
    let (x0, m0) = model.draw_initial(rng);
    let mut events = vec![Event {
        time: 0.0,
        point: x0,
        mode: m0,
    }];
    let mut t = 0.0;
    loop {
        let current = *events.last().expect("at least the initial event");
        let remaining = horizon - t;
        let dt = match &model.arc_rate {
            Some(arc_rate) => {
                let profile = arc_rate(&current.point, current.mode);
                let target: f64 = rng.sample(Exp1);
                let dt = profile.inverse(target);
                if dt <= remaining {
                    Some(dt)
                } else {
                    None
                }
            }
            None => thin_next_jump(model, &current.point, current.mode, remaining, rng)?,
        };
        let Some(dt) = dt else { break };
        if dt <= 0.0 {
            return Err(Error::Numeric(format!(
                "simultaneous jump times at t = {t}; the mark kernel must keep inter-jump times positive"
            )));
        }
        t += dt;
        let pre = model.flow(current.mode).at(&current.point, dt);
        let (point, mode) = (model.transition)(&pre, current.mode, rng);
        events.push(Event {
            time: t,
            point,
            mode,
        });
        if events.len() > model.event_cap {
            return Err(Error::EventOverflow {
                cap: model.event_cap,
            });
        }
    }
    Ok(EventTrajectory {
        horizon,
        events,
        flows: Arc::clone(&model.flows),
    })
}

/// Thinning with a piecewise-constant dominating rate: the rate is scanned
/// on a subgrid of each lookahead window and the scaled maximum dominates;
/// a candidate where the true rate exceeds the bound restarts the window
/// with a doubled bound.
fn thin_next_jump<const D: usize>(
    model: &ProcessModel<D>,
    x_arc: &[f64; D],
    mode: ModeId,
    remaining: f64,
    rng: &mut dyn RngCore,
) -> Result<Option<f64>> {
    let cfg = model.thinning;
    let flow = model.flow(mode);
    let mut tau = 0.0;
    while tau < remaining {
        let mut bound: f64 = 0.0;
        for k in 0..=cfg.subgrid {
            let s = tau + cfg.window * k as f64 / cfg.subgrid as f64;
            bound = bound.max(model.rate(&flow.at(x_arc, s), mode));
        }
        bound *= cfg.safety;
        if bound <= 0.0 {
            tau += cfg.window;
            continue;
        }
        let mut refinements = 0u32;
        let mut s = tau;
        loop {
            let e: f64 = rng.sample(Exp1);
            s += e / bound;
            if s > tau + cfg.window {
                break;
            }
            if s > remaining {
                return Ok(None);
            }
            let lam = model.rate(&flow.at(x_arc, s), mode);
            if lam > bound {
                refinements += 1;
                if refinements > cfg.max_refinements {
                    return Err(Error::RateBound {
                        refinements,
                        rate: lam,
                        bound,
                        t: s,
                    });
                }
                bound = (2.0 * bound).max(cfg.safety * lam);
                s = tau;
                continue;
            }
            if rng.gen::<f64>() * bound < lam {
                return Ok(Some(s));
            }
        }
        tau += cfg.window;
    }
    Ok(None)
}

/// Samples an event trajectory on a regular grid of `n_points` points
/// spanning [0, horizon], recording exact states, mode labels, and the mode
/// field's velocity at each sample.
pub fn sample_grid<const D: usize>(
    traj: &EventTrajectory<D>,
    n_points: usize,
) -> Result<GridTrajectory<D>> {
    if n_points < 2 {
        return Err(Error::InvalidParameter(
            "n_points must be at least 2".into(),
        ));
    }
    let h = traj.horizon / (n_points - 1) as f64;
    let mut samples = Vec::with_capacity(n_points);
    let mut velocities = Vec::with_capacity(n_points);
    let mut modes = Vec::with_capacity(n_points);
    let events = traj.events();
    let mut arc = 0usize;
    for j in 0..n_points {
        let t = if j + 1 == n_points {
            traj.horizon
        } else {
            h * j as f64
        };
        while arc + 1 < events.len() && events[arc + 1].time <= t {
            arc += 1;
        }
        let ev = &events[arc];
        let flow = &traj.flows[ev.mode];
        let x = flow.at(&ev.point, t - ev.time);
        velocities.push(flow.field().eval(&x));
        samples.push(x);
        modes.push(ev.mode);
    }
    GridTrajectory::from_parts(traj.horizon, samples, Some(velocities), Some(modes))
}

/// Simulates `n_trajectories` independent trajectories and samples each on
/// a regular grid, in parallel, one RNG stream per (replicate, trajectory).
pub fn simulate_dataset<const D: usize>(
    model: &ProcessModel<D>,
    horizon: f64,
    n_points: usize,
    n_trajectories: usize,
    base_seed: u64,
    replicate: u32,
) -> Result<Vec<GridTrajectory<D>>> {
    use rayon::prelude::*;
    (0..n_trajectories as u32)
        .into_par_iter()
        .map(|i| {
            let mut rng = crate::rng::trajectory_rng(base_seed, replicate, i);
            let traj = simulate_event(model, &mut rng, horizon)?;
            sample_grid(&traj, n_points)
        })
        .collect()
}

/// Writes a grid trajectory as CSV with header `t,x1[,x2],mode[,v1,v2]`.
pub fn write_grid_csv<const D: usize>(
    traj: &GridTrajectory<D>,
    out: &mut impl Write,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = vec!["t".into()];
    for i in 0..D {
        header.push(format!("x{}", i + 1));
    }
    header.push("mode".into());
    if traj.velocities().is_some() {
        for i in 0..D {
            header.push(format!("v{}", i + 1));
        }
    }
    w.write_record(&header)?;
    for j in 0..traj.n_points() {
        let mut rec: Vec<String> = vec![traj.time(j).to_string()];
        for c in traj.samples()[j] {
            rec.push(c.to_string());
        }
        rec.push(
            traj.modes()
                .map(|m| m[j].to_string())
                .unwrap_or_else(|| String::from("")),
        );
        if let Some(v) = traj.velocities() {
            for c in v[j] {
                rec.push(c.to_string());
            }
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a grid trajectory written by [`write_grid_csv`], checking that the
/// times form a regular grid.
pub fn read_grid_csv<const D: usize>(input: impl Read) -> Result<GridTrajectory<D>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    let expect_plain = 2 + D; // t, coordinates, mode
    let expect_vel = 2 + 2 * D;
    let has_velocities = match header.len() {
        n if n == expect_plain => false,
        n if n == expect_vel => true,
        n => {
            return Err(Error::Data(format!(
                "expected {expect_plain} or {expect_vel} columns for dimension {D}, found {n}"
            )))
        }
    };
    let mut times = Vec::new();
    let mut samples: Vec<[f64; D]> = Vec::new();
    let mut velocities: Vec<[f64; D]> = Vec::new();
    let mut modes = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let field = |i: usize| -> Result<f64> {
            rec.get(i)
                .ok_or_else(|| Error::Data("short row".into()))?
                .parse::<f64>()
                .map_err(|e| Error::Data(format!("bad float in row: {e}")))
        };
        times.push(field(0)?);
        let mut x = [0.0; D];
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = field(1 + i)?;
        }
        samples.push(x);
        let mode: ModeId = rec
            .get(1 + D)
            .ok_or_else(|| Error::Data("short row".into()))?
            .parse()
            .map_err(|e| Error::Data(format!("bad mode in row: {e}")))?;
        modes.push(mode);
        if has_velocities {
            let mut v = [0.0; D];
            for (i, vi) in v.iter_mut().enumerate() {
                *vi = field(2 + D + i)?;
            }
            velocities.push(v);
        }
    }
    if times.len() < 2 {
        return Err(Error::Data("trajectory file has fewer than 2 rows".into()));
    }
    let horizon = *times.last().expect("nonempty");
    let n = times.len();
    for (j, &t) in times.iter().enumerate() {
        let expected = horizon * j as f64 / (n - 1) as f64;
        if (t - expected).abs() > 1e-9 * horizon.max(1.0) {
            return Err(Error::GridMismatch(format!(
                "row {j} at t = {t} is off the regular grid (expected {expected})"
            )));
        }
    }
    GridTrajectory::from_parts(
        horizon,
        samples,
        has_velocities.then_some(velocities),
        Some(modes),
    )
}
