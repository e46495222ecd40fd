//! Crossing counts over trajectories: chord counts on sampled grids (the
//! data view), exact counts on event trajectories (the oracle), a direct
//! quadrature check of the counting integral, and local-time estimates.

use crate::error::{Error, Result};
use crate::geom;
use crate::psp_sim::{EventTrajectory, GridTrajectory, ModeId};
use crate::surfaces::{Level, PolylineSurface, Segment};

/// Bisection width below which a root time is accepted.
const ROOT_TOL: f64 = 1e-10;
/// Roots of one arc closer than this collapse into a single crossing; this
/// also absorbs a polyline crossing through a vertex, which both adjacent
/// edges report.
const DOUBLE_ROOT_TOL: f64 = 1e-9;
/// Velocity-normal products below this fraction of the speed flag a
/// tangential pass.
const TANGENCY_TOL: f64 = 1e-10;
/// Relative distance below which a jump mark counts as landing on the
/// surface, which exact counting rejects.
const SURFACE_TOL: f64 = 1e-9;
/// Sign-sampling resolution per arc for flows without constant velocity.
const BISECTION_CELLS: usize = 64;

/// Crossing tally, split by direction: upward crossings leave the enclosed
/// side (the defining function goes negative to positive).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CrossingCount {
    pub total: usize,
    pub upward: usize,
    pub downward: usize,
    /// Crossing times in increasing order, from the exact counter only.
    pub times: Option<Vec<f64>>,
    /// Tangential passes and collapsed double roots, counted separately.
    pub tangencies: usize,
}

impl CrossingCount {
    fn record(&mut self, upward: bool) {
        self.total += 1;
        if upward {
            self.upward += 1;
        } else {
            self.downward += 1;
        }
    }
}

/// Local-time value (1/2 delta) * (occupation time of the delta-window).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalTimeEstimate {
    pub delta: f64,
    pub value: f64,
}

/// Counts strict sign changes of the sampled path against a level. A sample
/// exactly on the level never contributes: the product test is strict, and
/// ties are a probability-zero event for the processes simulated here.
pub fn count_level_grid(traj: &GridTrajectory<1>, level: &Level) -> CrossingCount {
    let mut count = CrossingCount::default();
    for w in traj.samples().windows(2) {
        let (a, b) = (level.defining(w[0][0]), level.defining(w[1][0]));
        if a * b < 0.0 {
            count.record(a < 0.0);
        }
    }
    count
}

/// True when the chord from `p` to `q` properly intersects the segment:
/// the chord endpoints lie strictly on opposite sides of the segment's line
/// and the segment endpoints strictly on opposite sides of the chord's.
pub fn chord_crosses_segment(p: [f64; 2], q: [f64; 2], seg: &Segment) -> bool {
    let ab = geom::sub(seg.b(), seg.a());
    let d1 = geom::det(ab, geom::sub(p, seg.a()));
    let d2 = geom::det(ab, geom::sub(q, seg.a()));
    let pq = geom::sub(q, p);
    let d3 = geom::det(pq, geom::sub(seg.a(), p));
    let d4 = geom::det(pq, geom::sub(seg.b(), p));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Counts consecutive-sample chords properly crossing the segment. Upward
/// means the chord moves in the direction of the segment normal.
pub fn count_segment_grid(traj: &GridTrajectory<2>, seg: &Segment) -> CrossingCount {
    let mut count = CrossingCount::default();
    for w in traj.samples().windows(2) {
        if chord_crosses_segment(w[0], w[1], seg) {
            count.record(seg.line_offset(w[0]) < 0.0);
        }
    }
    count
}

/// Counts chord crossings against every edge of a polyline. A chord cutting
/// two edges near a corner crosses the surface twice and counts twice.
pub fn count_polyline_grid(traj: &GridTrajectory<2>, surface: &PolylineSurface) -> CrossingCount {
    let mut count = CrossingCount::default();
    for w in traj.samples().windows(2) {
        for seg in surface.segments() {
            if chord_crosses_segment(w[0], w[1], seg) {
                count.record(seg.line_offset(w[0]) < 0.0);
            }
        }
    }
    count
}

/// Grid-chord crossing counting, dispatched by surface type so estimators
/// stay generic over levels, segments, and polylines.
pub trait GridCount<const D: usize> {
    fn count_grid(&self, traj: &GridTrajectory<D>) -> CrossingCount;
}

impl GridCount<1> for Level {
    fn count_grid(&self, traj: &GridTrajectory<1>) -> CrossingCount {
        count_level_grid(traj, self)
    }
}

impl GridCount<2> for Segment {
    fn count_grid(&self, traj: &GridTrajectory<2>) -> CrossingCount {
        count_segment_grid(traj, self)
    }
}

impl GridCount<2> for PolylineSurface {
    fn count_grid(&self, traj: &GridTrajectory<2>) -> CrossingCount {
        count_polyline_grid(traj, self)
    }
}

/// Crossings of one straight arc, as (time, upward) pairs plus the number
/// of tangential passes that count zero crossings.
#[derive(Debug, Clone, Default)]
pub struct LinearCrossings {
    pub hits: Vec<(f64, bool)>,
    pub tangencies: usize,
}

/// A surface the exact counter can run against.
pub trait CrossingTarget<const D: usize> {
    /// Signed defining function, negative on the enclosed side.
    fn defining(&self, x: &[f64; D]) -> f64;

    /// Distance from `x` to the surface.
    fn distance(&self, x: &[f64; D]) -> f64;

    /// Crossings of the straight path t -> x0 + t v for t in (0, duration),
    /// exclusive at both ends; arc endpoints are handled by the jump checks
    /// of the exact counter.
    fn linear_crossings(&self, x0: &[f64; D], v: &[f64; D], duration: f64) -> LinearCrossings;
}

impl CrossingTarget<1> for Level {
    fn defining(&self, x: &[f64; 1]) -> f64 {
        Level::defining(self, x[0])
    }

    fn distance(&self, x: &[f64; 1]) -> f64 {
        (x[0] - self.x_star).abs()
    }

    fn linear_crossings(&self, x0: &[f64; 1], v: &[f64; 1], duration: f64) -> LinearCrossings {
        let mut out = LinearCrossings::default();
        if v[0].abs() <= TANGENCY_TOL {
            if Level::defining(self, x0[0]).abs() <= TANGENCY_TOL {
                out.tangencies += 1;
            }
            return out;
        }
        let t = (self.x_star - x0[0]) / v[0];
        if t > 0.0 && t < duration {
            out.hits.push((t, v[0] > 0.0));
        }
        out
    }
}

impl CrossingTarget<2> for Segment {
    fn defining(&self, x: &[f64; 2]) -> f64 {
        self.line_offset(*x)
    }

    fn distance(&self, x: &[f64; 2]) -> f64 {
        self.distance_to(*x)
    }

    fn linear_crossings(&self, x0: &[f64; 2], v: &[f64; 2], duration: f64) -> LinearCrossings {
        let mut out = LinearCrossings::default();
        let speed = geom::norm(*v);
        let toward = geom::dot(*v, self.normal());
        if toward.abs() <= TANGENCY_TOL * speed {
            // Parallel arc: sliding along the segment counts no crossing.
            if self.line_offset(*x0).abs() <= TANGENCY_TOL
                && self.distance_to(*x0) <= 0.5 * duration * speed + TANGENCY_TOL
            {
                out.tangencies += 1;
            }
            return out;
        }
        let t = -self.line_offset(*x0) / toward;
        if t > 0.0 && t < duration {
            let p = [x0[0] + t * v[0], x0[1] + t * v[1]];
            let s = self.projection_fraction(p);
            if (0.0..=1.0).contains(&s) {
                out.hits.push((t, toward > 0.0));
            }
        }
        out
    }
}

impl CrossingTarget<2> for PolylineSurface {
    fn defining(&self, x: &[f64; 2]) -> f64 {
        PolylineSurface::defining(self, *x)
    }

    fn distance(&self, x: &[f64; 2]) -> f64 {
        self.distance_to(*x)
    }

    fn linear_crossings(&self, x0: &[f64; 2], v: &[f64; 2], duration: f64) -> LinearCrossings {
        let mut out = LinearCrossings::default();
        for seg in self.segments() {
            let partial = seg.linear_crossings(x0, v, duration);
            out.hits.extend(partial.hits);
            out.tangencies += partial.tangencies;
        }
        out.hits
            .sort_by(|a, b| a.0.partial_cmp(&b.0).expect("crossing times are finite"));
        // A pass through a shared vertex is reported by both edges at the
        // same time; keep one and flag the collapse.
        let mut deduped: Vec<(f64, bool)> = Vec::with_capacity(out.hits.len());
        for hit in out.hits.drain(..) {
            match deduped.last() {
                Some(last) if hit.0 - last.0 < DOUBLE_ROOT_TOL => out.tangencies += 1,
                _ => deduped.push(hit),
            }
        }
        out.hits = deduped;
        out
    }
}

/// Exact continuous-crossing count of an event trajectory.
///
/// Straight arcs are solved in closed form; other flows are root-isolated
/// by sign sampling on a per-arc subgrid followed by bisection on the
/// defining function. Fails when any jump mark (including the initial
/// state) lands on the surface, where the crossing count is ill-defined.
pub fn count_exact<const D: usize>(
    traj: &EventTrajectory<D>,
    target: &(impl CrossingTarget<D> + ?Sized),
) -> Result<CrossingCount> {
    let mut count = CrossingCount::default();
    let mut times = Vec::new();
    for ev in traj.events() {
        let scale = 1.0 + ev.point.iter().map(|c| c * c).sum::<f64>().sqrt();
        if target.distance(&ev.point) <= SURFACE_TOL * scale {
            return Err(Error::JumpOnSurface { time: ev.time });
        }
    }
    for arc in traj.arcs() {
        if arc.duration <= 0.0 {
            continue;
        }
        let hits = match arc.flow.constant_velocity() {
            Some(v) => target.linear_crossings(&arc.start, &v, arc.duration),
            None => curved_arc_crossings(target, &arc),
        };
        count.tangencies += hits.tangencies;
        for (t, upward) in hits.hits {
            count.record(upward);
            times.push(arc.t_start + t);
        }
    }
    count.times = Some(times);
    Ok(count)
}

/// Root isolation for arcs without constant velocity: the defining function
/// along the arc is sign-sampled on a fixed subgrid, each sign change is
/// bisected, and near-coincident roots collapse to one crossing.
fn curved_arc_crossings<const D: usize>(
    target: &(impl CrossingTarget<D> + ?Sized),
    arc: &crate::psp_sim::ArcView<'_, D>,
) -> LinearCrossings {
    let mut out = LinearCrossings::default();
    let rho = |t: f64| target.defining(&arc.state(t));
    let mut prev_t = 0.0;
    let mut prev_rho = rho(0.0);
    for k in 1..=BISECTION_CELLS {
        let t = arc.duration * k as f64 / BISECTION_CELLS as f64;
        let r = rho(t);
        if prev_rho * r < 0.0 {
            let (mut lo, mut hi) = (prev_t, t);
            let mut rho_lo = prev_rho;
            while hi - lo > ROOT_TOL {
                let mid = 0.5 * (lo + hi);
                let rho_mid = rho(mid);
                if rho_lo * rho_mid <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    rho_lo = rho_mid;
                }
            }
            let root = 0.5 * (lo + hi);
            let upward = r > prev_rho;
            match out.hits.last() {
                Some(last) if root - last.0 < DOUBLE_ROOT_TOL => out.tangencies += 1,
                _ if root > 0.0 && root < arc.duration => out.hits.push((root, upward)),
                _ => {}
            }
        }
        prev_t = t;
        prev_rho = r;
    }
    out
}

/// Direct quadrature of the counting integral
/// (1/2 delta) * integral of |f'(t)| 1{|f(t) - level| <= delta} dt.
///
/// The function is sampled with the given time step; within each cell the
/// occupation time of the closed delta-window is computed exactly on the
/// linear interpolant, weighted by the trapezoid average of |f'| over the
/// cell. Integrating the window indicator exactly instead of sampling it
/// keeps the error free of the O(step/delta) boundary terms a plain
/// trapezoid rule would pay at the window edges.
pub fn kac_numeric(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    t0: f64,
    t1: f64,
    level: f64,
    delta: f64,
    time_step: f64,
) -> Result<f64> {
    if !(delta > 0.0 && time_step > 0.0 && t1 > t0) {
        return Err(Error::InvalidParameter(
            "kac quadrature needs delta > 0, time_step > 0, t1 > t0".into(),
        ));
    }
    let n = ((t1 - t0) / time_step).round().max(1.0) as usize;
    let dt = (t1 - t0) / n as f64;
    let (lo, hi) = (level - delta, level + delta);
    let mut acc = 0.0;
    let mut fa = f(t0);
    let mut dfa = df(t0).abs();
    for k in 1..=n {
        let t = t0 + dt * k as f64;
        let fb = f(t);
        let dfb = df(t).abs();
        let occupied = if fa == fb {
            if (fa - level).abs() <= delta {
                dt
            } else {
                0.0
            }
        } else {
            let (f_min, f_max) = if fa < fb { (fa, fb) } else { (fb, fa) };
            let span = (hi.min(f_max) - lo.max(f_min)).max(0.0);
            span * dt / (f_max - f_min)
        };
        acc += 0.5 * (dfa + dfb) * occupied;
        fa = fb;
        dfa = dfb;
    }
    Ok(acc / (2.0 * delta))
}

/// Local time of a sampled path at a level, restricted to one mode when
/// given (which requires mode labels in the trajectory). Occupation time is
/// accumulated by the left-endpoint rectangle rule on the grid.
pub fn local_time_level(
    traj: &GridTrajectory<1>,
    level: &Level,
    mode: Option<ModeId>,
    delta: f64,
) -> Result<LocalTimeEstimate> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter("delta must be positive".into()));
    }
    let modes = match mode {
        Some(_) => Some(traj.modes().ok_or_else(|| {
            Error::InvalidParameter("mode-restricted local time needs mode labels".into())
        })?),
        None => None,
    };
    let h = traj.step();
    let mut occupation = 0.0;
    for j in 0..traj.n_points() - 1 {
        if let (Some(m), Some(labels)) = (mode, modes) {
            if labels[j] != m {
                continue;
            }
        }
        if level.within(traj.samples()[j][0], delta) {
            occupation += h;
        }
    }
    Ok(LocalTimeEstimate {
        delta,
        value: occupation / (2.0 * delta),
    })
}

/// Local time of a planar sampled path in the delta-tube of a polyline.
pub fn local_time_tube(
    traj: &GridTrajectory<2>,
    surface: &PolylineSurface,
    delta: f64,
) -> Result<LocalTimeEstimate> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter("delta must be positive".into()));
    }
    let h = traj.step();
    let mut occupation = 0.0;
    for j in 0..traj.n_points() - 1 {
        if surface.distance_to(traj.samples()[j]) <= delta {
            occupation += h;
        }
    }
    Ok(LocalTimeEstimate {
        delta,
        value: occupation / (2.0 * delta),
    })
}
