//! Built-in process models: the one-dimensional telegraph process, a
//! potential-driven switching sampler, and a planar telegraph process with
//! quadrant-dependent switching.

use std::sync::Arc;

use rand::Rng;

use super::{Flow, ModeId, PiecewiseConstRate, ProcessModel};
use crate::error::{Error, Result};

/// Velocity per mode of the one-dimensional models: mode 0 moves right,
/// mode 1 moves left.
pub const TELEGRAPH_VELOCITIES: [f64; 2] = [1.0, -1.0];

/// Velocity per mode of the planar telegraph process, in the order
/// north, south, east, west.
pub const CARDINAL_VELOCITIES: [[f64; 2]; 4] = [[0.0, 1.0], [0.0, -1.0], [1.0, 0.0], [-1.0, 0.0]];

/// Names accepted by model lookup in configuration files.
pub fn builtin_model_names() -> [&'static str; 3] {
    ["telegraph1d", "pdsa", "telegraph2d"]
}

fn check_telegraph_params(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && b > a) {
        return Err(Error::InvalidParameter(format!(
            "telegraph rates need 0 < a < b, got a = {a}, b = {b}"
        )));
    }
    Ok(())
}

/// Draws from the invariant law of the telegraph process by inverse
/// transform: position is Laplace with rate b - a, mode is uniform.
/// `u` and `v` are the two uniforms consumed.
pub fn telegraph_invariant_sample(u: f64, v: f64, a: f64, b: f64) -> Result<(f64, ModeId)> {
    check_telegraph_params(a, b)?;
    if !(u > 0.0 && u < 1.0 && (0.0..1.0).contains(&v)) {
        return Err(Error::InvalidParameter(format!(
            "uniforms out of range: u = {u}, v = {v}"
        )));
    }
    let x = if u < 0.5 {
        (2.0 * u).ln() / (b - a)
    } else if u > 0.5 {
        -(2.0 * (1.0 - u)).ln() / (b - a)
    } else {
        0.0
    };
    let mode = if v < 0.5 { 0 } else { 1 };
    Ok((x, mode))
}

/// Telegraph process on the line: speed 1, switching rate `a` while moving
/// toward the origin or at it, `b` while moving away. Starts from the
/// invariant law.
pub fn telegraph1d(a: f64, b: f64) -> Result<ProcessModel<1>> {
    check_telegraph_params(a, b)?;
    let rate = move |x: &[f64; 1], mode: ModeId| {
        if x[0] * TELEGRAPH_VELOCITIES[mode] <= 0.0 {
            a
        } else {
            b
        }
    };
    let model = ProcessModel::new(
        "telegraph1d",
        vec![
            Flow::linear([TELEGRAPH_VELOCITIES[0]]),
            Flow::linear([TELEGRAPH_VELOCITIES[1]]),
        ],
        rate,
        |x, mode, _| (*x, 1 - mode),
        move |rng| {
            let (u, v) = (rng.gen::<f64>(), rng.gen::<f64>());
            let (x, mode) =
                telegraph_invariant_sample(u, v, a, b).expect("validated at construction");
            ([x], mode)
        },
    )?;
    // Along an arc x(t) y = x y + t, so the rate changes at most once, when
    // the path crosses the origin while heading toward it.
    Ok(model.with_arc_rate(move |x: &[f64; 1], mode: ModeId| {
        let xy = x[0] * TELEGRAPH_VELOCITIES[mode];
        if xy < 0.0 {
            PiecewiseConstRate {
                pieces: vec![(-xy, a)],
                tail: b,
            }
        } else {
            PiecewiseConstRate::constant(b)
        }
    }))
}

/// A potential on the line with its derivative.
#[derive(Clone)]
pub struct Potential {
    value: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    derivative: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl Potential {
    pub fn new(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Potential {
            value: Arc::new(value),
            derivative: Arc::new(derivative),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (self.derivative)(x)
    }
}

/// The asymmetric double-well potential 0.05 (x^4 + x^3 - 4 x^2), whose
/// deeper well sits left of the origin.
pub fn double_well_potential() -> Potential {
    Potential::new(
        |x| 0.05 * (x.powi(4) + x.powi(3) - 4.0 * x * x),
        |x| 0.05 * (4.0 * x.powi(3) + 3.0 * x * x - 8.0 * x),
    )
}

const GIBBS_HALF_WIDTH: f64 = 8.0;
const GIBBS_TABLE_CELLS: usize = 1 << 14;

/// Inverse-transform sampler for a density proportional to exp(-beta U) on
/// [-half_width, half_width], tabulated on a uniform grid.
struct GibbsTable {
    half_width: f64,
    cumulative: Vec<f64>,
}

impl GibbsTable {
    fn build(beta: f64, potential: &Potential, half_width: f64, cells: usize) -> Result<Self> {
        let dx = 2.0 * half_width / cells as f64;
        let weights: Vec<f64> = (0..=cells)
            .map(|k| (-beta * potential.value(-half_width + k as f64 * dx)).exp())
            .collect();
        let mut cumulative = Vec::with_capacity(cells + 1);
        cumulative.push(0.0);
        for k in 0..cells {
            let prev = cumulative[k];
            cumulative.push(prev + 0.5 * (weights[k] + weights[k + 1]) * dx);
        }
        let total = *cumulative.last().expect("nonempty");
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::Numeric(format!(
                "Gibbs weight exp(-beta U) has non-normalizable mass {total} on the sampling window"
            )));
        }
        Ok(GibbsTable {
            half_width,
            cumulative,
        })
    }

    fn sample(&self, u: f64) -> f64 {
        let total = *self.cumulative.last().expect("nonempty");
        let target = u * total;
        let k = match self
            .cumulative
            .partition_point(|&c| c <= target)
            .checked_sub(1)
        {
            Some(k) => k.min(self.cumulative.len() - 2),
            None => 0,
        };
        let lo = self.cumulative[k];
        let hi = self.cumulative[k + 1];
        let frac = if hi > lo {
            (target - lo) / (hi - lo)
        } else {
            0.5
        };
        let cells = self.cumulative.len() - 1;
        let dx = 2.0 * self.half_width / cells as f64;
        -self.half_width + (k as f64 + frac) * dx
    }
}

/// Switching sampler driven by a potential: speed 1, mode flip at rate
/// beta max(y U'(x), 0) where y is the current velocity sign. Starts from
/// the Gibbs law proportional to exp(-beta U) with a uniform mode, sampled
/// by inverse transform on a fixed table.
pub fn pdsa(beta: f64, potential: Potential) -> Result<ProcessModel<1>> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "inverse temperature must be positive, got {beta}"
        )));
    }
    let table = GibbsTable::build(beta, &potential, GIBBS_HALF_WIDTH, GIBBS_TABLE_CELLS)?;
    let du = Arc::clone(&potential.derivative);
    ProcessModel::new(
        "pdsa",
        vec![
            Flow::linear([TELEGRAPH_VELOCITIES[0]]),
            Flow::linear([TELEGRAPH_VELOCITIES[1]]),
        ],
        move |x: &[f64; 1], mode: ModeId| (beta * TELEGRAPH_VELOCITIES[mode] * du(x[0])).max(0.0),
        |x, mode, _| (*x, 1 - mode),
        move |rng| {
            let x = table.sample(rng.gen::<f64>());
            let mode = if rng.gen::<f64>() < 0.5 { 0 } else { 1 };
            ([x], mode)
        },
    )
}

/// Open quadrants of the plane with their boundary halves attached so that
/// every point lands in exactly one region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrant {
    NorthEast,
    SouthEast,
    SouthWest,
    NorthWest,
}

/// Region of a planar point: the right half-plane x1 >= 0 splits at x2 = 0
/// into northeast and southeast, the left half at x2 = 0 into northwest and
/// southwest, with the negative x1-axis assigned to the southwest.
pub fn quadrant(x: &[f64; 2]) -> Quadrant {
    if x[0] >= 0.0 {
        if x[1] >= 0.0 {
            Quadrant::NorthEast
        } else {
            Quadrant::SouthEast
        }
    } else if x[1] <= 0.0 {
        Quadrant::SouthWest
    } else {
        Quadrant::NorthWest
    }
}

/// Switch destination and rate for the planar telegraph process. Each
/// quadrant turns one inbound direction at full rate, slows the same turn
/// from the other inbound direction to rate `b`, reverses at rate `a`, and
/// leaves the outbound direction free. `None` means the mode never switches
/// in that quadrant.
fn planar_switch(q: Quadrant, mode: ModeId, a: f64, b: f64) -> Option<(ModeId, f64)> {
    const NORTH: ModeId = 0;
    const SOUTH: ModeId = 1;
    const EAST: ModeId = 2;
    const WEST: ModeId = 3;
    match q {
        Quadrant::NorthEast => match mode {
            EAST => Some((SOUTH, 1.0)),
            NORTH => Some((SOUTH, b)),
            SOUTH => Some((NORTH, a)),
            _ => None,
        },
        Quadrant::SouthWest => match mode {
            WEST => Some((NORTH, 1.0)),
            SOUTH => Some((NORTH, b)),
            NORTH => Some((SOUTH, a)),
            _ => None,
        },
        Quadrant::NorthWest => match mode {
            NORTH => Some((EAST, 1.0)),
            WEST => Some((EAST, b)),
            EAST => Some((WEST, a)),
            _ => None,
        },
        Quadrant::SouthEast => match mode {
            SOUTH => Some((WEST, 1.0)),
            EAST => Some((WEST, b)),
            WEST => Some((EAST, a)),
            _ => None,
        },
    }
}

/// Planar telegraph process: four unit-speed cardinal modes with
/// quadrant-dependent switching that steers the path around the origin.
/// Starts uniformly on [-1, 1]^2 with a uniform mode.
pub fn telegraph2d(a: f64, b: f64) -> Result<ProcessModel<2>> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "switch rates must be positive, got a = {a}, b = {b}"
        )));
    }
    let flows = CARDINAL_VELOCITIES
        .iter()
        .map(|&v| Flow::linear(v))
        .collect();
    let model = ProcessModel::new(
        "telegraph2d",
        flows,
        move |x: &[f64; 2], mode: ModeId| {
            planar_switch(quadrant(x), mode, a, b).map_or(0.0, |(_, r)| r)
        },
        move |x, mode, _| {
            let next = planar_switch(quadrant(x), mode, a, b).map_or(mode, |(m, _)| m);
            (*x, next)
        },
        |rng| {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            (x, rng.gen_range(0..4))
        },
    )?;
    // Only one coordinate moves per mode, so the quadrant changes at most
    // once along an arc, when that coordinate reaches zero while shrinking
    // in absolute value. Rates are sampled at interior points of the two
    // stretches; boundary instants carry no mass in the integrated rate.
    Ok(model.with_arc_rate(move |x: &[f64; 2], mode: ModeId| {
        let moving = if mode < 2 { 1 } else { 0 };
        let v = CARDINAL_VELOCITIES[mode];
        let rate_at = |t: f64| {
            let p = [x[0] + t * v[0], x[1] + t * v[1]];
            planar_switch(quadrant(&p), mode, a, b).map_or(0.0, |(_, r)| r)
        };
        if v[moving] * x[moving] < 0.0 {
            let t0 = -x[moving] / v[moving];
            PiecewiseConstRate {
                pieces: vec![(t0, rate_at(0.5 * t0))],
                tail: rate_at(t0 + 1.0),
            }
        } else {
            PiecewiseConstRate::constant(rate_at(1.0))
        }
    }))
}
