//! Crossing surfaces: levels on the line, oriented segments and polylines in
//! the plane, with unit normals, signed defining functions, and quadrature
//! against the length measure.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom;

/// A 1D crossing target, the single point `x_star`. The normal convention on
/// the line is the constant +1, so upward crossings move left to right.
///
/// Exact counting assumes every mode has nonzero speed at the level;
/// near-tangent crossings are flagged by the counter when that fails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub x_star: f64,
}

impl Level {
    pub fn new(x_star: f64) -> Self {
        Level { x_star }
    }

    /// Signed offset from the level; negative below, positive above.
    pub fn defining(&self, x: f64) -> f64 {
        x - self.x_star
    }

    /// Closed delta-window indicator around the level.
    pub fn within(&self, x: f64, delta: f64) -> bool {
        (x - self.x_star).abs() <= delta
    }
}

/// An oriented planar segment [A, B]. The unit normal is the
/// counterclockwise quarter turn of the direction, so swapping the endpoints
/// flips the normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    a: [f64; 2],
    b: [f64; 2],
}

impl Segment {
    pub fn new(a: [f64; 2], b: [f64; 2]) -> Result<Self> {
        if a == b {
            return Err(Error::InvalidParameter(
                "segment endpoints must be distinct".into(),
            ));
        }
        if !(a.iter().chain(b.iter()).all(|c| c.is_finite())) {
            return Err(Error::InvalidParameter(
                "segment endpoints must be finite".into(),
            ));
        }
        Ok(Segment { a, b })
    }

    pub fn a(&self) -> [f64; 2] {
        self.a
    }

    pub fn b(&self) -> [f64; 2] {
        self.b
    }

    pub fn length(&self) -> f64 {
        geom::norm(geom::sub(self.b, self.a))
    }

    /// Unit direction from A to B.
    pub fn direction(&self) -> [f64; 2] {
        geom::scale(geom::sub(self.b, self.a), 1.0 / self.length())
    }

    /// Unit normal, the counterclockwise quarter turn of the direction.
    pub fn normal(&self) -> [f64; 2] {
        geom::rot90(self.direction())
    }

    /// Point at fraction `s` of the way from A to B.
    pub fn point_at(&self, s: f64) -> [f64; 2] {
        geom::add(self.a, geom::scale(geom::sub(self.b, self.a), s))
    }

    /// Distance from `x` to the closed segment.
    pub fn distance_to(&self, x: [f64; 2]) -> f64 {
        geom::point_segment_distance(x, self.a, self.b)
    }

    /// Signed perpendicular distance from `x` to the segment's supporting
    /// line; positive on the side the normal points to.
    pub fn line_offset(&self, x: [f64; 2]) -> f64 {
        geom::dot(geom::sub(x, self.a), self.normal())
    }

    /// Fraction along [A, B] of the orthogonal projection of `x`.
    pub fn projection_fraction(&self, x: [f64; 2]) -> f64 {
        let ab = geom::sub(self.b, self.a);
        geom::dot(geom::sub(x, self.a), ab) / geom::dot(ab, ab)
    }
}

/// An oriented piecewise-linear surface: an ordered list of segments with a
/// signed defining function, negative strictly inside and positive strictly
/// outside. Closed polylines (the squares) use an exact defining function;
/// a single free-standing segment uses its supporting line's signed offset.
#[derive(Clone)]
pub struct PolylineSurface {
    segments: Vec<Segment>,
    defining: Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>,
    closed: bool,
}

impl std::fmt::Debug for PolylineSurface {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PolylineSurface")
            .field("segments", &self.segments)
            .field("closed", &self.closed)
            .finish()
    }
}

impl PolylineSurface {
    /// Builds a surface from oriented segments and a signed defining
    /// function. `closed` declares that the defining function's zero set is
    /// exactly the union of the segments (true for the squares), which lets
    /// the exact counter skip membership checks at roots.
    pub fn new(
        segments: Vec<Segment>,
        defining: Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>,
        closed: bool,
    ) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidParameter(
                "polyline surface needs at least one segment".into(),
            ));
        }
        Ok(PolylineSurface {
            segments,
            defining,
            closed,
        })
    }

    /// The axis-aligned square with vertices (±c, ±c), oriented so that every
    /// edge normal points outward, with defining function
    /// max(|x1|, |x2|) − c.
    pub fn square(c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidParameter("square needs c > 0".into()));
        }
        // Each edge is ordered so that the counterclockwise quarter turn of
        // its direction points away from the origin.
        let segments = vec![
            Segment::new([c, c], [c, -c])?,   // right, normal (1, 0)
            Segment::new([c, -c], [-c, -c])?, // bottom, normal (0, -1)
            Segment::new([-c, -c], [-c, c])?, // left, normal (-1, 0)
            Segment::new([-c, c], [c, c])?,   // top, normal (0, 1)
        ];
        let defining = Arc::new(move |x: [f64; 2]| x[0].abs().max(x[1].abs()) - c);
        PolylineSurface::new(segments, defining, true)
    }

    /// Wraps a single segment as an open surface; the defining function is
    /// the signed offset to the supporting line, so roots found along it must
    /// additionally fall within the segment.
    pub fn from_segment(seg: Segment) -> Self {
        let defining = Arc::new(move |x: [f64; 2]| seg.line_offset(x));
        PolylineSurface {
            segments: vec![seg],
            defining,
            closed: false,
        }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Signed defining function; negative inside, positive outside.
    pub fn defining(&self, x: [f64; 2]) -> f64 {
        (self.defining)(x)
    }

    /// Distance to the union of segments.
    pub fn distance_to(&self, x: [f64; 2]) -> f64 {
        self.segments
            .iter()
            .map(|s| s.distance_to(x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Total length of all segments.
    pub fn perimeter(&self) -> f64 {
        self.segments.iter().map(|s| s.length()).sum()
    }
}

/// Outward unit normal of a polyline surface at an on-surface point.
///
/// Fails if `x` is farther than `tol` from the surface or sits at a vertex
/// shared by segments with different normals, where no normal is defined.
pub fn normal_at(surface: &PolylineSurface, x: [f64; 2], tol: f64) -> Result<[f64; 2]> {
    let mut hits: Vec<&Segment> = Vec::new();
    for seg in surface.segments() {
        if seg.distance_to(x) <= tol {
            hits.push(seg);
        }
    }
    match hits.len() {
        0 => Err(Error::InvalidParameter(format!(
            "point ({}, {}) does not lie on the surface",
            x[0], x[1]
        ))),
        1 => Ok(hits[0].normal()),
        _ => {
            let n0 = hits[0].normal();
            if hits
                .iter()
                .all(|s| geom::norm(geom::sub(s.normal(), n0)) <= 1e-12)
            {
                Ok(n0)
            } else {
                Err(Error::VertexNormal { x: x[0], y: x[1] })
            }
        }
    }
}

/// Composite midpoint quadrature along segments.
///
/// Each segment of length L is split into ceil(L / step) equal panels and
/// sampled at panel midpoints, which integrates affine functions exactly.
#[derive(Debug, Clone, Copy)]
pub struct SurfaceQuadrature {
    pub step: f64,
}

impl Default for SurfaceQuadrature {
    fn default() -> Self {
        SurfaceQuadrature { step: 0.1 }
    }
}

impl SurfaceQuadrature {
    pub fn new(step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::InvalidParameter(
                "quadrature step must be positive".into(),
            ));
        }
        Ok(SurfaceQuadrature { step })
    }

    /// Quadrature nodes as (point, segment normal, weight) triples.
    pub fn nodes(&self, segments: &[Segment]) -> Vec<([f64; 2], [f64; 2], f64)> {
        let mut out = Vec::new();
        for seg in segments {
            let len = seg.length();
            let panels = (len / self.step).ceil().max(1.0) as usize;
            let w = len / panels as f64;
            let nu = seg.normal();
            for k in 0..panels {
                let s = (k as f64 + 0.5) / panels as f64;
                out.push((seg.point_at(s), nu, w));
            }
        }
        out
    }

    /// Integral of `f` against the length measure over the segments.
    pub fn integrate(
        &self,
        segments: &[Segment],
        mut f: impl FnMut([f64; 2]) -> f64,
    ) -> Result<f64> {
        let mut acc = 0.0;
        for (point, _, w) in self.nodes(segments) {
            let v = f(point);
            if v.is_nan() {
                return Err(Error::Numeric(format!(
                    "integrand returned NaN at quadrature point ({}, {})",
                    point[0], point[1]
                )));
            }
            acc += w * v;
        }
        Ok(acc)
    }
}

/// Composite midpoint approximation of the line integral of `f` over the
/// segments of a surface.
pub fn surface_integral(
    segments: &[Segment],
    f: impl FnMut([f64; 2]) -> f64,
    step: f64,
) -> Result<f64> {
    SurfaceQuadrature::new(step)?.integrate(segments, f)
}

/// True iff `x` lies in the closed delta-tube of the segments.
pub fn tube_indicator(segments: &[Segment], x: [f64; 2], delta: f64) -> bool {
    segments.iter().any(|s| s.distance_to(x) <= delta)
}

/// Quadrature nodes (point, outward normal, weight) against the surface
/// measure, the shape the plug-in estimators integrate over. A level is a
/// point mass, so its single node carries weight 1 and the estimators
/// reduce to plain evaluation there.
pub trait QuadratureNodes<const D: usize> {
    fn quadrature_nodes(&self, step: f64) -> Vec<([f64; D], [f64; D], f64)>;
}

impl QuadratureNodes<1> for Level {
    fn quadrature_nodes(&self, _step: f64) -> Vec<([f64; 1], [f64; 1], f64)> {
        vec![([self.x_star], [1.0], 1.0)]
    }
}

impl QuadratureNodes<2> for Segment {
    fn quadrature_nodes(&self, step: f64) -> Vec<([f64; 2], [f64; 2], f64)> {
        SurfaceQuadrature { step }.nodes(std::slice::from_ref(self))
    }
}

impl QuadratureNodes<2> for PolylineSurface {
    fn quadrature_nodes(&self, step: f64) -> Vec<([f64; 2], [f64; 2], f64)> {
        SurfaceQuadrature { step }.nodes(self.segments())
    }
}

/// Surface description as it appears in config files.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SurfaceSpec {
    Level {
        x: f64,
    },
    Segment {
        #[serde(rename = "A")]
        a: [f64; 2],
        #[serde(rename = "B")]
        b: [f64; 2],
    },
    Square {
        c: f64,
    },
}

/// A built surface of either dimension.
#[derive(Debug, Clone)]
pub enum Surface {
    Level(Level),
    Segment(Segment),
    Polyline(PolylineSurface),
}

impl SurfaceSpec {
    pub fn build(&self) -> Result<Surface> {
        match *self {
            SurfaceSpec::Level { x } => Ok(Surface::Level(Level::new(x))),
            SurfaceSpec::Segment { a, b } => Ok(Surface::Segment(Segment::new(a, b)?)),
            SurfaceSpec::Square { c } => Ok(Surface::Polyline(PolylineSurface::square(c)?)),
        }
    }
}

impl Surface {
    /// State dimension the surface lives in.
    pub fn dim(&self) -> usize {
        match self {
            Surface::Level(_) => 1,
            _ => 2,
        }
    }
}
