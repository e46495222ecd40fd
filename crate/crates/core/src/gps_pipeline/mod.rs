//! GPS trajectory pipeline: CSV ingestion, daily regridding, data-driven
//! speed projections on segments, and crossing-count-versus-distance curves
//! over segment families.
//!
//! Coordinates are decimal degrees (longitude, latitude); the time unit is
//! the hour, one trajectory per UTC day. Recorded speed and heading convert
//! to degree-per-hour velocity vectors through a fixed reference latitude.

mod lowess;

pub use lowess::lowess;

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{DateTime, Duration, NaiveDate, SecondsFormat, Timelike, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density_estimation::BandwidthMethod;
use crate::error::{Error, Result};
use crate::estimators::{
    kr_nonstationary, monte_carlo, KrConfig, SpeedProjection, SpeedSource, TimeQuadrature,
};
use crate::geom;
use crate::psp_sim::{simulate_event, telegraph2d, GridTrajectory, CARDINAL_VELOCITIES};
use crate::rng::trajectory_rng;
use crate::surfaces::Segment;

/// Meters per degree of latitude.
pub const METERS_PER_DEGREE_LAT: f64 = 111_200.0;
/// Meters per degree of longitude at the equator; scale by cos(latitude).
pub const METERS_PER_DEGREE_LON_EQUATOR: f64 = 111_320.0;
/// Reference latitude of the study area, degrees north.
pub const DEFAULT_REF_LAT: f64 = 53.6;
/// Points on the daily grid; the step is 24h / (points - 1).
pub const DAILY_GRID_POINTS: usize = 468;
/// Smoothing span for speed projection sequences.
pub const DEFAULT_LOWESS_SPAN: f64 = 2.0 / 3.0;
/// Robustness rounds for speed projection smoothing.
pub const DEFAULT_LOWESS_ITERATIONS: usize = 3;

/// How a recorded heading maps to an (east, north) direction.
///
/// `NorthClockwise` reads the heading as degrees clockwise from north, the
/// convention GPS receivers record, giving (east, north) =
/// (sin h, cos h). `EastClockwiseLiteral` instead measures clockwise from
/// east and takes (cos, sin) of that angle directly, which negates the
/// north component; it exists so the two readings can be compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadingConvention {
    #[default]
    NorthClockwise,
    EastClockwiseLiteral,
}

/// One GPS fix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpsRecord {
    /// Animal identifier, when the source file carries one.
    pub id: Option<String>,
    pub timestamp: DateTime<Utc>,
    /// Decimal degrees, [-90, 90].
    pub lat: f64,
    /// Decimal degrees, [-180, 180].
    pub lon: f64,
    /// Meters per second, nonnegative.
    pub ground_speed: f64,
    /// Degrees clockwise from north, [0, 360).
    pub heading: f64,
}

impl GpsRecord {
    pub fn validate(&self) -> Result<()> {
        if !(-90.0..=90.0).contains(&self.lat) {
            return Err(Error::Data(format!(
                "latitude {} out of [-90, 90]",
                self.lat
            )));
        }
        if !(-180.0..=180.0).contains(&self.lon) {
            return Err(Error::Data(format!(
                "longitude {} out of [-180, 180]",
                self.lon
            )));
        }
        if !(self.ground_speed >= 0.0) {
            return Err(Error::Data(format!(
                "ground speed {} is negative",
                self.ground_speed
            )));
        }
        if !(0.0..360.0).contains(&self.heading) {
            return Err(Error::Data(format!(
                "heading {} out of [0, 360)",
                self.heading
            )));
        }
        Ok(())
    }
}

/// Column names in a source CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub timestamp: String,
    pub lat: String,
    pub lon: String,
    pub ground_speed: String,
    pub heading: String,
    /// Optional animal-id column; records group per id when present.
    pub id: Option<String>,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            timestamp: "timestamp".into(),
            lat: "location-lat".into(),
            lon: "location-long".into(),
            ground_speed: "ground-speed".into(),
            heading: "heading".into(),
            id: None,
        }
    }
}

/// Ingestion output: sorted records plus the count of rows dropped for
/// unparseable timestamps.
#[derive(Debug, Clone)]
pub struct IngestReport {
    pub records: Vec<GpsRecord>,
    pub skipped_timestamps: usize,
}

fn parse_timestamp(text: &str) -> Option<DateTime<Utc>> {
    let text = text.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(text) {
        return Some(t.with_timezone(&Utc));
    }
    for format in ["%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M:%S%.f"] {
        if let Ok(t) = chrono::NaiveDateTime::parse_from_str(text, format) {
            return Some(t.and_utc());
        }
    }
    None
}

/// Reads GPS records from a CSV file, sorted chronologically (per id when
/// an id column is mapped). Rows whose timestamp does not parse are
/// skipped and counted; rows with invalid field values are errors.
pub fn ingest_csv(path: impl AsRef<Path>, columns: &ColumnMap) -> Result<IngestReport> {
    let mut reader = csv::Reader::from_path(path.as_ref())?;
    let headers = reader.headers()?.clone();
    let index_of = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data(format!("missing column `{name}`")))
    };
    let c_time = index_of(&columns.timestamp)?;
    let c_lat = index_of(&columns.lat)?;
    let c_lon = index_of(&columns.lon)?;
    let c_speed = index_of(&columns.ground_speed)?;
    let c_heading = index_of(&columns.heading)?;
    let c_id = columns.id.as_deref().map(index_of).transpose()?;
    let mut records = Vec::new();
    let mut skipped_timestamps = 0usize;
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let field = |c: usize| {
            row.get(c)
                .ok_or_else(|| Error::Data(format!("row {line}: too few fields")))
        };
        let timestamp = match parse_timestamp(field(c_time)?) {
            Some(t) => t,
            None => {
                skipped_timestamps += 1;
                continue;
            }
        };
        let number = |c: usize, name: &str| -> Result<f64> {
            let raw = field(c)?;
            raw.trim()
                .parse()
                .map_err(|_| Error::Data(format!("row {line}: unparseable {name} value `{raw}`")))
        };
        let record = GpsRecord {
            id: c_id.map(|c| field(c).map(str::to_owned)).transpose()?,
            timestamp,
            lat: number(c_lat, "latitude")?,
            lon: number(c_lon, "longitude")?,
            ground_speed: number(c_speed, "ground speed")?,
            heading: number(c_heading, "heading")?,
        };
        record
            .validate()
            .map_err(|e| Error::Data(format!("row {line}: {e}")))?;
        records.push(record);
    }
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    records.sort_by(|p, q| p.id.cmp(&q.id).then(p.timestamp.cmp(&q.timestamp)));
    Ok(IngestReport {
        records,
        skipped_timestamps,
    })
}

/// Converts a record's speed and heading to a (v_lon, v_lat) velocity in
/// degrees per hour at the given reference latitude.
pub fn velocity_vector(record: &GpsRecord, ref_lat: f64) -> Result<[f64; 2]> {
    velocity_vector_with(record, ref_lat, HeadingConvention::NorthClockwise)
}

/// [`velocity_vector`] under an explicit heading convention.
pub fn velocity_vector_with(
    record: &GpsRecord,
    ref_lat: f64,
    convention: HeadingConvention,
) -> Result<[f64; 2]> {
    if !(ref_lat.abs() < 89.0) {
        return Err(Error::InvalidParameter(format!(
            "reference latitude {ref_lat} too close to a pole for the longitude conversion"
        )));
    }
    let h = record.heading.to_radians();
    let v = record.ground_speed;
    let (east, north) = match convention {
        HeadingConvention::NorthClockwise => (v * h.sin(), v * h.cos()),
        HeadingConvention::EastClockwiseLiteral => (v * h.sin(), -v * h.cos()),
    };
    Ok([
        3600.0 * east / (METERS_PER_DEGREE_LON_EQUATOR * ref_lat.to_radians().cos()),
        3600.0 * north / METERS_PER_DEGREE_LAT,
    ])
}

/// Regridding parameters: day retention bounds by record count, target grid
/// size, and the velocity conversion settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegridConfig {
    pub min_count: usize,
    pub max_count: usize,
    pub n_points: usize,
    pub ref_lat: f64,
    pub heading: HeadingConvention,
}

impl Default for RegridConfig {
    fn default() -> Self {
        RegridConfig {
            min_count: 440,
            max_count: 467,
            n_points: DAILY_GRID_POINTS,
            ref_lat: DEFAULT_REF_LAT,
            heading: HeadingConvention::NorthClockwise,
        }
    }
}

/// One animal-day on the common grid: positions (lon, lat) in decimal
/// degrees, velocities in degrees per hour, horizon 24 hours.
#[derive(Debug, Clone)]
pub struct DayTrajectory {
    pub id: Option<String>,
    pub date: NaiveDate,
    pub grid: GridTrajectory<2>,
}

fn hours_into_day(t: &DateTime<Utc>) -> f64 {
    (t.time().num_seconds_from_midnight() as f64 + t.time().nanosecond() as f64 * 1e-9) / 3600.0
}

/// Splits records into UTC days, keeps days whose record count lies in
/// [min_count, max_count], and interpolates each onto the common grid.
/// Positions are linearly interpolated (clamped outside the recorded
/// span); each grid point's velocity comes from the nearest record.
pub fn slice_and_regrid(
    records: &[GpsRecord],
    config: &RegridConfig,
) -> Result<Vec<DayTrajectory>> {
    if config.n_points < 2 {
        return Err(Error::InvalidParameter(
            "regrid needs at least 2 grid points".into(),
        ));
    }
    if config.min_count > config.max_count {
        return Err(Error::InvalidParameter(format!(
            "retention bounds are inverted: {} > {}",
            config.min_count, config.max_count
        )));
    }
    let mut groups: BTreeMap<(Option<String>, NaiveDate), Vec<&GpsRecord>> = BTreeMap::new();
    for record in records {
        groups
            .entry((record.id.clone(), record.timestamp.date_naive()))
            .or_default()
            .push(record);
    }
    let mut days = Vec::new();
    for ((id, date), mut group) in groups {
        if !(config.min_count..=config.max_count).contains(&group.len()) {
            continue;
        }
        if group.len() < 2 {
            return Err(Error::Data(format!(
                "day {date} has {} record(s); interpolation needs at least 2",
                group.len()
            )));
        }
        group.sort_by_key(|r| r.timestamp);
        let times: Vec<f64> = group.iter().map(|r| hours_into_day(&r.timestamp)).collect();
        let mut positions = Vec::with_capacity(config.n_points);
        let mut velocities = Vec::with_capacity(config.n_points);
        let mut cursor = 0usize;
        for j in 0..config.n_points {
            let t = 24.0 * j as f64 / (config.n_points - 1) as f64;
            while cursor + 1 < times.len() && times[cursor + 1] <= t {
                cursor += 1;
            }
            let position = if t <= times[0] {
                [group[0].lon, group[0].lat]
            } else if cursor + 1 >= times.len() {
                let last = group[times.len() - 1];
                [last.lon, last.lat]
            } else {
                let (t0, t1) = (times[cursor], times[cursor + 1]);
                let (p, q) = (group[cursor], group[cursor + 1]);
                let s = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
                [p.lon + s * (q.lon - p.lon), p.lat + s * (q.lat - p.lat)]
            };
            let nearest = if cursor + 1 < times.len()
                && (times[cursor + 1] - t).abs() < (t - times[cursor]).abs()
            {
                group[cursor + 1]
            } else {
                group[cursor]
            };
            positions.push(position);
            velocities.push(velocity_vector_with(
                nearest,
                config.ref_lat,
                config.heading,
            )?);
        }
        days.push(DayTrajectory {
            id,
            date,
            grid: GridTrajectory::from_parts(24.0, positions, Some(velocities), None)?,
        });
    }
    Ok(days)
}

/// Data-estimated speed projection on one segment: neighborhood means of
/// positive and negative normal projections at the walk points, smoothed,
/// evaluable anywhere on the segment by linear interpolation.
#[derive(Debug, Clone)]
pub struct SegmentSpeedProfile {
    segment: Segment,
    fractions: Vec<f64>,
    positive: Vec<f64>,
    negative: Vec<f64>,
    raw_positive: Vec<f64>,
    raw_negative: Vec<f64>,
    /// True when no dataset point was within reach of any walk point; the
    /// profile is then identically zero.
    pub no_data: bool,
}

impl SegmentSpeedProfile {
    pub fn segment(&self) -> &Segment {
        &self.segment
    }

    /// Walk-point positions as fractions of [A, B].
    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }

    /// Smoothed positive part at the walk points.
    pub fn positive(&self) -> &[f64] {
        &self.positive
    }

    /// Smoothed negative part at the walk points.
    pub fn negative(&self) -> &[f64] {
        &self.negative
    }

    /// Neighborhood means before smoothing.
    pub fn raw_positive(&self) -> &[f64] {
        &self.raw_positive
    }

    /// Neighborhood means before smoothing.
    pub fn raw_negative(&self) -> &[f64] {
        &self.raw_negative
    }

    /// (positive, negative) parts at a fraction of [A, B], interpolated
    /// linearly between walk points and clamped to the walked range.
    pub fn eval(&self, fraction: f64) -> (f64, f64) {
        let last = self.fractions.len() - 1;
        if fraction <= self.fractions[0] {
            return (self.positive[0], self.negative[0]);
        }
        if fraction >= self.fractions[last] {
            return (self.positive[last], self.negative[last]);
        }
        let hi = self.fractions.partition_point(|&f| f < fraction).max(1);
        let (f0, f1) = (self.fractions[hi - 1], self.fractions[hi]);
        let s = (fraction - f0) / (f1 - f0);
        (
            self.positive[hi - 1] + s * (self.positive[hi] - self.positive[hi - 1]),
            self.negative[hi - 1] + s * (self.negative[hi] - self.negative[hi - 1]),
        )
    }

    /// (positive, negative) parts at a point, through its orthogonal
    /// projection onto the segment.
    pub fn eval_at(&self, x: [f64; 2]) -> (f64, f64) {
        self.eval(self.segment.projection_fraction(x).clamp(0.0, 1.0))
    }

    /// Wraps the profile as a pointwise speed projection for the plug-in
    /// estimators.
    pub fn to_projection(&self) -> SpeedProjection<2> {
        let profile = self.clone();
        SpeedProjection::from_field(
            move |x: &[f64; 2], _nu: &[f64; 2]| profile.eval_at(*x),
            SpeedSource::DataEstimated,
        )
    }
}

/// Estimates the speed projection on `segment` from regridded days.
///
/// Walk points rho_k = A + k dx (B - A), k = 0..floor(1/dx), collect every
/// dataset point within `epsilon`; the positive and negative parts of each
/// neighborhood's velocity projections onto the segment normal are averaged
/// (an empty neighborhood contributes zero) and the two sequences smoothed.
pub fn speed_projection_estimate(
    days: &[DayTrajectory],
    segment: &Segment,
    epsilon: f64,
    dx: f64,
) -> Result<SegmentSpeedProfile> {
    if days.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "exploration distance must be positive, got {epsilon}"
        )));
    }
    if !(dx > 0.0 && dx <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "walk step must lie in (0, 1], got {dx}"
        )));
    }
    let nu = segment.normal();
    // Any point within epsilon of a walk point is within epsilon of the
    // segment, so the quadratic scan only runs over near-segment points.
    let mut near: Vec<([f64; 2], [f64; 2])> = Vec::new();
    for day in days {
        let velocities = day.grid.velocities().ok_or_else(|| {
            Error::InvalidParameter(
                "speed projection needs velocities; regrid the records first".into(),
            )
        })?;
        for (p, v) in day.grid.samples().iter().zip(velocities) {
            if segment.distance_to(*p) <= epsilon {
                near.push((*p, *v));
            }
        }
    }
    let count = (1.0 / dx).floor() as usize + 1;
    let mut fractions = Vec::with_capacity(count);
    let mut raw_positive = Vec::with_capacity(count);
    let mut raw_negative = Vec::with_capacity(count);
    let mut no_data = true;
    for k in 0..count {
        let fraction = k as f64 * dx;
        let rho = segment.point_at(fraction);
        let mut pos = 0.0;
        let mut neg = 0.0;
        let mut hits = 0usize;
        for (p, v) in &near {
            if geom::norm(geom::sub(*p, rho)) <= epsilon {
                let toward = geom::dot(*v, nu);
                pos += toward.max(0.0);
                neg += (-toward).max(0.0);
                hits += 1;
            }
        }
        if hits > 0 {
            no_data = false;
            pos /= hits as f64;
            neg /= hits as f64;
        }
        fractions.push(fraction);
        raw_positive.push(pos);
        raw_negative.push(neg);
    }
    // Smoothing can dip below zero near sharp features; the parts are
    // nonnegative by definition, so clamp.
    let smooth = |ys: &[f64]| -> Result<Vec<f64>> {
        Ok(lowess(
            &fractions,
            ys,
            DEFAULT_LOWESS_SPAN,
            DEFAULT_LOWESS_ITERATIONS,
        )?
        .into_iter()
        .map(|v| v.max(0.0))
        .collect())
    };
    Ok(SegmentSpeedProfile {
        segment: *segment,
        positive: smooth(&raw_positive)?,
        negative: smooth(&raw_negative)?,
        fractions,
        raw_positive,
        raw_negative,
        no_data,
    })
}

/// Which way a segment family marches from the reference point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Sea,
    Inland,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Sea => "sea",
            Direction::Inland => "inland",
        }
    }
}

/// An ordered family of crossing segments with their distances to the
/// reference point.
#[derive(Debug, Clone)]
pub struct SegmentFamily {
    pub segments: Vec<Segment>,
    pub direction: Direction,
    pub distances: Vec<f64>,
}

/// Geometry of the two segment families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub sea_a: [f64; 2],
    pub sea_b: [f64; 2],
    pub inland_a: [f64; 2],
    pub inland_b: [f64; 2],
    /// Offset step between consecutive segments, decimal degrees.
    pub spacing: f64,
    /// Per-step rotation of the sea family, radians counterclockwise.
    pub theta: f64,
    pub count: usize,
    /// Reference point distances are measured from.
    pub origin: [f64; 2],
}

impl Default for FamilyParams {
    fn default() -> Self {
        FamilyParams {
            sea_a: [6.9, 53.7],
            sea_b: [7.5, 53.77],
            inland_a: [7.45, 53.7],
            inland_b: [8.05, 53.7],
            spacing: 0.01,
            theta: std::f64::consts::PI / 247.0,
            count: 61,
            origin: [7.7, 53.77],
        }
    }
}

/// Unit normal of [a, b] oriented away from `origin`, so families march
/// toward increasing distance.
fn outward_normal(segment: &Segment, origin: [f64; 2]) -> [f64; 2] {
    let nu = segment.normal();
    let mid = segment.point_at(0.5);
    if geom::dot(geom::sub(origin, mid), nu) > 0.0 {
        geom::scale(nu, -1.0)
    } else {
        nu
    }
}

/// Builds the sea and inland segment families.
///
/// The i-th sea segment is [AB] rotated about A by i theta and pushed out
/// i spacing along its rotated normal: A_i = A + i spacing R^i nu,
/// B_i = A + R^i (B - A + i spacing nu). The i-th inland segment is the
/// parallel translate of [A'B'] by i spacing along its normal. Both
/// normals point away from the origin.
pub fn segment_families(params: &FamilyParams) -> Result<(SegmentFamily, SegmentFamily)> {
    if params.count == 0 {
        return Err(Error::InvalidParameter(
            "segment families need count >= 1".into(),
        ));
    }
    if !(params.spacing.is_finite() && params.spacing >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "segment spacing must be finite and nonnegative, got {}",
            params.spacing
        )));
    }
    let sea_base = Segment::new(params.sea_a, params.sea_b)?;
    let inland_base = Segment::new(params.inland_a, params.inland_b)?;
    let sea_nu = outward_normal(&sea_base, params.origin);
    let inland_nu = outward_normal(&inland_base, params.origin);
    let build = |segments: Vec<Segment>, direction: Direction| {
        let distances = segments
            .iter()
            .map(|s| s.distance_to(params.origin))
            .collect();
        SegmentFamily {
            segments,
            direction,
            distances,
        }
    };
    let mut sea = Vec::with_capacity(params.count);
    let mut inland = Vec::with_capacity(params.count);
    let chord = geom::sub(params.sea_b, params.sea_a);
    for i in 0..params.count {
        let offset = i as f64 * params.spacing;
        let angle = i as f64 * params.theta;
        let a_i = geom::add(
            params.sea_a,
            geom::rotate(geom::scale(sea_nu, offset), angle),
        );
        let b_i = geom::add(
            params.sea_a,
            geom::rotate(geom::add(chord, geom::scale(sea_nu, offset)), angle),
        );
        sea.push(Segment::new(a_i, b_i)?);
        let shift = geom::scale(inland_nu, offset);
        inland.push(Segment::new(
            geom::add(params.inland_a, shift),
            geom::add(params.inland_b, shift),
        )?);
    }
    Ok((build(sea, Direction::Sea), build(inland, Direction::Inland)))
}

/// Estimation method for a crossing curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveMethod {
    Kr,
    Mc,
}

/// Crossing curve parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveConfig {
    /// Exploration distance for the speed projection, decimal degrees.
    pub epsilon: f64,
    /// Walk step for the speed projection, fraction of the segment.
    pub dx_proj: f64,
    pub bandwidth: BandwidthMethod,
    /// Line quadrature step along segments, decimal degrees.
    pub surface_step: f64,
}

impl Default for CurveConfig {
    fn default() -> Self {
        CurveConfig {
            epsilon: 0.01,
            dx_proj: 0.01,
            bandwidth: BandwidthMethod::NormalReference,
            surface_step: 0.01,
        }
    }
}

/// One point of a crossing curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub distance: f64,
    pub estimate: f64,
    pub method: CurveMethod,
    pub direction: Direction,
}

/// Estimates the daily average crossing count of every segment in the
/// family, paired with the segment's distance to the reference point.
///
/// The Monte Carlo path averages chord-crossing counts per day. The
/// plug-in path estimates the speed projection from the data, fits a
/// density per time slice across days, and integrates speed times
/// time-summed density along the segment.
pub fn crossing_curve(
    days: &[DayTrajectory],
    family: &SegmentFamily,
    method: CurveMethod,
    config: &CurveConfig,
) -> Result<Vec<CurvePoint>> {
    if days.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if method == CurveMethod::Kr && days.len() < 2 {
        return Err(Error::InvalidParameter(
            "the plug-in curve needs at least 2 days for density estimation".into(),
        ));
    }
    let grids: Vec<GridTrajectory<2>> = days.iter().map(|d| d.grid.clone()).collect();
    let kr_config = KrConfig {
        bandwidth: config.bandwidth,
        time_quadrature: TimeQuadrature::Rectangle,
        surface_step: config.surface_step,
    };
    family
        .segments
        .par_iter()
        .zip(&family.distances)
        .map(|(segment, &distance)| {
            let estimate = match method {
                CurveMethod::Mc => monte_carlo(&grids, segment)?.value,
                CurveMethod::Kr => {
                    let profile =
                        speed_projection_estimate(days, segment, config.epsilon, config.dx_proj)?;
                    let sp = profile.to_projection();
                    kr_nonstationary(&grids, segment, &sp, &kr_config)?.value
                }
            };
            Ok(CurvePoint {
                distance,
                estimate,
                method,
                direction: family.direction,
            })
        })
        .collect()
}

/// Writes curve points as CSV with columns distance, estimate, method,
/// direction.
pub fn write_curve_csv(path: impl AsRef<Path>, points: &[CurvePoint]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    for point in points {
        writer.serialize(point)?;
    }
    writer.flush()?;
    Ok(())
}

/// Synthetic GPS generation from the planar telegraph model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub rate_slow: f64,
    pub rate_fast: f64,
    pub n_days: usize,
    /// Fixes per day; keep within the regrid retention bounds.
    pub records_per_day: usize,
    /// Map origin: model origin lands here, degrees (lon, lat).
    pub center: [f64; 2],
    /// Degrees per model length unit.
    pub scale: f64,
    pub ref_lat: f64,
    pub start_date: NaiveDate,
    pub base_seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            rate_slow: 1.0,
            rate_fast: 2.0,
            n_days: 40,
            records_per_day: 460,
            center: [7.7, 53.7],
            scale: 0.05,
            ref_lat: DEFAULT_REF_LAT,
            start_date: NaiveDate::from_ymd_opt(2024, 1, 1).expect("valid date"),
            base_seed: 424242,
        }
    }
}

/// Simulates one planar telegraph trajectory per day and exports fixes with
/// speed and heading consistent with [`velocity_vector`], so ingestion and
/// regridding recover the model velocities exactly at the fixes.
///
/// Day `d` uses the same stream as trajectory `d` of replicate 0 in
/// [`crate::psp_sim::simulate_dataset`], so tests can rebuild the exact
/// underlying trajectories.
pub fn synthesize_gps(config: &SynthConfig) -> Result<Vec<GpsRecord>> {
    if config.n_days == 0 || config.records_per_day < 2 {
        return Err(Error::InvalidParameter(
            "synthesis needs at least 1 day and 2 records per day".into(),
        ));
    }
    if !(config.scale > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "degree scale must be positive, got {}",
            config.scale
        )));
    }
    if !(config.ref_lat.abs() < 89.0) {
        return Err(Error::InvalidParameter(format!(
            "reference latitude {} too close to a pole",
            config.ref_lat
        )));
    }
    let model = telegraph2d(config.rate_slow, config.rate_fast)?;
    let lon_meters = METERS_PER_DEGREE_LON_EQUATOR * config.ref_lat.to_radians().cos();
    let mut records = Vec::with_capacity(config.n_days * config.records_per_day);
    for day in 0..config.n_days {
        let mut rng = trajectory_rng(config.base_seed, 0, day as u32);
        let trajectory = simulate_event(&model, &mut rng, 24.0)?;
        let midnight = config
            .start_date
            .checked_add_signed(Duration::days(day as i64))
            .ok_or_else(|| Error::InvalidParameter("date overflow".into()))?
            .and_hms_opt(0, 0, 0)
            .expect("midnight exists")
            .and_utc();
        for i in 0..config.records_per_day {
            // Millisecond-rounded record times survive the CSV round trip.
            let t_ms = (i as f64 * 24.0 * 3_600_000.0 / config.records_per_day as f64).round();
            let t_hours = t_ms / 3_600_000.0;
            let (point, mode) = trajectory.state_at(t_hours);
            let v = CARDINAL_VELOCITIES[mode];
            let east = config.scale * v[0] * lon_meters / 3600.0;
            let north = config.scale * v[1] * METERS_PER_DEGREE_LAT / 3600.0;
            let mut heading = east.atan2(north).to_degrees();
            if heading < 0.0 {
                heading += 360.0;
            }
            if heading >= 360.0 {
                heading = 0.0;
            }
            records.push(GpsRecord {
                id: None,
                timestamp: midnight + Duration::milliseconds(t_ms as i64),
                lat: config.center[1] + config.scale * point[1],
                lon: config.center[0] + config.scale * point[0],
                ground_speed: east.hypot(north),
                heading,
            });
        }
    }
    Ok(records)
}

/// Writes records in the source CSV layout described by `columns`.
pub fn write_gps_csv(
    path: impl AsRef<Path>,
    records: &[GpsRecord],
    columns: &ColumnMap,
) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    let mut header = vec![
        columns.timestamp.as_str(),
        columns.lat.as_str(),
        columns.lon.as_str(),
        columns.ground_speed.as_str(),
        columns.heading.as_str(),
    ];
    if let Some(id) = &columns.id {
        header.push(id.as_str());
    }
    writer.write_record(&header)?;
    for record in records {
        let mut row = vec![
            record
                .timestamp
                .to_rfc3339_opts(SecondsFormat::Millis, true),
            record.lat.to_string(),
            record.lon.to_string(),
            record.ground_speed.to_string(),
            record.heading.to_string(),
        ];
        if columns.id.is_some() {
            row.push(record.id.clone().unwrap_or_default());
        }
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn record(heading: f64, speed: f64) -> GpsRecord {
        GpsRecord {
            id: None,
            timestamp: "2024-03-01T10:00:00Z".parse().unwrap(),
            lat: 53.7,
            lon: 7.5,
            ground_speed: speed,
            heading,
        }
    }

    #[test]
    fn velocity_vector_pinned_conversions() {
        let north = velocity_vector(&record(0.0, 10.0), 53.6).unwrap();
        assert_abs_diff_eq!(north[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(north[1], 0.3237410071942446, epsilon = 1e-15);
        let east = velocity_vector(&record(90.0, 10.0), 53.6).unwrap();
        assert_abs_diff_eq!(east[0], 0.5449641565128253, epsilon = 1e-12);
        assert_abs_diff_eq!(east[1], 0.0, epsilon = 1e-12);
        let still = velocity_vector(&record(123.0, 0.0), 53.6).unwrap();
        assert_eq!(still, [0.0, 0.0]);
    }

    #[test]
    fn velocity_vector_is_linear_in_speed_and_flips_at_180() {
        for heading in [0.0, 37.0, 90.0, 250.5] {
            let v1 = velocity_vector(&record(heading, 4.0), 53.6).unwrap();
            let v3 = velocity_vector(&record(heading, 12.0), 53.6).unwrap();
            assert_abs_diff_eq!(v3[0], 3.0 * v1[0], epsilon = 1e-14);
            assert_abs_diff_eq!(v3[1], 3.0 * v1[1], epsilon = 1e-14);
        }
        let fwd = velocity_vector(&record(0.0, 10.0), 53.6).unwrap();
        let back = velocity_vector(&record(180.0, 10.0), 53.6).unwrap();
        assert_abs_diff_eq!(back[0], -fwd[0], epsilon = 1e-12);
        assert_abs_diff_eq!(back[1], -fwd[1], epsilon = 1e-12);
    }

    #[test]
    fn velocity_vector_rejects_polar_reference() {
        assert!(velocity_vector(&record(0.0, 1.0), 89.0).is_err());
        assert!(velocity_vector(&record(0.0, 1.0), -89.5).is_err());
        assert!(velocity_vector(&record(0.0, 1.0), 88.9).is_ok());
    }

    #[test]
    fn literal_heading_convention_negates_north() {
        let standard =
            velocity_vector_with(&record(0.0, 10.0), 53.6, HeadingConvention::NorthClockwise)
                .unwrap();
        let literal = velocity_vector_with(
            &record(0.0, 10.0),
            53.6,
            HeadingConvention::EastClockwiseLiteral,
        )
        .unwrap();
        assert_abs_diff_eq!(literal[1], -standard[1], epsilon = 1e-15);
        assert_abs_diff_eq!(literal[0], standard[0], epsilon = 1e-15);
    }

    fn write_lines(lines: &[&str]) -> tempfile::NamedTempFile {
        use std::io::Write;
        let mut file = tempfile::NamedTempFile::new().unwrap();
        for line in lines {
            writeln!(file, "{line}").unwrap();
        }
        file
    }

    #[test]
    fn ingest_sorts_rows_and_counts_skipped_timestamps() {
        let file = write_lines(&[
            "timestamp,location-lat,location-long,ground-speed,heading",
            "2024-03-01T10:02:00Z,53.7,7.5,3.0,90",
            "2024-03-01T10:00:00Z,53.6,7.4,2.0,0",
            "not-a-time,53.6,7.4,2.0,0",
            "2024-03-01 10:01:00,53.65,7.45,2.5,45",
        ]);
        let report = ingest_csv(file.path(), &ColumnMap::default()).unwrap();
        assert_eq!(report.records.len(), 3);
        assert_eq!(report.skipped_timestamps, 1);
        let times: Vec<_> = report.records.iter().map(|r| r.timestamp).collect();
        assert!(times.windows(2).all(|w| w[0] <= w[1]));
        assert_abs_diff_eq!(report.records[1].heading, 45.0);
    }

    #[test]
    fn ingest_rejects_out_of_range_heading() {
        let file = write_lines(&[
            "timestamp,location-lat,location-long,ground-speed,heading",
            "2024-03-01T10:00:00Z,53.7,7.5,3.0,361",
        ]);
        let err = ingest_csv(file.path(), &ColumnMap::default()).unwrap_err();
        assert!(matches!(err, Error::Data(_)), "got {err:?}");
    }

    #[test]
    fn ingest_reports_missing_column_and_empty_file() {
        let file = write_lines(&[
            "timestamp,location-lat,location-long,speed,heading",
            "2024-03-01T10:00:00Z,53.7,7.5,3.0,90",
        ]);
        let err = ingest_csv(file.path(), &ColumnMap::default()).unwrap_err();
        assert!(matches!(err, Error::Data(m) if m.contains("ground-speed")));
        let empty = write_lines(&["timestamp,location-lat,location-long,ground-speed,heading"]);
        let err = ingest_csv(empty.path(), &ColumnMap::default()).unwrap_err();
        assert!(matches!(err, Error::EmptyDataset));
    }

    #[test]
    fn ingest_groups_by_optional_id_column() {
        let file = write_lines(&[
            "timestamp,location-lat,location-long,ground-speed,heading,bird",
            "2024-03-01T10:00:00Z,53.7,7.5,3.0,90,b",
            "2024-03-01T09:00:00Z,53.7,7.5,3.0,90,a",
            "2024-03-01T08:00:00Z,53.7,7.5,3.0,90,b",
        ]);
        let columns = ColumnMap {
            id: Some("bird".into()),
            ..ColumnMap::default()
        };
        let report = ingest_csv(file.path(), &columns).unwrap();
        let ids: Vec<_> = report
            .records
            .iter()
            .map(|r| r.id.clone().unwrap())
            .collect();
        assert_eq!(ids, ["a", "b", "b"]);
        assert!(report.records[1].timestamp < report.records[2].timestamp);
    }

    fn day_of_records(date: &str, count: usize) -> Vec<GpsRecord> {
        (0..count)
            .map(|i| {
                let seconds = i as f64 * 86_400.0 / count as f64;
                GpsRecord {
                    id: None,
                    timestamp: format!("{date}T00:00:00Z")
                        .parse::<DateTime<Utc>>()
                        .unwrap()
                        + Duration::milliseconds((seconds * 1000.0) as i64),
                    lat: 53.7 + 1e-4 * i as f64,
                    lon: 7.5,
                    ground_speed: 1.0,
                    heading: 0.0,
                }
            })
            .collect()
    }

    #[test]
    fn regrid_applies_retention_bounds() {
        let mut records = day_of_records("2024-03-01", 439);
        records.extend(day_of_records("2024-03-02", 440));
        records.extend(day_of_records("2024-03-03", 467));
        records.extend(day_of_records("2024-03-04", 468));
        let days = slice_and_regrid(&records, &RegridConfig::default()).unwrap();
        let dates: Vec<String> = days.iter().map(|d| d.date.to_string()).collect();
        assert_eq!(dates, ["2024-03-02", "2024-03-03"]);
        assert_eq!(days[0].grid.n_points(), DAILY_GRID_POINTS);
        assert_abs_diff_eq!(days[0].grid.horizon(), 24.0);
    }

    #[test]
    fn regrid_interpolates_through_record_times() {
        let config = RegridConfig {
            min_count: 2,
            max_count: 1000,
            n_points: 5,
            ..RegridConfig::default()
        };
        // Records at the first four grid times, positions linear in time.
        let records: Vec<GpsRecord> = (0..4)
            .map(|i| GpsRecord {
                id: None,
                timestamp: format!("2024-03-01T{:02}:00:00Z", 6 * i).parse().unwrap(),
                lat: 53.0 + 0.1 * i as f64,
                lon: 7.0 + 0.2 * i as f64,
                ground_speed: 0.0,
                heading: 0.0,
            })
            .collect();
        let days = slice_and_regrid(&records, &config).unwrap();
        assert_eq!(days.len(), 1);
        let positions = days[0].grid.samples();
        for (i, p) in positions.iter().take(4).enumerate() {
            assert_abs_diff_eq!(p[0], 7.0 + 0.2 * i as f64, epsilon = 1e-12);
            assert_abs_diff_eq!(p[1], 53.0 + 0.1 * i as f64, epsilon = 1e-12);
        }
        // Beyond the last record the position clamps to it.
        assert_abs_diff_eq!(positions[4][0], positions[3][0], epsilon = 1e-15);
        // The grid midpoint between records interpolates linearly.
        let mid = 0.5 * (positions[1][0] + positions[2][0]);
        let config_fine = RegridConfig {
            n_points: 9,
            ..config
        };
        let fine = slice_and_regrid(&records, &config_fine).unwrap();
        assert_abs_diff_eq!(fine[0].grid.samples()[3][0], mid, epsilon = 1e-12);
    }

    #[test]
    fn regrid_takes_velocity_from_nearest_record() {
        let config = RegridConfig {
            min_count: 2,
            max_count: 10,
            n_points: 3,
            ..RegridConfig::default()
        };
        let mut records = vec![record(0.0, 10.0), record(90.0, 10.0)];
        records[0].timestamp = "2024-03-01T00:00:00Z".parse().unwrap();
        records[1].timestamp = "2024-03-01T20:00:00Z".parse().unwrap();
        let days = slice_and_regrid(&records, &config).unwrap();
        let velocities = days[0].grid.velocities().unwrap();
        let north = velocity_vector(&records[0], DEFAULT_REF_LAT).unwrap();
        let east = velocity_vector(&records[1], DEFAULT_REF_LAT).unwrap();
        assert_eq!(velocities[0], north);
        assert_eq!(velocities[1], east);
        assert_eq!(velocities[2], east);
    }

    #[test]
    fn regrid_needs_two_records_in_a_retained_day() {
        let config = RegridConfig {
            min_count: 1,
            max_count: 10,
            n_points: 3,
            ..RegridConfig::default()
        };
        let records = vec![record(0.0, 1.0)];
        let err = slice_and_regrid(&records, &config).unwrap_err();
        assert!(matches!(err, Error::Data(_)));
    }

    #[test]
    fn families_pin_the_base_segments() {
        let params = FamilyParams::default();
        let (sea, inland) = segment_families(&params).unwrap();
        assert_eq!(sea.segments.len(), 61);
        assert_eq!(inland.segments.len(), 61);
        assert_eq!(sea.segments[0].a(), params.sea_a);
        assert_eq!(sea.segments[0].b(), params.sea_b);
        assert_eq!(inland.segments[0].a(), params.inland_a);
        assert_eq!(inland.segments[0].b(), params.inland_b);
    }

    #[test]
    fn families_are_rigid_and_march_away() {
        let params = FamilyParams::default();
        let (sea, inland) = segment_families(&params).unwrap();
        let sea_len = sea.segments[0].length();
        let inland_dir = inland.segments[0].direction();
        for i in 0..61 {
            assert_abs_diff_eq!(sea.segments[i].length(), sea_len, epsilon = 1e-12);
            assert_abs_diff_eq!(inland.segments[i].length(), 0.6, epsilon = 1e-12);
            let dir = inland.segments[i].direction();
            assert_abs_diff_eq!(dir[0], inland_dir[0], epsilon = 1e-15);
            assert_abs_diff_eq!(dir[1], inland_dir[1], epsilon = 1e-15);
        }
        // The inland family moves south, away from the island; the sea
        // family moves north.
        assert!(inland.segments[1].a()[1] < inland.segments[0].a()[1]);
        assert!(sea.segments[1].a()[1] > sea.segments[0].a()[1]);
        for family in [&sea, &inland] {
            for w in family.distances.windows(2) {
                assert!(w[1] > w[0] - 1e-12, "distances should not decrease");
            }
        }
    }

    fn synthetic_day(
        segment: &Segment,
        velocity_of: impl Fn(usize) -> [f64; 2],
        n: usize,
        salt: usize,
    ) -> DayTrajectory {
        // Points strung along the segment with a small two-dimensional
        // jitter, varied by `salt` so stacked days are not collinear.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(salt as u64);
        let nu = segment.normal();
        let dir = segment.direction();
        let positions: Vec<[f64; 2]> = (0..n)
            .map(|j| {
                let s = j as f64 / (n - 1) as f64;
                let along = rng.gen_range(-0.0015..0.0015);
                let across = rng.gen_range(-0.001..0.001);
                geom::add(
                    segment.point_at(s),
                    geom::add(geom::scale(dir, along), geom::scale(nu, across)),
                )
            })
            .collect();
        let velocities: Vec<[f64; 2]> = (0..n).map(velocity_of).collect();
        DayTrajectory {
            id: None,
            date: NaiveDate::from_ymd_opt(2024, 3, 1).unwrap(),
            grid: GridTrajectory::from_parts(24.0, positions, Some(velocities), None).unwrap(),
        }
    }

    #[test]
    fn projection_of_normal_movers_is_unit_positive() {
        let segment = Segment::new([0.0, -0.5], [0.0, 0.5]).unwrap();
        let nu = segment.normal();
        let day = synthetic_day(&segment, |_| nu, 200, 0);
        let profile = speed_projection_estimate(&[day], &segment, 0.02, 0.05).unwrap();
        assert!(!profile.no_data);
        for (p, n) in profile.positive().iter().zip(profile.negative()) {
            assert_abs_diff_eq!(*p, 1.0, epsilon = 1e-9);
            assert_abs_diff_eq!(*n, 0.0, epsilon = 1e-12);
        }
        for (p, n) in profile.raw_positive().iter().zip(profile.raw_negative()) {
            assert_abs_diff_eq!(*p, 1.0, epsilon = 1e-12);
            assert_eq!(*n, 0.0);
        }
    }

    #[test]
    fn projection_of_tangent_movers_vanishes() {
        let segment = Segment::new([0.0, -0.5], [0.0, 0.5]).unwrap();
        let dir = segment.direction();
        let day = synthetic_day(&segment, |_| dir, 200, 0);
        let profile = speed_projection_estimate(&[day], &segment, 0.02, 0.05).unwrap();
        for (p, n) in profile.positive().iter().zip(profile.negative()) {
            assert_abs_diff_eq!(*p, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(*n, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn projection_is_orientation_free() {
        let segment = Segment::new([0.0, -0.5], [0.0, 0.5]).unwrap();
        let reversed = Segment::new([0.0, 0.5], [0.0, -0.5]).unwrap();
        let day = synthetic_day(
            &segment,
            |j| [0.3 * ((j % 7) as f64 - 3.0), 0.1 * (j % 3) as f64],
            200,
            0,
        );
        let days = [day];
        let forward = speed_projection_estimate(&days, &segment, 0.02, 0.05).unwrap();
        let backward = speed_projection_estimate(&days, &reversed, 0.02, 0.05).unwrap();
        for f in [0.0, 0.2, 0.5, 0.85, 1.0] {
            let (fp, fn_) = forward.eval(f);
            let (bp, bn) = backward.eval(1.0 - f);
            assert_abs_diff_eq!(fp, bn, epsilon = 1e-9);
            assert_abs_diff_eq!(fn_, bp, epsilon = 1e-9);
            assert_abs_diff_eq!(fp + fn_, bp + bn, epsilon = 1e-9);
        }
    }

    #[test]
    fn projection_far_from_data_is_zero_with_flag() {
        let segment = Segment::new([0.0, -0.5], [0.0, 0.5]).unwrap();
        let far = Segment::new([50.0, -0.5], [50.0, 0.5]).unwrap();
        let day = synthetic_day(&segment, |_| [1.0, 0.0], 50, 0);
        let profile = speed_projection_estimate(&[day], &far, 0.02, 0.1).unwrap();
        assert!(profile.no_data);
        assert!(profile.positive().iter().all(|&v| v == 0.0));
        assert!(profile.negative().iter().all(|&v| v == 0.0));
    }

    fn zigzag_day(segment: &Segment, crossings: usize, n: usize) -> DayTrajectory {
        // A path swinging across the segment's midpoint: each sign change
        // of the normal offset is one chord crossing.
        let nu = segment.normal();
        let mid = segment.point_at(0.5);
        let positions: Vec<[f64; 2]> = (0..n)
            .map(|j| {
                let phase = j as f64 * crossings as f64 * std::f64::consts::PI / (n - 1) as f64;
                // cos touches zero only between samples, so offsets alternate
                // sign exactly `crossings` times.
                let offset = 0.05 * (phase - 0.4).cos().signum() * (1.0 + (j % 3) as f64 * 0.1);
                geom::add(mid, geom::scale(nu, offset))
            })
            .collect();
        let velocities = vec![[0.0, 0.0]; n];
        DayTrajectory {
            id: None,
            date: NaiveDate::from_ymd_opt(2024, 3, 1).unwrap(),
            grid: GridTrajectory::from_parts(24.0, positions, Some(velocities), None).unwrap(),
        }
    }

    #[test]
    fn mc_curve_counts_constructed_oscillations() {
        let segment = Segment::new([-0.5, 0.0], [0.5, 0.0]).unwrap();
        let family = SegmentFamily {
            segments: vec![segment],
            direction: Direction::Inland,
            distances: vec![0.25],
        };
        for crossings in [2, 6] {
            let days = vec![
                zigzag_day(&segment, crossings, 97),
                zigzag_day(&segment, crossings, 97),
            ];
            let points =
                crossing_curve(&days, &family, CurveMethod::Mc, &CurveConfig::default()).unwrap();
            assert_eq!(points.len(), 1);
            assert_abs_diff_eq!(points[0].estimate, crossings as f64, epsilon = 1e-12);
            assert_eq!(points[0].distance, 0.25);
            assert_eq!(points[0].direction, Direction::Inland);
        }
    }

    #[test]
    fn curves_vanish_far_from_the_data() {
        let segment = Segment::new([0.0, -0.5], [0.0, 0.5]).unwrap();
        let days = vec![
            synthetic_day(&segment, |j| [0.1 * (j % 5) as f64, 0.0], 120, 0),
            synthetic_day(&segment, |j| [0.0, 0.1 * (j % 4) as f64], 120, 1),
            synthetic_day(&segment, |j| [0.1, 0.1 * (j % 4) as f64], 120, 2),
        ];
        let far = Segment::new([80.0, -0.5], [80.0, 0.5]).unwrap();
        let family = SegmentFamily {
            segments: vec![far],
            direction: Direction::Sea,
            distances: vec![80.0],
        };
        for method in [CurveMethod::Mc, CurveMethod::Kr] {
            let points = crossing_curve(&days, &family, method, &CurveConfig::default()).unwrap();
            assert_abs_diff_eq!(points[0].estimate, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn synthesis_is_deterministic_and_well_formed() {
        let config = SynthConfig {
            n_days: 2,
            records_per_day: 20,
            ..SynthConfig::default()
        };
        let first = synthesize_gps(&config).unwrap();
        let second = synthesize_gps(&config).unwrap();
        assert_eq!(first, second);
        assert_eq!(first.len(), 40);
        for record in &first {
            record.validate().unwrap();
        }
        let reseeded = synthesize_gps(&SynthConfig {
            base_seed: 7,
            ..config
        })
        .unwrap();
        assert_ne!(first, reseeded);
    }

    #[test]
    fn synthetic_records_round_trip_through_csv_and_regrid() {
        let config = SynthConfig {
            n_days: 3,
            records_per_day: 450,
            ..SynthConfig::default()
        };
        let records = synthesize_gps(&config).unwrap();
        let file = tempfile::NamedTempFile::new().unwrap();
        write_gps_csv(file.path(), &records, &ColumnMap::default()).unwrap();
        let report = ingest_csv(file.path(), &ColumnMap::default()).unwrap();
        assert_eq!(report.records.len(), records.len());
        assert_eq!(report.skipped_timestamps, 0);
        for (parsed, original) in report.records.iter().zip(&records) {
            assert_eq!(parsed.timestamp, original.timestamp);
            assert_abs_diff_eq!(parsed.lat, original.lat, epsilon = 1e-12);
            assert_abs_diff_eq!(parsed.ground_speed, original.ground_speed, epsilon = 1e-12);
        }
        let days = slice_and_regrid(&report.records, &RegridConfig::default()).unwrap();
        assert_eq!(days.len(), 3);
        // Every regridded velocity is a scaled cardinal direction.
        for day in &days {
            for v in day.grid.velocities().unwrap() {
                let matches_cardinal = CARDINAL_VELOCITIES.iter().any(|c| {
                    (v[0] - config.scale * c[0]).abs() < 1e-9
                        && (v[1] - config.scale * c[1]).abs() < 1e-9
                });
                assert!(matches_cardinal, "velocity {v:?} is not a scaled cardinal");
            }
        }
    }

    #[test]
    fn curve_csv_matches_the_pinned_schema() {
        let points = vec![
            CurvePoint {
                distance: 0.1,
                estimate: 2.0,
                method: CurveMethod::Mc,
                direction: Direction::Sea,
            },
            CurvePoint {
                distance: 0.2,
                estimate: 1.5,
                method: CurveMethod::Kr,
                direction: Direction::Inland,
            },
        ];
        let file = tempfile::NamedTempFile::new().unwrap();
        write_curve_csv(file.path(), &points).unwrap();
        let text = std::fs::read_to_string(file.path()).unwrap();
        assert_eq!(
            text,
            "distance,estimate,method,direction\n0.1,2.0,mc,sea\n0.2,1.5,kr,inland\n"
        );
    }
}
