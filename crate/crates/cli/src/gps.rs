//! GPS pipeline subcommands: ingest/regrid, speed-profile estimation,
//! crossing curves over the segment families, and synthetic data export.

use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use chrono::NaiveDate;
use crossings_core::gps_pipeline::{
    crossing_curve, ingest_csv, segment_families, slice_and_regrid, speed_projection_estimate,
    synthesize_gps, write_curve_csv, write_gps_csv, ColumnMap, CurveConfig, CurveMethod,
    CurvePoint, DayTrajectory, FamilyParams, HeadingConvention, RegridConfig, SegmentFamily,
    SynthConfig, DAILY_GRID_POINTS, DEFAULT_REF_LAT,
};
use crossings_core::psp_sim::write_grid_csv;
use crossings_core::surfaces::Segment;

use crate::commands::{parse_point, parse_segment, BandwidthArg};
use crate::{data_error, Failure};

/// GPS trajectory commands.
#[derive(Debug, clap::Subcommand)]
pub enum GpsCommand {
    /// Ingest a GPS CSV and write one regridded day CSV per (id, date).
    Ingest(IngestArgs),
    /// Estimate the signed-speed profile along a segment; CSV out.
    Project(ProjectArgs),
    /// Crossing-count curves over the segment families; CSV out.
    Curve(CurveArgs),
    /// Write a synthetic GPS CSV from the planar telegraph model.
    Synth(SynthArgs),
}

pub fn run(command: &GpsCommand) -> Result<(), Failure> {
    match command {
        GpsCommand::Ingest(args) => run_ingest(args),
        GpsCommand::Project(args) => run_project(args),
        GpsCommand::Curve(args) => run_curve(args),
        GpsCommand::Synth(args) => run_synth(args),
    }
}

/// Heading conventions of source records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum HeadingArg {
    /// Degrees clockwise from north.
    #[value(name = "north_clockwise")]
    NorthClockwise,
    /// Degrees clockwise from east, with (cos, sin) taken literally.
    #[value(name = "east_clockwise_literal")]
    EastClockwiseLiteral,
}

impl From<HeadingArg> for HeadingConvention {
    fn from(arg: HeadingArg) -> Self {
        match arg {
            HeadingArg::NorthClockwise => HeadingConvention::NorthClockwise,
            HeadingArg::EastClockwiseLiteral => HeadingConvention::EastClockwiseLiteral,
        }
    }
}

fn parse_columns(text: &str) -> Result<Vec<String>, String> {
    let parts: Vec<String> = text.split(',').map(|p| p.trim().to_string()).collect();
    if parts.len() != 5 || parts.iter().any(String::is_empty) {
        return Err("expected 5 comma-separated column names".into());
    }
    Ok(parts)
}

/// Source file and regridding options shared by the data-driven
/// subcommands.
#[derive(Debug, clap::Args)]
pub struct InputArgs {
    /// Source GPS CSV.
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    /// Column names holding timestamp, latitude, longitude, ground speed,
    /// and heading, in that order.
    #[arg(long, value_name = "T,LAT,LON,SPEED,HEADING", value_parser = parse_columns)]
    pub columns: Option<Vec<String>>,
    /// Column holding the animal id; records then group per id.
    #[arg(long, value_name = "NAME")]
    pub id_column: Option<String>,
    /// Smallest record count a day may have and still be kept.
    #[arg(long, default_value_t = 440)]
    pub min_records: usize,
    /// Largest record count a day may have and still be kept.
    #[arg(long, default_value_t = 467)]
    pub max_records: usize,
    /// Samples per regridded day.
    #[arg(long, default_value_t = DAILY_GRID_POINTS)]
    pub n_points: usize,
    /// Reference latitude of the meters-to-degrees conversion.
    #[arg(long, default_value_t = DEFAULT_REF_LAT, allow_negative_numbers = true)]
    pub ref_lat: f64,
    /// Heading convention of the source records.
    #[arg(long, value_enum, default_value_t = HeadingArg::NorthClockwise)]
    pub heading: HeadingArg,
}

impl InputArgs {
    fn column_map(&self) -> ColumnMap {
        let mut map = ColumnMap::default();
        if let Some(names) = &self.columns {
            map.timestamp = names[0].clone();
            map.lat = names[1].clone();
            map.lon = names[2].clone();
            map.ground_speed = names[3].clone();
            map.heading = names[4].clone();
        }
        map.id = self.id_column.clone();
        map
    }

    fn regrid_config(&self) -> RegridConfig {
        RegridConfig {
            min_count: self.min_records,
            max_count: self.max_records,
            n_points: self.n_points,
            ref_lat: self.ref_lat,
            heading: self.heading.into(),
        }
    }

    fn load_days(&self) -> Result<Vec<DayTrajectory>, Failure> {
        let report = ingest_csv(&self.input, &self.column_map())
            .map_err(|err| data_error(&self.input, err))?;
        let days = slice_and_regrid(&report.records, &self.regrid_config())?;
        eprintln!(
            "{}: {} records ({} skipped timestamps), {} days kept",
            self.input.display(),
            report.records.len(),
            report.skipped_timestamps,
            days.len()
        );
        Ok(days)
    }
}

/// Arguments of `crossings gps ingest`.
#[derive(Debug, clap::Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Directory receiving the regridded day CSVs.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out_dir: PathBuf,
}

fn day_file_name(day: &DayTrajectory) -> String {
    match &day.id {
        Some(id) => {
            let safe: String = id
                .chars()
                .map(|c| if c.is_alphanumeric() { c } else { '-' })
                .collect();
            format!("{safe}_{}.csv", day.date)
        }
        None => format!("{}.csv", day.date),
    }
}

fn run_ingest(args: &IngestArgs) -> Result<(), Failure> {
    let days = args.input.load_days()?;
    std::fs::create_dir_all(&args.out_dir).map_err(|err| data_error(&args.out_dir, err))?;
    for day in &days {
        let path = args.out_dir.join(day_file_name(day));
        let mut file = File::create(&path).map_err(|err| data_error(&path, err))?;
        write_grid_csv(&day.grid, &mut file)?;
    }
    eprintln!(
        "wrote {} day files to {}",
        days.len(),
        args.out_dir.display()
    );
    Ok(())
}

/// Arguments of `crossings gps project`.
#[derive(Debug, clap::Args)]
pub struct ProjectArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Segment to profile.
    #[arg(long, value_name = "AX,AY,BX,BY", value_parser = parse_segment, allow_hyphen_values = true)]
    pub segment: ([f64; 2], [f64; 2]),
    /// Exploration distance around the segment, decimal degrees.
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    /// Walk step along the segment, as a fraction of its length.
    #[arg(long, default_value_t = 0.01)]
    pub dx: f64,
    /// Output CSV path; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

fn run_project(args: &ProjectArgs) -> Result<(), Failure> {
    let days = args.input.load_days()?;
    let segment = Segment::new(args.segment.0, args.segment.1)?;
    let profile = speed_projection_estimate(&days, &segment, args.epsilon, args.dx)?;
    if profile.no_data {
        eprintln!(
            "no record lies within {} of the segment; the profile is zero",
            args.epsilon
        );
    }
    let rows = profile
        .fractions()
        .iter()
        .zip(profile.positive())
        .zip(profile.negative())
        .zip(profile.raw_positive())
        .zip(profile.raw_negative());
    write_csv(args.out.as_deref(), |writer| {
        writer.write_record([
            "fraction",
            "positive",
            "negative",
            "raw_positive",
            "raw_negative",
        ])?;
        for ((((fraction, positive), negative), raw_positive), raw_negative) in rows {
            writer.write_record([
                fraction.to_string(),
                positive.to_string(),
                negative.to_string(),
                raw_positive.to_string(),
                raw_negative.to_string(),
            ])?;
        }
        Ok(())
    })
}

/// Curve estimators selectable on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CurveMethodArg {
    /// Plug-in estimate from the data-estimated speed profile.
    Kr,
    /// Mean daily chord-crossing count.
    Mc,
}

impl From<CurveMethodArg> for CurveMethod {
    fn from(arg: CurveMethodArg) -> Self {
        match arg {
            CurveMethodArg::Kr => CurveMethod::Kr,
            CurveMethodArg::Mc => CurveMethod::Mc,
        }
    }
}

/// Family sides selectable on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DirectionArg {
    Sea,
    Inland,
    Both,
}

/// Arguments of `crossings gps curve`.
#[derive(Debug, clap::Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Family side to compute.
    #[arg(long, value_enum, default_value_t = DirectionArg::Both)]
    pub direction: DirectionArg,
    /// Curve estimator.
    #[arg(long, value_enum, default_value_t = CurveMethodArg::Kr)]
    pub method: CurveMethodArg,
    /// First endpoint of the base sea segment.
    #[arg(long, value_name = "X,Y", value_parser = parse_point, allow_hyphen_values = true)]
    pub sea_a: Option<[f64; 2]>,
    /// Second endpoint of the base sea segment.
    #[arg(long, value_name = "X,Y", value_parser = parse_point, allow_hyphen_values = true)]
    pub sea_b: Option<[f64; 2]>,
    /// First endpoint of the base inland segment.
    #[arg(long, value_name = "X,Y", value_parser = parse_point, allow_hyphen_values = true)]
    pub inland_a: Option<[f64; 2]>,
    /// Second endpoint of the base inland segment.
    #[arg(long, value_name = "X,Y", value_parser = parse_point, allow_hyphen_values = true)]
    pub inland_b: Option<[f64; 2]>,
    /// Offset between consecutive segments, decimal degrees.
    #[arg(long)]
    pub spacing: Option<f64>,
    /// Per-step rotation of the sea family, radians counterclockwise.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Segments per family.
    #[arg(long)]
    pub count: Option<usize>,
    /// Reference point distances are measured from.
    #[arg(long, value_name = "X,Y", value_parser = parse_point, allow_hyphen_values = true)]
    pub origin: Option<[f64; 2]>,
    /// Exploration distance of the speed profile, decimal degrees.
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    /// Walk step of the speed profile, as a fraction of the segment.
    #[arg(long, default_value_t = 0.01)]
    pub dx: f64,
    /// Bandwidth rule of the per-slice densities.
    #[arg(long, value_enum, default_value_t = BandwidthArg::NormalReference)]
    pub bandwidth: BandwidthArg,
    /// Line quadrature step along segments, decimal degrees.
    #[arg(long, default_value_t = 0.01)]
    pub surface_step: f64,
    /// Output CSV path; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

impl CurveArgs {
    fn family_params(&self) -> FamilyParams {
        let defaults = FamilyParams::default();
        FamilyParams {
            sea_a: self.sea_a.unwrap_or(defaults.sea_a),
            sea_b: self.sea_b.unwrap_or(defaults.sea_b),
            inland_a: self.inland_a.unwrap_or(defaults.inland_a),
            inland_b: self.inland_b.unwrap_or(defaults.inland_b),
            spacing: self.spacing.unwrap_or(defaults.spacing),
            theta: self.theta.unwrap_or(defaults.theta),
            count: self.count.unwrap_or(defaults.count),
            origin: self.origin.unwrap_or(defaults.origin),
        }
    }
}

fn run_curve(args: &CurveArgs) -> Result<(), Failure> {
    let days = args.input.load_days()?;
    let (sea, inland) = segment_families(&args.family_params())?;
    let families: Vec<&SegmentFamily> = match args.direction {
        DirectionArg::Sea => vec![&sea],
        DirectionArg::Inland => vec![&inland],
        DirectionArg::Both => vec![&sea, &inland],
    };
    let config = CurveConfig {
        epsilon: args.epsilon,
        dx_proj: args.dx,
        bandwidth: args.bandwidth.into(),
        surface_step: args.surface_step,
    };
    let mut points: Vec<CurvePoint> = Vec::new();
    for family in families {
        points.extend(crossing_curve(&days, family, args.method.into(), &config)?);
    }
    match &args.out {
        Some(path) => {
            write_curve_csv(path, &points)?;
            eprintln!("wrote {} curve points to {}", points.len(), path.display());
        }
        None => {
            let stdout = std::io::stdout();
            let mut writer = csv::Writer::from_writer(stdout.lock());
            for point in &points {
                writer
                    .serialize(point)
                    .map_err(crossings_core::Error::from)?;
            }
            writer.flush().map_err(Failure::from)?;
        }
    }
    Ok(())
}

/// Arguments of `crossings gps synth`.
#[derive(Debug, clap::Args)]
pub struct SynthArgs {
    /// Output CSV path.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Days to synthesize, one trajectory per day.
    #[arg(long, default_value_t = 40)]
    pub days: usize,
    /// GPS fixes per day; keep within the regrid retention bounds.
    #[arg(long, default_value_t = 460)]
    pub records_per_day: usize,
    /// Slow switching rate.
    #[arg(long, default_value_t = 1.0)]
    pub rate_slow: f64,
    /// Fast switching rate.
    #[arg(long, default_value_t = 2.0)]
    pub rate_fast: f64,
    /// Map point the model origin lands on.
    #[arg(long, value_name = "LON,LAT", value_parser = parse_point, allow_hyphen_values = true)]
    pub center: Option<[f64; 2]>,
    /// Decimal degrees per model length unit.
    #[arg(long, default_value_t = 0.05)]
    pub scale: f64,
    /// Reference latitude of the speed/heading encoding.
    #[arg(long, default_value_t = DEFAULT_REF_LAT, allow_negative_numbers = true)]
    pub ref_lat: f64,
    /// First day.
    #[arg(long, value_name = "YYYY-MM-DD", default_value = "2024-01-01")]
    pub start_date: NaiveDate,
    /// Base seed of the per-day streams.
    #[arg(long, default_value_t = 424242)]
    pub seed: u64,
}

fn run_synth(args: &SynthArgs) -> Result<(), Failure> {
    let config = SynthConfig {
        rate_slow: args.rate_slow,
        rate_fast: args.rate_fast,
        n_days: args.days,
        records_per_day: args.records_per_day,
        center: args.center.unwrap_or([7.7, 53.7]),
        scale: args.scale,
        ref_lat: args.ref_lat,
        start_date: args.start_date,
        base_seed: args.seed,
    };
    let records = synthesize_gps(&config)?;
    write_gps_csv(&args.out, &records, &ColumnMap::default())?;
    eprintln!("wrote {} records to {}", records.len(), args.out.display());
    Ok(())
}

fn write_csv(
    out: Option<&std::path::Path>,
    write_rows: impl FnOnce(&mut csv::Writer<Box<dyn Write>>) -> crossings_core::Result<()>,
) -> Result<(), Failure> {
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(File::create(path).map_err(|err| data_error(path, err))?),
        None => Box::new(std::io::stdout()),
    };
    let mut writer = csv::Writer::from_writer(sink);
    write_rows(&mut writer)?;
    writer.flush().map_err(Failure::from)?;
    if let Some(path) = out {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}
