//! Track-CSV ingestion and serialisation.
//!
//! The default layout follows the INTERACTION dataset
//! (`track_id, frame_id, timestamp_ms, agent_type, x, y, vx, vy, psi_rad, length, width`).
//! Other datasets are loaded through a [`TrackSchema`] column mapping.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec2;
use crate::scene::{derive_acceleration, derive_kinematics, wrap_angle, AgentClass, AgentId, AgentState, Scenario, SceneError, Track};

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("track {track}: timestamps not strictly increasing (line {line})")]
    NonMonotone { track: AgentId, line: u64 },
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TimeUnit {
    Milliseconds,
    Seconds,
    /// Integer frame index at a fixed rate (Hz).
    Frames { rate: f64 },
}

impl TimeUnit {
    fn to_seconds(self, v: f64) -> f64 {
        match self {
            TimeUnit::Milliseconds => v / 1000.0,
            TimeUnit::Seconds => v,
            TimeUnit::Frames { rate } => v / rate,
        }
    }

    fn from_seconds(self, t: f64) -> String {
        match self {
            TimeUnit::Milliseconds => format!("{}", (t * 1000.0).round() as i64),
            TimeUnit::Seconds => format!("{t}"),
            TimeUnit::Frames { rate } => format!("{}", (t * rate).round() as i64),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleUnit {
    Radians,
    Degrees,
}

/// Column mapping from a dataset layout onto [`AgentState`] fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackSchema {
    pub track_id: String,
    pub time: String,
    pub time_unit: TimeUnit,
    pub x: String,
    pub y: String,
    pub length: String,
    pub width: String,
    #[serde(default)]
    pub heading: Option<String>,
    pub heading_unit: AngleUnit,
    #[serde(default)]
    pub vx: Option<String>,
    #[serde(default)]
    pub vy: Option<String>,
    /// Longitudinal acceleration column, derived from speed when absent.
    #[serde(default)]
    pub acceleration: Option<String>,
    #[serde(default)]
    pub agent_type: Option<String>,
    /// Class used when the agent type column is missing.
    pub default_class: AgentClass,
    /// Footprint used for non-vehicle rows with empty size cells.
    pub vru_length: f64,
    pub vru_width: f64,
    /// Sampling period used when no track has two samples.
    pub default_dt: f64,
}

impl TrackSchema {
    /// INTERACTION dataset layout.
    pub fn interaction() -> Self {
        Self {
            track_id: "track_id".into(),
            time: "timestamp_ms".into(),
            time_unit: TimeUnit::Milliseconds,
            x: "x".into(),
            y: "y".into(),
            length: "length".into(),
            width: "width".into(),
            heading: Some("psi_rad".into()),
            heading_unit: AngleUnit::Radians,
            vx: Some("vx".into()),
            vy: Some("vy".into()),
            acceleration: None,
            agent_type: Some("agent_type".into()),
            default_class: AgentClass::Car,
            vru_length: 0.5,
            vru_width: 0.5,
            default_dt: 0.1,
        }
    }

    /// inD `*_tracks.csv` layout (25 Hz frames, heading in degrees).
    pub fn ind() -> Self {
        Self {
            track_id: "trackId".into(),
            time: "frame".into(),
            time_unit: TimeUnit::Frames { rate: 25.0 },
            x: "xCenter".into(),
            y: "yCenter".into(),
            length: "length".into(),
            width: "width".into(),
            heading: Some("heading".into()),
            heading_unit: AngleUnit::Degrees,
            vx: Some("xVelocity".into()),
            vy: Some("yVelocity".into()),
            acceleration: Some("lonAcceleration".into()),
            agent_type: None,
            default_class: AgentClass::Car,
            vru_length: 0.5,
            vru_width: 0.5,
            default_dt: 0.04,
        }
    }

    /// Built-in schema by name.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "interaction" => Some(Self::interaction()),
            "ind" => Some(Self::ind()),
            _ => None,
        }
    }
}

impl Default for TrackSchema {
    fn default() -> Self {
        Self::interaction()
    }
}

struct Columns {
    track_id: usize,
    time: usize,
    x: usize,
    y: usize,
    length: usize,
    width: usize,
    heading: Option<usize>,
    velocity: Option<(usize, usize)>,
    acceleration: Option<usize>,
    agent_type: Option<usize>,
}

impl Columns {
    fn resolve(headers: &csv::StringRecord, schema: &TrackSchema) -> Result<Self, CsvError> {
        let find = |name: &str| headers.iter().position(|h| h.trim() == name);
        let required = |name: &str| find(name).ok_or_else(|| CsvError::Schema(format!("missing required column '{name}'")));
        let optional = |name: &Option<String>| -> Result<Option<usize>, CsvError> {
            match name {
                None => Ok(None),
                Some(n) => Ok(find(n)),
            }
        };
        let heading = optional(&schema.heading)?;
        let velocity = match (optional(&schema.vx)?, optional(&schema.vy)?) {
            (Some(a), Some(b)) => Some((a, b)),
            _ => None,
        };
        if heading.is_none() && velocity.is_none() {
            return Err(CsvError::Schema("need a heading column or vx/vy columns".into()));
        }
        let agent_type = match &schema.agent_type {
            Some(n) => Some(required(n)?),
            None => None,
        };
        Ok(Self {
            track_id: required(&schema.track_id)?,
            time: required(&schema.time)?,
            x: required(&schema.x)?,
            y: required(&schema.y)?,
            length: required(&schema.length)?,
            width: required(&schema.width)?,
            heading,
            velocity,
            acceleration: optional(&schema.acceleration)?,
            agent_type,
        })
    }
}

struct RawRow {
    state: AgentState,
    heading_given: bool,
}

fn parse_number(record: &csv::StringRecord, idx: usize, name: &str, line: u64) -> Result<Option<f64>, CsvError> {
    let cell = record.get(idx).unwrap_or("").trim();
    if cell.is_empty() {
        return Ok(None);
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(CsvError::Row { line, message: format!("column '{name}': '{cell}' is not a finite number") }),
    }
}

fn require_number(record: &csv::StringRecord, idx: usize, name: &str, line: u64) -> Result<f64, CsvError> {
    parse_number(record, idx, name, line)?
        .ok_or_else(|| CsvError::Row { line, message: format!("column '{name}' is empty") })
}

/// Parses a track CSV stream into a [`Scenario`].
///
/// Velocity comes from the vx/vy columns when the schema maps them;
/// otherwise it is derived from positions. Missing headings fall back to
/// the direction of motion above 0.1 m/s and are carried forward below.
pub fn parse_tracks<R: Read>(reader: R, schema: &TrackSchema) -> Result<Scenario, CsvError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let cols = Columns::resolve(&headers, schema)?;

    let mut rows: BTreeMap<AgentId, Vec<RawRow>> = BTreeMap::new();
    for result in rdr.records() {
        let record = result?;
        let line = record.position().map_or(0, |p| p.line());
        let id_cell = record.get(cols.track_id).unwrap_or("").trim();
        if id_cell.is_empty() {
            return Err(CsvError::Row { line, message: "empty track id".into() });
        }
        let agent_id = AgentId::new(id_cell);
        let class = match cols.agent_type {
            Some(i) => AgentClass::from_label(record.get(i).unwrap_or("")),
            None => schema.default_class,
        };
        let t = schema.time_unit.to_seconds(require_number(&record, cols.time, &schema.time, line)?);
        let position = Vec2::new(
            require_number(&record, cols.x, &schema.x, line)?,
            require_number(&record, cols.y, &schema.y, line)?,
        );
        let size = |idx: usize, name: &str, vru_default: f64| -> Result<f64, CsvError> {
            match parse_number(&record, idx, name, line)? {
                Some(v) if v > 0.0 => Ok(v),
                Some(v) if class.is_vehicle() => {
                    Err(CsvError::Row { line, message: format!("column '{name}': vehicle size must be positive, got {v}") })
                }
                None if class.is_vehicle() => Err(CsvError::Row { line, message: format!("column '{name}' is empty") }),
                _ => Ok(vru_default),
            }
        };
        let length = size(cols.length, &schema.length, schema.vru_length)?;
        let width = size(cols.width, &schema.width, schema.vru_width)?;
        let heading = match cols.heading {
            Some(i) => parse_number(&record, i, schema.heading.as_deref().unwrap_or(""), line)?.map(|h| match schema.heading_unit {
                AngleUnit::Radians => h,
                AngleUnit::Degrees => h.to_radians(),
            }),
            None => None,
        };
        let velocity = match cols.velocity {
            Some((ix, iy)) => {
                let vx = require_number(&record, ix, schema.vx.as_deref().unwrap_or(""), line)?;
                let vy = require_number(&record, iy, schema.vy.as_deref().unwrap_or(""), line)?;
                Vec2::new(vx, vy)
            }
            None => Vec2::ZERO,
        };
        let acceleration = match cols.acceleration {
            Some(i) => parse_number(&record, i, schema.acceleration.as_deref().unwrap_or(""), line)?.unwrap_or(0.0),
            None => 0.0,
        };

        let list = rows.entry(agent_id.clone()).or_default();
        if let Some(prev) = list.last() {
            if t <= prev.state.t {
                return Err(CsvError::NonMonotone { track: agent_id, line });
            }
        }
        list.push(RawRow {
            heading_given: heading.is_some(),
            state: AgentState {
                agent_id,
                t,
                position,
                heading: heading.unwrap_or(0.0),
                velocity,
                speed: velocity.norm(),
                acceleration,
                length,
                width,
                class,
            },
        });
    }

    let dt = infer_period(&rows).unwrap_or(schema.default_dt);
    let mut tracks = Vec::with_capacity(rows.len());
    for (id, list) in rows {
        let flags: Vec<bool> = list.iter().map(|r| r.heading_given).collect();
        let states: Vec<AgentState> = list.into_iter().map(|r| r.state).collect();
        let mut track = Track::new(id, states, dt)?;
        if cols.velocity.is_none() {
            if track.len() >= 2 {
                track = derive_kinematics(&track)?;
            }
        } else if cols.acceleration.is_none() {
            derive_acceleration(&mut track);
        }
        fill_headings(&mut track, &flags);
        tracks.push(track);
    }
    Ok(Scenario::new(tracks, dt)?)
}

fn infer_period(rows: &BTreeMap<AgentId, Vec<RawRow>>) -> Option<f64> {
    rows.values().find_map(|r| (r.len() >= 2).then(|| r[1].state.t - r[0].state.t))
}

/// Below this speed the direction of motion is too noisy to define a heading.
const HEADING_MIN_SPEED: f64 = 0.1;

fn fill_headings(track: &mut Track, given: &[bool]) {
    let states = track.states_mut();
    let mut known: Vec<Option<f64>> = states
        .iter()
        .zip(given)
        .map(|(s, &g)| {
            if g {
                Some(s.heading)
            } else if s.speed > HEADING_MIN_SPEED {
                Some(s.velocity.angle())
            } else {
                None
            }
        })
        .collect();
    // carry forward, then back-fill a leading gap from the first known heading
    let mut last = None;
    for k in known.iter_mut() {
        match k {
            Some(h) => last = Some(*h),
            None => *k = last,
        }
    }
    let first = known.iter().flatten().next().copied().unwrap_or(0.0);
    for (s, k) in states.iter_mut().zip(known) {
        s.heading = wrap_angle(k.unwrap_or(first));
    }
}

/// Writes a scenario using the schema's column names. Optional columns
/// the schema maps are always written.
pub fn write_tracks<W: Write>(scenario: &Scenario, schema: &TrackSchema, writer: W) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![schema.track_id.clone(), schema.time.clone()];
    if let Some(a) = &schema.agent_type {
        header.push(a.clone());
    }
    header.extend([schema.x.clone(), schema.y.clone()]);
    if let (Some(vx), Some(vy)) = (&schema.vx, &schema.vy) {
        header.extend([vx.clone(), vy.clone()]);
    }
    if let Some(h) = &schema.heading {
        header.push(h.clone());
    }
    if let Some(a) = &schema.acceleration {
        header.push(a.clone());
    }
    header.extend([schema.length.clone(), schema.width.clone()]);
    w.write_record(&header)?;

    for track in scenario.tracks().values() {
        for s in track.states() {
            let mut rec = vec![s.agent_id.0.clone(), schema.time_unit.from_seconds(s.t)];
            if schema.agent_type.is_some() {
                rec.push(s.class.label().to_owned());
            }
            rec.extend([s.position.x.to_string(), s.position.y.to_string()]);
            if schema.vx.is_some() && schema.vy.is_some() {
                rec.extend([s.velocity.x.to_string(), s.velocity.y.to_string()]);
            }
            if schema.heading.is_some() {
                let h = match schema.heading_unit {
                    AngleUnit::Radians => s.heading,
                    AngleUnit::Degrees => s.heading.to_degrees(),
                };
                rec.push(h.to_string());
            }
            if schema.acceleration.is_some() {
                rec.push(s.acceleration.to_string());
            }
            rec.extend([s.length.to_string(), s.width.to_string()]);
            w.write_record(&rec)?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
