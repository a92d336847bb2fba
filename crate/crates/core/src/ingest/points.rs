use std::io::Read;

use chrono::{DateTime, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{GeoPoint, Mesh, ProjectedPoint};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataPoint {
    /// Mesh-local position in meters.
    pub location: ProjectedPoint,
    /// UTC epoch seconds.
    pub timestamp: i64,
    pub weight: f64,
}

impl DataPoint {
    pub fn new(location: ProjectedPoint, timestamp: i64) -> Self {
        Self { location, timestamp, weight: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectionReport {
    pub rows: u64,
    pub accepted: u64,
    pub malformed: u64,
    pub out_of_bounds: u64,
}

/// Parses an epoch-seconds or ISO-8601 timestamp. Timestamps without a zone
/// are read as UTC.
pub fn parse_timestamp(s: &str) -> Option<i64> {
    let s = s.trim();
    if let Ok(secs) = s.parse::<i64>() {
        return Some(secs);
    }
    if let Ok(secs) = s.parse::<f64>() {
        return secs.is_finite().then(|| secs.floor() as i64);
    }
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.timestamp());
    }
    ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"]
        .iter()
        .find_map(|fmt| NaiveDateTime::parse_from_str(s, fmt).ok())
        .map(|t| t.and_utc().timestamp())
}

struct Columns {
    lat: usize,
    lon: usize,
    timestamp: usize,
    weight: Option<usize>,
}

impl Columns {
    fn locate(headers: &csv::StringRecord) -> Result<Self> {
        let find = |names: &[&str]| {
            headers
                .iter()
                .position(|h| names.iter().any(|n| h.trim().eq_ignore_ascii_case(n)))
        };
        Ok(Self {
            lat: find(&["lat", "latitude"]).ok_or(Error::MissingColumn("lat"))?,
            lon: find(&["lon", "lng", "longitude"]).ok_or(Error::MissingColumn("lon"))?,
            timestamp: find(&["timestamp", "time"]).ok_or(Error::MissingColumn("timestamp"))?,
            weight: find(&["weight"]),
        })
    }
}

/// Reads `lat,lon,timestamp[,weight]` rows. Malformed rows and points farther
/// than `margin` meters outside the city bounds are counted and skipped.
pub fn parse_points<R: Read>(reader: R, mesh: &Mesh, margin: f64) -> Result<(Vec<DataPoint>, RejectionReport)> {
    let mut csv = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(reader);
    let columns = Columns::locate(csv.headers()?)?;
    let mut report = RejectionReport::default();
    let mut points = Vec::new();

    for record in csv.records() {
        report.rows += 1;
        let Ok(record) = record else {
            report.malformed += 1;
            continue;
        };
        match parse_row(&record, &columns, mesh) {
            Some(point) if mesh.contains_with_margin(point.location, margin) => {
                report.accepted += 1;
                points.push(point);
            }
            Some(_) => report.out_of_bounds += 1,
            None => report.malformed += 1,
        }
    }
    if points.is_empty() {
        log::warn!("no data points accepted ({} rows read)", report.rows);
    }
    Ok((points, report))
}

fn parse_row(record: &csv::StringRecord, columns: &Columns, mesh: &Mesh) -> Option<DataPoint> {
    let lat: f64 = record.get(columns.lat)?.parse().ok()?;
    let lon: f64 = record.get(columns.lon)?.parse().ok()?;
    let geo = GeoPoint::new(lat, lon).ok()?;
    let timestamp = parse_timestamp(record.get(columns.timestamp)?)?;
    let weight = match columns.weight.and_then(|c| record.get(c)) {
        Some(w) if !w.is_empty() => w.parse::<f64>().ok()?,
        _ => 1.0,
    };
    if !(weight.is_finite() && weight >= 0.0) {
        return None;
    }
    let location = mesh.to_local(geo).ok()?;
    Some(DataPoint { location, timestamp, weight })
}
