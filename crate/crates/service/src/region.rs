//! Query regions given as GeoJSON or as a bare `[lon, lat]` ring.

use serde_json::Value;
use urban_pulse::geo::GeoPoint;
use urban_pulse::pulse::validate_ring;
use urban_pulse::{Error, Result};

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidRegion(msg.into())
}

fn position(v: &Value) -> Result<GeoPoint> {
    let pair = v.as_array().ok_or_else(|| invalid("position is not an array"))?;
    let coord = |k: usize| pair.get(k).and_then(Value::as_f64).ok_or_else(|| invalid("position needs [lon, lat]"));
    GeoPoint::new(coord(1)?, coord(0)?)
}

fn ring(v: &Value) -> Result<Vec<GeoPoint>> {
    let positions = v.as_array().ok_or_else(|| invalid("ring is not an array"))?;
    let points = positions.iter().map(position).collect::<Result<Vec<_>>>()?;
    validate_ring(&points)
}

fn nth<'a>(v: &'a Value, key: &str, index: usize) -> Result<&'a Value> {
    v.get(key)
        .and_then(|x| x.get(index))
        .ok_or_else(|| invalid(format!("missing {key}[{index}]")))
}

/// Outer ring of the first polygon in `value`, validated and without the
/// closing vertex. Accepts a position array, a Polygon or MultiPolygon
/// geometry, a Feature or a FeatureCollection.
pub fn parse_region(value: &Value) -> Result<Vec<GeoPoint>> {
    if value.is_array() {
        return ring(value);
    }
    match value.get("type").and_then(Value::as_str) {
        Some("Polygon") => ring(nth(value, "coordinates", 0)?),
        Some("MultiPolygon") => ring(nth(value, "coordinates", 0)?.get(0).ok_or_else(|| invalid("empty polygon"))?),
        Some("Feature") => parse_region(value.get("geometry").ok_or_else(|| invalid("feature has no geometry"))?),
        Some("FeatureCollection") => parse_region(nth(value, "features", 0)?),
        Some(other) => Err(invalid(format!("unsupported GeoJSON type `{other}`"))),
        None => Err(invalid("expected a GeoJSON polygon or a [lon, lat] ring")),
    }
}
