//! Beat-based similarity between pulses and region queries across catalogs.

use serde::{Deserialize, Serialize};

use super::{l2, Beats, Pulse, PulseCatalog};
use crate::error::{Error, Result};
use crate::geo::GeoPoint;

/// Which function beats the similarity compares.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionMode {
    #[default]
    Normalized,
    Raw,
}

fn bit_distance(a: &[u8], b: &[u8]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = f64::from(x) - f64::from(y);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

fn value_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Per-beat Euclidean distances over the resolutions both pulses carry, in
/// canonical order.
pub fn similarity_vector(a: &Beats, b: &Beats, mode: FunctionMode) -> Result<Vec<f64>> {
    let mut s = Vec::new();
    for (r, x) in a {
        let Some(y) = b.get(r) else { continue };
        s.push(bit_distance(&x.significant, &y.significant));
        s.push(bit_distance(&x.maxima, &y.maxima));
        s.push(match mode {
            FunctionMode::Normalized => value_distance(&x.function, &y.function),
            FunctionMode::Raw => value_distance(&x.function_raw, &y.function_raw),
        });
    }
    if s.is_empty() {
        return Err(Error::NoCommonResolution);
    }
    Ok(s)
}

/// Similarity measure between two pulses; lower is more similar.
pub fn similarity(a: &Beats, b: &Beats, mode: FunctionMode) -> Result<f64> {
    Ok(l2(&similarity_vector(a, b, mode)?))
}

/// Checks a lon/lat ring and returns it without the closing vertex.
pub fn validate_ring(ring: &[GeoPoint]) -> Result<Vec<GeoPoint>> {
    let mut pts: Vec<GeoPoint> = ring.to_vec();
    if pts.len() >= 2 && pts.first() == pts.last() {
        pts.pop();
    }
    if pts.iter().any(|p| !p.lat.is_finite() || !p.lon.is_finite()) {
        return Err(Error::InvalidRegion("non-finite coordinate".into()));
    }
    pts.dedup();
    if pts.len() < 3 {
        return Err(Error::InvalidRegion(format!("ring needs 3 distinct vertices, got {}", pts.len())));
    }
    let twice_area: f64 = (0..pts.len())
        .map(|k| {
            let (a, b) = (pts[k], pts[(k + 1) % pts.len()]);
            a.lon * b.lat - b.lon * a.lat
        })
        .sum();
    if twice_area == 0.0 {
        return Err(Error::InvalidRegion("ring has zero area".into()));
    }
    Ok(pts)
}

/// Even-odd point-in-polygon test in lon/lat.
pub fn point_in_polygon(p: GeoPoint, ring: &[GeoPoint]) -> bool {
    let mut inside = false;
    let n = ring.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (ring[i], ring[j]);
        if (a.lat > p.lat) != (b.lat > p.lat) {
            let lon_at = a.lon + (p.lat - a.lat) / (b.lat - a.lat) * (b.lon - a.lon);
            if p.lon < lon_at {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Match {
    pub target: usize,
    pub measure: f64,
}

/// Target pulses assigned to one selected source pulse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityResult {
    pub source: usize,
    pub source_rank: f64,
    /// Ascending by measure.
    pub matches: Vec<Match>,
}

fn by_rank_desc(a: &&Pulse, b: &&Pulse) -> std::cmp::Ordering {
    b.rank.total_cmp(&a.rank).then(a.id.cmp(&b.id))
}

/// Assigns every target pulse to its most similar source pulse among the
/// source pulses whose representative falls in `region`.
///
/// Groups come in descending source rank; a target equally close to two
/// sources goes to the higher-ranked one. Sources without any assigned
/// target still appear with an empty match list.
pub fn similar_pulses(
    region: &[GeoPoint],
    source: &PulseCatalog,
    target: &PulseCatalog,
    mode: FunctionMode,
) -> Result<Vec<SimilarityResult>> {
    let ring = validate_ring(region)?;
    let mut selected: Vec<&Pulse> = source
        .pulses
        .iter()
        .filter(|p| point_in_polygon(p.representative_geo, &ring))
        .collect();
    if selected.is_empty() {
        return Err(Error::EmptySelection);
    }
    selected.sort_by(by_rank_desc);
    assign(&selected, &target.pulses, mode)
}

/// Assignment step of [`similar_pulses`] for an explicit source list.
pub fn assign_all(source: &[Pulse], target: &[Pulse], mode: FunctionMode) -> Result<Vec<SimilarityResult>> {
    if source.is_empty() {
        return Err(Error::EmptySelection);
    }
    let mut selected: Vec<&Pulse> = source.iter().collect();
    selected.sort_by(by_rank_desc);
    assign(&selected, target, mode)
}

fn assign(selected: &[&Pulse], targets: &[Pulse], mode: FunctionMode) -> Result<Vec<SimilarityResult>> {
    let mut groups: Vec<SimilarityResult> = selected
        .iter()
        .map(|p| SimilarityResult { source: p.id, source_rank: p.rank, matches: Vec::new() })
        .collect();
    for t in targets {
        let mut best: Option<(usize, f64)> = None;
        for (k, s) in selected.iter().enumerate() {
            let m = similarity(&s.beats, &t.beats, mode)?;
            if best.is_none_or(|(_, b)| m < b) {
                best = Some((k, m));
            }
        }
        if let Some((k, measure)) = best {
            groups[k].matches.push(Match { target: t.id, measure });
        }
    }
    for g in &mut groups {
        g.matches
            .sort_by(|a, b| a.measure.total_cmp(&b.measure).then(a.target.cmp(&b.target)));
    }
    Ok(groups)
}
