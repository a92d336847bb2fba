//! Pulses: prominent locations found from the persistence of every field of
//! a scenario, clustered across time, and described by their beats.

mod catalog;
mod similarity;

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geo::{GeoPoint, Mesh, ProjectedPoint};
use crate::ingest::{FieldCollection, Resolution};
use crate::topology::{high_persistent_maxima, sweep_persistence};

pub use catalog::{build_catalog, PulseCatalog};
pub use similarity::{
    assign_all, point_in_polygon, similar_pulses, similarity, similarity_vector, validate_ring, FunctionMode, Match,
    SimilarityResult,
};

/// Default persistence threshold for a high-persistent maximum, in
/// normalized units.
pub const DEFAULT_THRESHOLD: f64 = 0.2;

/// Maxima of one field, split by persistence.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTopology {
    pub resolution: Resolution,
    pub step: u16,
    /// Maxima with a positive raw value, sorted.
    pub maxima: Vec<usize>,
    /// Maxima with persistence above the threshold, sorted.
    pub significant: Vec<usize>,
}

impl FieldTopology {
    pub fn is_maximum(&self, v: usize) -> bool {
        self.maxima.binary_search(&v).is_ok()
    }

    pub fn is_significant(&self, v: usize) -> bool {
        self.significant.binary_search(&v).is_ok()
    }
}

/// Persistence of every field of `collection`, in the collection's order.
pub fn analyze_fields(collection: &FieldCollection, mesh: &Mesh, threshold: f64) -> Vec<FieldTopology> {
    collection
        .fields
        .par_iter()
        .map(|field| {
            let values = field.normalized_values();
            let pairs = sweep_persistence(&values, mesh);
            let mut maxima: Vec<usize> = pairs
                .iter()
                .map(|p| p.creator)
                .filter(|&v| field.values[v] > 0.0)
                .collect();
            maxima.sort_unstable();
            FieldTopology {
                resolution: field.resolution,
                step: field.step,
                maxima,
                significant: high_persistent_maxima(&pairs, threshold),
            }
        })
        .collect()
}

/// Vertices that are high-persistent maxima in at least one field.
pub fn prominent_locations(topologies: &[FieldTopology]) -> Vec<usize> {
    let mut all: Vec<usize> = topologies.iter().flat_map(|t| t.significant.iter().copied()).collect();
    all.sort_unstable();
    all.dedup();
    all
}

/// Single-linkage clusters of `vertices` under the relation "within
/// `epsilon` meters". Each cluster is sorted; clusters are ordered by their
/// smallest vertex.
pub fn cluster_locations(vertices: &[usize], mesh: &Mesh, epsilon: f64) -> Vec<Vec<usize>> {
    let n = vertices.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }

    let cell_of = |p: ProjectedPoint| ((p.x / epsilon).floor() as i64, (p.y / epsilon).floor() as i64);
    let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (k, &v) in vertices.iter().enumerate() {
        cells.entry(cell_of(mesh.position(v))).or_default().push(k);
    }
    let eps2 = epsilon * epsilon;
    for (k, &v) in vertices.iter().enumerate() {
        let p = mesh.position(v);
        let (cx, cy) = cell_of(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                let Some(bucket) = cells.get(&(cx + dx, cy + dy)) else { continue };
                for &other in bucket {
                    if other <= k || p.distance_sq(&mesh.position(vertices[other])) > eps2 {
                        continue;
                    }
                    let (a, b) = (find(&mut parent, k), find(&mut parent, other));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
    }

    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (k, &v) in vertices.iter().enumerate() {
        let root = find(&mut parent, k);
        groups.entry(root).or_default().push(v);
    }
    groups
        .into_values()
        .map(|mut g| {
            g.sort_unstable();
            g
        })
        .collect()
}

/// Beats of one resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolutionBeats {
    pub significant: Vec<u8>,
    pub maxima: Vec<u8>,
    /// Normalized function values.
    pub function: Vec<f64>,
    pub function_raw: Vec<f64>,
}

impl ResolutionBeats {
    pub fn empty(steps: usize) -> Self {
        Self {
            significant: vec![0; steps],
            maxima: vec![0; steps],
            function: vec![0.0; steps],
            function_raw: vec![0.0; steps],
        }
    }

    /// `(significant, maxima, function)` feature entries.
    pub fn features(&self) -> [f64; 3] {
        let mean = |bits: &[u8]| bits.iter().map(|&b| f64::from(b)).sum::<f64>() / bits.len() as f64;
        [
            mean(&self.significant),
            mean(&self.maxima),
            self.function.iter().copied().fold(0.0, f64::max),
        ]
    }

    pub fn rank(&self) -> f64 {
        l2(&self.features())
    }
}

/// Beats of a location for each resolution of its scenario.
pub type Beats = BTreeMap<Resolution, ResolutionBeats>;

pub fn compute_beats(members: &[usize], collection: &FieldCollection, topologies: &[FieldTopology]) -> Beats {
    let mut beats: Beats = collection
        .resolutions()
        .iter()
        .map(|&r| (r, ResolutionBeats::empty(r.step_count())))
        .collect();
    for (field, topo) in collection.fields.iter().zip(topologies) {
        let b = beats.get_mut(&field.resolution).expect("resolution of the scenario");
        let t = field.step as usize;
        b.maxima[t] = u8::from(members.iter().any(|&v| topo.is_maximum(v)));
        b.significant[t] = u8::from(members.iter().any(|&v| topo.is_significant(v)));
        b.function[t] = members.iter().map(|&v| field.normalized(v)).fold(0.0, f64::max);
        b.function_raw[t] = members.iter().map(|&v| field.values[v]).fold(0.0, f64::max);
    }
    beats
}

/// Feature vector in canonical (resolution, significant/maxima/function) order.
pub fn feature_vector(beats: &Beats) -> Vec<f64> {
    beats.values().flat_map(|b| b.features()).collect()
}

pub fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Rank of a pulse: the L2 norm of its feature vector.
pub fn rank(beats: &Beats) -> f64 {
    l2(&feature_vector(beats))
}

pub fn resolution_ranks(beats: &Beats) -> BTreeMap<Resolution, f64> {
    beats.iter().map(|(&r, b)| (r, b.rank())).collect()
}

/// A clustered prominent location with its beats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub id: usize,
    #[serde(rename = "member_vertices")]
    pub members: Vec<usize>,
    /// Centroid of the member vertices, mesh-local meters.
    #[serde(rename = "representative_xy")]
    pub representative: ProjectedPoint,
    #[serde(rename = "representative")]
    pub representative_geo: GeoPoint,
    pub beats: Beats,
    pub feature: Vec<f64>,
    pub rank: f64,
    pub resolution_ranks: BTreeMap<Resolution, f64>,
}

/// Runs location extraction, clustering and beat computation for one
/// scenario part. Pulses come back ordered by id: descending rank, ties by
/// representative `(y, x)`.
pub fn extract_pulses(collection: &FieldCollection, mesh: &Mesh, threshold: f64, epsilon: f64) -> Vec<Pulse> {
    let topologies = analyze_fields(collection, mesh, threshold);
    let prominent = prominent_locations(&topologies);
    let clusters = cluster_locations(&prominent, mesh, epsilon);

    let mut pulses: Vec<Pulse> = clusters
        .into_par_iter()
        .map(|members| {
            let n = members.len() as f64;
            let (sx, sy) = members.iter().fold((0.0, 0.0), |(sx, sy), &v| {
                let p = mesh.position(v);
                (sx + p.x, sy + p.y)
            });
            let representative = ProjectedPoint::new(sx / n, sy / n);
            let beats = compute_beats(&members, collection, &topologies);
            let feature = feature_vector(&beats);
            Pulse {
                id: 0,
                representative_geo: mesh.to_geo(representative),
                rank: l2(&feature),
                resolution_ranks: resolution_ranks(&beats),
                members,
                representative,
                beats,
                feature,
            }
        })
        .collect();

    pulses.sort_by(|a, b| {
        b.rank
            .total_cmp(&a.rank)
            .then(a.representative.y.total_cmp(&b.representative.y))
            .then(a.representative.x.total_cmp(&b.representative.x))
    });
    for (id, p) in pulses.iter_mut().enumerate() {
        p.id = id;
    }
    pulses
}
