//! Independent reference implementations used by the integration suites.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use urban_pulse::geo::{GeoPoint, Mesh, ProjectedPoint};
use urban_pulse::ingest::{bucket, DataPoint, DensityParams, FieldCollection, Scenario};
use urban_pulse::pulse::{Beats, ResolutionBeats};
use urban_pulse::ingest::Resolution;

pub fn grid(nx: usize, ny: usize) -> Mesh {
    let m = Mesh::with_dims(GeoPoint { lat: 40.7, lon: -74.0 }, nx, ny, 50.0).unwrap();
    assert_eq!((m.nx(), m.ny()), (nx, ny));
    m
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// O(points x vertices) density: every point against every vertex.
pub fn naive_fields(
    points: &[DataPoint],
    mesh: &Mesh,
    scenario: Scenario,
    params: &DensityParams,
    utc_offset: i32,
) -> FieldCollection {
    let mut c = FieldCollection::zeros(scenario, mesh.nx(), mesh.ny());
    for p in points {
        for field in c.fields.iter_mut() {
            if bucket(p.timestamp, field.resolution, utc_offset) != field.step as usize {
                continue;
            }
            for v in 0..mesh.vertex_count() {
                let (i, j) = mesh.grid_coords(v);
                let dx = i as f64 * mesh.spacing() - p.location.x;
                let dy = j as f64 * mesh.spacing() - p.location.y;
                let d = (dx * dx + dy * dy).sqrt();
                if d <= params.radius() {
                    field.values[v] += p.weight * (-(d * d) / (params.epsilon() * params.epsilon())).exp();
                }
            }
        }
    }
    c
}

pub fn random_points(rng: &mut ChaCha8Rng, mesh: &Mesh, n: usize) -> Vec<DataPoint> {
    let (w, h) = mesh.covered_extent();
    (0..n)
        .map(|_| DataPoint {
            location: ProjectedPoint::new(rng.random_range(-100.0..w + 100.0), rng.random_range(-100.0..h + 100.0)),
            timestamp: rng.random_range(1_356_998_400..1_388_534_400),
            weight: rng.random_range(0.1..3.0),
        })
        .collect()
}

/// Random field; about half the fields are quantized so that ties occur.
pub fn random_field(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let quantize = rng.random_bool(0.5);
    (0..n)
        .map(|_| {
            let x: f64 = rng.random();
            if quantize {
                (x * 6.0).floor() / 6.0
            } else {
                x
            }
        })
        .collect()
}

/// Reference persistence pairs: for each prefix of the perturbed order the
/// super-level set components are recomputed from scratch by BFS, each named
/// by its highest vertex. A name that disappears was killed by the vertex
/// just added. Returns (creator, destroyer, persistence) sorted by creator.
pub fn brute_force_pairs(values: &[f64], mesh: &Mesh) -> Vec<(usize, usize, f64)> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        values[b].partial_cmp(&values[a]).unwrap().then(a.cmp(&b))
    });
    let mut rank = vec![0; n];
    for (k, &v) in order.iter().enumerate() {
        rank[v] = k;
    }
    let links: Vec<Vec<usize>> = (0..n).map(|v| mesh.vertex_link(v).unwrap()).collect();

    let components = |k: usize| -> BTreeSet<usize> {
        // Names (highest vertex) of the components of order[..=k].
        let mut seen = vec![false; n];
        let mut names = BTreeSet::new();
        for &start in &order[..=k] {
            if seen[start] {
                continue;
            }
            let mut top = start;
            let mut queue = VecDeque::from([start]);
            seen[start] = true;
            while let Some(v) = queue.pop_front() {
                if rank[v] < rank[top] {
                    top = v;
                }
                for &u in &links[v] {
                    if rank[u] <= k && !seen[u] {
                        seen[u] = true;
                        queue.push_back(u);
                    }
                }
            }
            names.insert(top);
        }
        names
    };

    let mut pairs = Vec::new();
    let mut previous = BTreeSet::new();
    for (k, &v) in order.iter().enumerate() {
        let current = components(k);
        for &dead in previous.difference(&current) {
            pairs.push((dead, v, values[dead] - values[v]));
        }
        previous = current;
    }
    for &survivor in &previous {
        let min = order[n - 1];
        pairs.push((survivor, min, values[survivor] - values[min]));
    }
    pairs.sort_by_key(|p| p.0);
    pairs
}

pub fn random_beats(rng: &mut ChaCha8Rng, resolutions: &[Resolution]) -> Beats {
    resolutions
        .iter()
        .map(|&r| {
            let n = r.step_count();
            let significant: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(0.3))).collect();
            let maxima = significant.iter().map(|&s| s | u8::from(rng.random_bool(0.4))).collect();
            let function = (0..n).map(|_| rng.random::<f64>()).collect::<Vec<_>>();
            let function_raw = function.iter().map(|x| x * 50.0).collect();
            (r, ResolutionBeats { significant, maxima, function, function_raw })
        })
        .collect()
}
