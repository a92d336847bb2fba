mod common;

use common::{grid, random_beats, rng};
use urban_pulse::geo::{GeoPoint, ProjectedPoint};
use urban_pulse::ingest::{compute_fields, normalize, DataPoint, FieldCollection, Resolution, Scenario};
use urban_pulse::pulse::{
    analyze_fields, assign_all, compute_beats, extract_pulses, similarity, FunctionMode, DEFAULT_THRESHOLD,
};
use urban_pulse::synthetic::{generate_points, planted_generators, square_city, Generator};
use urban_pulse::topology::{classify, CriticalType};

#[test]
fn similarity_is_a_pseudometric() {
    let mut r = rng(11);
    let res = [Resolution::All, Resolution::Day, Resolution::Hour];
    for _ in 0..2_000 {
        let (a, b, c) = (random_beats(&mut r, &res), random_beats(&mut r, &res), random_beats(&mut r, &res));
        let ab = similarity(&a, &b, FunctionMode::Normalized).unwrap();
        let ba = similarity(&b, &a, FunctionMode::Normalized).unwrap();
        let bc = similarity(&b, &c, FunctionMode::Normalized).unwrap();
        let ac = similarity(&a, &c, FunctionMode::Normalized).unwrap();
        assert!(ab >= 0.0);
        assert_eq!(ab, ba);
        assert_eq!(similarity(&a, &a, FunctionMode::Normalized).unwrap(), 0.0);
        assert!(ab + bc - ac >= -1e-12);
    }
}

/// Moving hot spot: the peak drifts by one grid step between hours, so the
/// maxima of different steps are distinct vertices within epsilon.
#[test]
fn drifting_maxima_merge_into_one_region() {
    let config = square_city("drift", GeoPoint { lat: 40.75, lon: -73.98 }, 3_000.0, 0);
    let mesh = config.mesh().unwrap();
    let mut points = Vec::new();
    let base = 1_372_636_800; // 2013-07-01T00:00:00Z
    for hour in 0..3 {
        let center = ProjectedPoint::new(1_500.0 + 50.0 * hour as f64, 1_500.0);
        for k in 0..200 {
            let angle = k as f64 * 0.7;
            let r = 10.0 * (k % 5) as f64;
            let loc = ProjectedPoint::new(center.x + r * angle.cos(), center.y + r * angle.sin());
            points.push(DataPoint::new(loc, base + hour * 3_600 + k));
        }
    }
    let c = compute_fields(&points, &mesh, Scenario::DEFAULT, &config.density_params().unwrap(), 0);
    let pulses = extract_pulses(&c, &mesh, DEFAULT_THRESHOLD, config.epsilon_m);
    assert_eq!(pulses.len(), 1);
    assert!(pulses[0].members.len() >= 2, "{:?}", pulses[0].members);
    let hour = &pulses[0].beats[&Resolution::Hour];
    assert_eq!(&hour.significant[..4], &[1, 1, 1, 0]);
}

#[test]
fn two_vertex_location_beats_match_classification() {
    let mesh = grid(6, 6);
    let scenario = Scenario::DEFAULT;
    let mut c = FieldCollection::zeros(scenario, 6, 6);
    let a = mesh.vertex_id(2, 2);
    let b = mesh.vertex_id(3, 2);
    let mut r = rng(5);
    for f in c.fields.iter_mut().filter(|f| f.resolution == Resolution::Hour) {
        for x in f.values.iter_mut() {
            *x = rand::Rng::random_range(&mut r, 0.0..0.1);
        }
        if f.step == 3 {
            f.values[a] = 5.0;
        }
        if f.step == 9 {
            f.values[b] = 4.0;
        }
    }
    let c = normalize(c);
    let topologies = analyze_fields(&c, &mesh, DEFAULT_THRESHOLD);
    let beats = compute_beats(&[a, b], &c, &topologies);
    let hour = &beats[&Resolution::Hour];
    for t in 0..24 {
        let f = c.get(Resolution::Hour, t).unwrap();
        let values = f.normalized_values();
        let oracle = [a, b]
            .iter()
            .any(|&v| classify(&values, &mesh, v).unwrap() == CriticalType::Maximum && f.values[v] > 0.0);
        assert_eq!(hour.maxima[t] == 1, oracle, "step {t}");
        assert!(hour.significant[t] <= hour.maxima[t]);
    }
    assert_eq!(hour.maxima[3], 1);
    assert_eq!(hour.maxima[9], 1);
    assert_eq!(hour.significant[3], 1);
    assert_eq!(hour.significant[9], 1);
}

fn small_city(seed: u64) -> (urban_pulse::CityConfig, Vec<Generator>, Vec<DataPoint>) {
    let config = square_city("small", GeoPoint { lat: 37.77, lon: -122.42 }, 10_000.0, -480);
    let mesh = config.mesh().unwrap();
    let gens = planted_generators(10_000.0);
    let points = generate_points(&mesh, &gens, 20_000, 0.05, config.utc_offset_minutes, seed);
    (config, gens, points)
}

#[test]
fn pulse_invariants_on_synthetic_city() {
    let (config, _, points) = small_city(3);
    let mesh = config.mesh().unwrap();
    let c = compute_fields(&points, &mesh, Scenario::DEFAULT, &config.density_params().unwrap(), config.utc_offset_minutes);
    let pulses = extract_pulses(&c, &mesh, DEFAULT_THRESHOLD, config.epsilon_m);
    assert!(!pulses.is_empty());
    for p in &pulses {
        for b in p.beats.values() {
            assert!(b.significant.iter().zip(&b.maxima).all(|(&s, &m)| s <= m));
            assert!(b.function.iter().all(|&x| (0.0..=1.0).contains(&x)));
        }
        let sum_sq: f64 = p.resolution_ranks.values().map(|r| r * r).sum();
        assert!((p.rank * p.rank - sum_sq).abs() <= 1e-12);
        assert!(p.rank >= 0.0 && p.rank <= 12f64.sqrt());
        assert!(p.feature.iter().all(|&x| (0.0..=1.0).contains(&x)));
        assert_eq!(p.feature.len(), 12);
    }
    assert!(pulses.windows(2).all(|w| w[0].rank >= w[1].rank));
    assert!(pulses.iter().enumerate().all(|(k, p)| p.id == k));
}

#[test]
fn twin_cities_match_exactly() {
    let (config, _, points) = small_city(21);
    let mesh = config.mesh().unwrap();
    let other = square_city("twin", GeoPoint { lat: 40.75, lon: -73.98 }, 10_000.0, -300);
    let other_mesh = other.mesh().unwrap();
    // Same local positions and same local times in the twin city.
    let shifted: Vec<DataPoint> = points
        .iter()
        .map(|p| DataPoint { timestamp: p.timestamp - 180 * 60, ..*p })
        .collect();
    let a = compute_fields(&points, &mesh, Scenario::DEFAULT, &config.density_params().unwrap(), -480);
    let b = compute_fields(&shifted, &other_mesh, Scenario::DEFAULT, &other.density_params().unwrap(), -300);
    let pa = extract_pulses(&a, &mesh, DEFAULT_THRESHOLD, 100.0);
    let pb = extract_pulses(&b, &other_mesh, DEFAULT_THRESHOLD, 100.0);
    let groups = assign_all(&pa, &pb, FunctionMode::Normalized).unwrap();
    let best: Vec<f64> = groups.iter().flat_map(|g| g.matches.iter().map(|m| m.measure)).collect();
    assert_eq!(best.len(), pb.len());
    assert!(best.iter().all(|&m| m == 0.0), "{best:?}");
}
