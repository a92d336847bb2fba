mod common;

use common::{grid, naive_fields, random_points, rng};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use urban_pulse::ingest::{compute_fields, DataPoint, DensityParams, FieldCollection, Scenario};

fn params() -> DensityParams {
    DensityParams::new(100.0, 500.0).unwrap()
}

fn max_rel_diff(a: &FieldCollection, b: &FieldCollection) -> f64 {
    a.fields
        .iter()
        .zip(&b.fields)
        .flat_map(|(x, y)| x.values.iter().zip(&y.values))
        .map(|(p, q)| (p - q).abs() / p.abs().max(q.abs()).max(1e-300))
        .fold(0.0, f64::max)
}

fn max_abs_diff(a: &FieldCollection, b: &FieldCollection) -> f64 {
    a.fields
        .iter()
        .zip(&b.fields)
        .flat_map(|(x, y)| x.values.iter().zip(&y.values))
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn grid_index_matches_naive(seed in any::<u64>(), nx in 2usize..=20, ny in 2usize..=20, n in 0usize..300) {
        let mesh = grid(nx, ny);
        let mut r = rng(seed);
        let points = random_points(&mut r, &mesh, n);
        let fast = compute_fields(&points, &mesh, Scenario::DEFAULT, &params(), -300);
        let slow = naive_fields(&points, &mesh, Scenario::DEFAULT, &params(), -300);
        prop_assert!(max_abs_diff(&fast, &slow) <= 1e-12);
    }

    #[test]
    fn permutation_invariance(seed in any::<u64>()) {
        let mesh = grid(15, 12);
        let mut r = rng(seed);
        let mut points = random_points(&mut r, &mesh, 400);
        let a = compute_fields(&points, &mesh, Scenario::DEFAULT, &params(), 0);
        points.shuffle(&mut r);
        let b = compute_fields(&points, &mesh, Scenario::DEFAULT, &params(), 0);
        prop_assert!(max_rel_diff(&a, &b) <= 1e-9);
    }

    #[test]
    fn additivity(seed in any::<u64>(), split in 0usize..200) {
        let mesh = grid(12, 12);
        let mut r = rng(seed);
        let points = random_points(&mut r, &mesh, 200);
        let (left, right) = points.split_at(split);
        let all = compute_fields(&points, &mesh, Scenario::DEFAULT, &params(), 0);
        let a = compute_fields(left, &mesh, Scenario::DEFAULT, &params(), 0);
        let b = compute_fields(right, &mesh, Scenario::DEFAULT, &params(), 0);
        for ((fa, fb), fall) in a.fields.iter().zip(&b.fields).zip(&all.fields) {
            for v in 0..mesh.vertex_count() {
                prop_assert!((fa.values[v] + fb.values[v] - fall.values[v]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn scale_equivariance(seed in any::<u64>(), c in 0.01f64..1000.0) {
        let mesh = grid(12, 10);
        let mut r = rng(seed);
        let points = random_points(&mut r, &mesh, 150);
        let scaled: Vec<DataPoint> = points.iter().map(|p| DataPoint { weight: p.weight * c, ..*p }).collect();
        let a = compute_fields(&points, &mesh, Scenario::DEFAULT, &params(), 0);
        let b = compute_fields(&scaled, &mesh, Scenario::DEFAULT, &params(), 0);
        for (fa, fb) in a.fields.iter().zip(&b.fields) {
            for v in 0..mesh.vertex_count() {
                prop_assert!((fa.values[v] * c - fb.values[v]).abs() <= 1e-12 * fb.values[v].abs().max(1.0));
                prop_assert!((fa.normalized(v) - fb.normalized(v)).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn influence_stops_at_radius() {
    let mesh = grid(30, 30);
    let mut r = rng(3);
    for p in random_points(&mut r, &mesh, 50) {
        let c = compute_fields(&[p], &mesh, Scenario::DEFAULT, &params(), 0);
        let field = &c.fields[0];
        for v in 0..mesh.vertex_count() {
            let d = mesh.position(v).distance(&p.location);
            if d > 500.0 {
                assert_eq!(field.values[v], 0.0);
            } else {
                assert!(field.values[v] > 0.0);
            }
        }
    }
}

#[test]
fn zero_points_give_zero_fields() {
    let mesh = grid(5, 5);
    let c = compute_fields(&[], &mesh, Scenario::DEFAULT, &params(), 0);
    assert_eq!(c.fields.len(), 44);
    assert!(c.fields.iter().all(|f| f.resolution_max == 0.0 && f.values.iter().all(|&x| x == 0.0)));
}
