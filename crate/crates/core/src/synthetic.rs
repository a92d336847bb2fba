//! Synthetic cities: Gaussian activity generators with planted temporal
//! schedules, used for end-to-end fixtures and demos.

use chrono::{Datelike, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::config::{CityConfig, DEFAULT_EPSILON_M, DEFAULT_SPACING_M};
use crate::geo::{Bounds, GeoPoint, Mesh, ProjectedPoint};
use crate::ingest::{DataPoint, Resolution};

/// A Gaussian blob of activity that is only active on its schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    /// Mesh-local center in meters.
    pub center: ProjectedPoint,
    pub sigma: f64,
    /// Local hours of day (0..24).
    pub hours: Vec<u32>,
    /// Days of week, Monday = 0.
    pub days: Vec<u32>,
    /// Months, January = 0.
    pub months: Vec<u32>,
}

impl Generator {
    /// Planted 0/1 activity per step of `resolution`.
    pub fn schedule(&self, resolution: Resolution) -> Vec<u8> {
        let active: &[u32] = match resolution {
            Resolution::All => return vec![1],
            Resolution::Month => &self.months,
            Resolution::Day => &self.days,
            Resolution::Hour => &self.hours,
        };
        (0..resolution.step_count() as u32).map(|s| u8::from(active.contains(&s))).collect()
    }
}

const YEAR: i32 = 2013;

fn local_timestamp<R: Rng>(rng: &mut R, g: &Generator, utc_offset_minutes: i32) -> i64 {
    let month = g.months[rng.random_range(0..g.months.len())] + 1;
    let weekday = g.days[rng.random_range(0..g.days.len())];
    let candidates: Vec<NaiveDate> = (1..=31)
        .filter_map(|d| NaiveDate::from_ymd_opt(YEAR, month, d))
        .filter(|d| d.weekday().num_days_from_monday() == weekday)
        .collect();
    let date = candidates[rng.random_range(0..candidates.len())];
    let hour = g.hours[rng.random_range(0..g.hours.len())];
    let t = date
        .and_hms_opt(hour, rng.random_range(0..60), rng.random_range(0..60))
        .expect("valid time");
    t.and_utc().timestamp() - i64::from(utc_offset_minutes) * 60
}

/// Draws `count` points: a `background` fraction uniform over the mesh at
/// uniform local times in the year, the rest split evenly over the generators.
pub fn generate_points(
    mesh: &Mesh,
    generators: &[Generator],
    count: usize,
    background: f64,
    utc_offset_minutes: i32,
    seed: u64,
) -> Vec<DataPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = mesh.covered_extent();
    let year_start = NaiveDate::from_ymd_opt(YEAR, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap().and_utc().timestamp()
        - i64::from(utc_offset_minutes) * 60;
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    (0..count)
        .map(|k| {
            if generators.is_empty() || rng.random::<f64>() < background {
                let location = ProjectedPoint::new(rng.random_range(0.0..=w), rng.random_range(0.0..=h));
                DataPoint::new(location, year_start + rng.random_range(0..365 * 86_400))
            } else {
                let g = &generators[k % generators.len()];
                let location = ProjectedPoint::new(
                    g.center.x + g.sigma * unit.sample(&mut rng),
                    g.center.y + g.sigma * unit.sample(&mut rng),
                );
                DataPoint::new(location, local_timestamp(&mut rng, g, utc_offset_minutes))
            }
        })
        .collect()
}

/// Square test city of `size_m` meters centered on `center`.
pub fn square_city(name: &str, center: GeoPoint, size_m: f64, utc_offset_minutes: i32) -> CityConfig {
    let half = size_m / 2.0 + 1e-3;
    let sw = crate::geo::unproject(ProjectedPoint::new(-half, -half), center);
    let ne = crate::geo::unproject(ProjectedPoint::new(half, half), center);
    CityConfig {
        name: name.to_string(),
        bounds: Bounds::from_corners(sw, ne),
        spacing_m: DEFAULT_SPACING_M,
        epsilon_m: DEFAULT_EPSILON_M,
        utc_offset_minutes,
    }
}

/// Five generators on a square city of side `size_m` with pairwise disjoint
/// hour, day and month schedules. Hours 20..24 are left without any generator.
pub fn planted_generators(size_m: f64) -> Vec<Generator> {
    let centers = [(0.2, 0.2), (0.75, 0.25), (0.5, 0.5), (0.25, 0.75), (0.8, 0.8)];
    let days: [&[u32]; 5] = [&[0, 1], &[2], &[3, 4], &[5], &[6]];
    let months: [&[u32]; 5] = [&[0, 1], &[2, 3, 4], &[5, 6], &[7, 8], &[9, 10, 11]];
    centers
        .iter()
        .enumerate()
        .map(|(k, &(x, y))| Generator {
            center: ProjectedPoint::new(x * size_m, y * size_m),
            sigma: 40.0,
            hours: (4 * k as u32..4 * k as u32 + 4).collect(),
            days: days[k].to_vec(),
            months: months[k].to_vec(),
        })
        .collect()
}

/// CSV text (`lat,lon,timestamp,weight`) for `points` on `mesh`.
pub fn to_csv(points: &[DataPoint], mesh: &Mesh) -> String {
    let mut out = String::from("lat,lon,timestamp,weight\n");
    for p in points {
        let g = mesh.to_geo(p.location);
        out.push_str(&format!("{:.7},{:.7},{},{}\n", g.lat, g.lon, p.timestamp, p.weight));
    }
    out
}
