#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use urban_pulse::geo::GeoPoint;
use urban_pulse::ingest::ScenarioFamily;
use urban_pulse::synthetic::{generate_points, planted_generators, square_city, to_csv};
use urban_pulse_service::dataset::Aggregate;
use urban_pulse_service::pipeline::{ingest, pulses, IngestRequest, PulsesRequest};

pub const SIZE_M: f64 = 4_000.0;

/// Writes `<root>/<name>.json` and `<root>/<name>.csv` for a small synthetic city.
pub fn write_inputs(root: &Path, name: &str, center: GeoPoint, utc_offset: i32, seed: u64) -> (PathBuf, PathBuf) {
    let config = square_city(name, center, SIZE_M, utc_offset);
    let mesh = config.mesh().unwrap();
    let points = generate_points(&mesh, &planted_generators(SIZE_M), 8_000, 0.05, utc_offset, seed);
    let config_path = root.join(format!("{name}.json"));
    let csv_path = root.join(format!("{name}.csv"));
    fs::write(&config_path, serde_json::to_string(&config).unwrap()).unwrap();
    fs::write(&csv_path, to_csv(&points, &mesh)).unwrap();
    (config_path, csv_path)
}

/// Ingests the default and seasons scenarios and extracts all catalogs.
pub fn build_dataset(root: &Path, name: &str, center: GeoPoint, utc_offset: i32, seed: u64) -> PathBuf {
    let (config, input) = write_inputs(root, name, center, utc_offset, seed);
    let out = root.join(name);
    for family in [ScenarioFamily::Default, ScenarioFamily::Seasons] {
        ingest(&IngestRequest {
            config: config.clone(),
            input: input.clone(),
            family,
            out: out.clone(),
            aggregate: Aggregate::Sum,
        })
        .unwrap();
    }
    pulses(&PulsesRequest {
        dir: out.clone(),
        threshold: 0.2,
        family: None,
        part: None,
        out: None,
        dump_persistence: None,
    })
    .unwrap();
    out
}

pub const NYC: GeoPoint = GeoPoint { lat: 40.75, lon: -73.98 };
pub const SF: GeoPoint = GeoPoint { lat: 37.77, lon: -122.42 };
