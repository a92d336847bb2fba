//! The batch steps behind the `ingest`, `pulses` and `compare` commands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use sha2::{Digest, Sha256};
use urban_pulse::geo::{GeoPoint, Mesh};
use urban_pulse::ingest::{
    compute_fields, mean_fields, parse_points, write_fields, DataPoint, FieldCollection, RejectionReport, Scenario,
    ScenarioFamily,
};
use urban_pulse::pulse::{assign_all, build_catalog, similar_pulses, FunctionMode, PulseCatalog, SimilarityResult};
use urban_pulse::topology::sweep_persistence;
use urban_pulse::{CityConfig, Error};

use crate::dataset::{self, Aggregate, Manifest, CONFIG_FILE};

/// Hex SHA-256 identifying a dataset built from `input` under `config`.
pub fn dataset_digest(config: &CityConfig, aggregate: Aggregate, input: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(config.digest());
    h.update(aggregate.to_string().as_bytes());
    h.update(input);
    hex::encode(h.finalize())
}

#[derive(Debug, Clone)]
pub struct IngestRequest {
    pub config: PathBuf,
    pub input: PathBuf,
    pub family: ScenarioFamily,
    pub out: PathBuf,
    pub aggregate: Aggregate,
}

#[derive(Debug, Clone)]
pub struct IngestSummary {
    pub manifest: Manifest,
    pub rejection: RejectionReport,
    /// Written parts with their field counts.
    pub parts: Vec<(Scenario, usize)>,
    pub parse_time: Duration,
    pub field_time: Duration,
}

fn write_part(
    out: &Path,
    config: &CityConfig,
    mesh: &Mesh,
    points: &[DataPoint],
    scenario: Scenario,
    aggregate: Aggregate,
) -> Result<usize> {
    let params = config.density_params()?;
    let digest = config.digest();
    let sum = compute_fields(points, mesh, scenario, &params, config.utc_offset_minutes);
    let fields = match aggregate {
        Aggregate::Sum => sum,
        Aggregate::Mean => {
            let unit: Vec<DataPoint> = points.iter().map(|p| DataPoint { weight: 1.0, ..*p }).collect();
            let count = compute_fields(&unit, mesh, scenario, &params, config.utc_offset_minutes);
            write_fields(&sum, mesh.spacing(), &digest, dataset::component_path(out, scenario, "sum"))?;
            write_fields(&count, mesh.spacing(), &digest, dataset::component_path(out, scenario, "count"))?;
            mean_fields(&sum, &count)?
        }
    };
    write_fields(&fields, mesh.spacing(), &digest, dataset::field_path(out, scenario))?;
    Ok(fields.fields.len())
}

/// Parses the input CSV, computes the fields of every part of the requested
/// scenario family and records them in the dataset manifest.
pub fn ingest(req: &IngestRequest) -> Result<IngestSummary> {
    let config = CityConfig::load(&req.config).with_context(|| format!("loading {}", req.config.display()))?;
    let mesh = config.mesh()?;
    let bytes = fs::read(&req.input).with_context(|| format!("reading {}", req.input.display()))?;

    let start = Instant::now();
    let (points, rejection) = if bytes.iter().all(u8::is_ascii_whitespace) {
        log::warn!("{} is empty, all fields will be zero", req.input.display());
        (Vec::new(), RejectionReport::default())
    } else {
        parse_points(&bytes[..], &mesh, config.density_params()?.radius())?
    };
    let parse_time = start.elapsed();

    let digest = dataset_digest(&config, req.aggregate, &bytes);
    fs::create_dir_all(&req.out)?;
    let mut manifest = match Manifest::load(&req.out) {
        Ok(m) if m.dataset_digest == digest => m,
        Ok(_) => {
            log::warn!("{} held another dataset, replacing its manifest", req.out.display());
            fresh_manifest(&config, &digest, req.aggregate, rejection)
        }
        Err(_) => fresh_manifest(&config, &digest, req.aggregate, rejection),
    };
    let mut text = serde_json::to_string_pretty(&config)?;
    text.push('\n');
    fs::write(req.out.join(CONFIG_FILE), text)?;

    let start = Instant::now();
    let mut parts = Vec::new();
    for scenario in req.family.scenarios() {
        fs::create_dir_all(dataset::field_path(&req.out, scenario).parent().expect("nested path"))?;
        let count = write_part(&req.out, &config, &mesh, &points, scenario, req.aggregate)?;
        parts.push((scenario, count));
    }
    let field_time = start.elapsed();

    manifest
        .scenarios
        .insert(req.family, req.family.parts().iter().map(|p| p.to_string()).collect());
    manifest.write(&req.out)?;
    Ok(IngestSummary { manifest, rejection, parts, parse_time, field_time })
}

fn fresh_manifest(config: &CityConfig, digest: &str, aggregate: Aggregate, rejection: RejectionReport) -> Manifest {
    Manifest {
        city: config.name.clone(),
        config_digest: hex::encode(config.digest()),
        dataset_digest: digest.to_string(),
        aggregate,
        rejection,
        scenarios: Default::default(),
    }
}

#[derive(Debug, Clone)]
pub struct PulsesRequest {
    pub dir: PathBuf,
    pub threshold: f64,
    pub family: Option<ScenarioFamily>,
    pub part: Option<String>,
    /// Output file; requires the selection to be a single part.
    pub out: Option<PathBuf>,
    /// Directory for per-field persistence diagrams.
    pub dump_persistence: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct PulsesOutput {
    pub scenario: Scenario,
    pub path: PathBuf,
    pub catalog: PulseCatalog,
    pub elapsed: Duration,
}

/// Extracts and writes the pulse catalog of every selected ingested part.
pub fn pulses(req: &PulsesRequest) -> Result<Vec<PulsesOutput>> {
    if !(req.threshold.is_finite() && req.threshold >= 0.0) {
        bail!("threshold must be a non-negative number, got {}", req.threshold);
    }
    let config = dataset::load_config(&req.dir)?;
    let mesh = config.mesh()?;
    let manifest = Manifest::load(&req.dir)?;
    let selected: Vec<Scenario> = manifest
        .parts()?
        .into_iter()
        .filter(|s| req.family.is_none_or(|f| s.family == f))
        .filter(|s| req.part.as_deref().is_none_or(|p| s.part_label().eq_ignore_ascii_case(p)))
        .collect();
    if selected.is_empty() {
        bail!("{} has no ingested part matching the selection", req.dir.display());
    }
    if req.out.is_some() && selected.len() > 1 {
        let names: Vec<String> = selected.iter().map(|s| s.to_string()).collect();
        bail!("--out needs a single part, the selection has {}; pass --scenario and --part", names.join(", "));
    }

    let mut outputs = Vec::new();
    for scenario in selected {
        let fields = dataset::load_fields(&req.dir, &config, &mesh, scenario)?;
        let start = Instant::now();
        let catalog =
            build_catalog(&config.name, &manifest.dataset_digest, &fields, &mesh, req.threshold, config.epsilon_m);
        let elapsed = start.elapsed();
        let path = match &req.out {
            Some(p) => p.clone(),
            None => dataset::catalog_path(&req.dir, scenario),
        };
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        catalog.write(&path)?;
        if let Some(dump) = &req.dump_persistence {
            dump_persistence(dump, &fields, &mesh)?;
        }
        outputs.push(PulsesOutput { scenario, path, catalog, elapsed });
    }
    Ok(outputs)
}

/// Persistence diagram of one field as `creator_vertex,destroyer_vertex,persistence` rows.
pub fn persistence_csv(values: &[f64], mesh: &Mesh) -> String {
    let mut out = String::from("creator_vertex,destroyer_vertex,persistence\n");
    for p in sweep_persistence(values, mesh) {
        writeln!(out, "{},{},{}", p.creator, p.destroyer, p.persistence).expect("write to string");
    }
    out
}

/// Writes one `<family>-<part>-<resolution>-<step>.csv` file per field.
pub fn dump_persistence(dir: &Path, fields: &FieldCollection, mesh: &Mesh) -> Result<()> {
    fs::create_dir_all(dir)?;
    let s = fields.scenario;
    for f in &fields.fields {
        let name = format!("{}-{}-{}-{}.csv", s.family.name(), s.part_label(), f.resolution, f.step);
        fs::write(dir.join(name), persistence_csv(&f.normalized_values(), mesh))?;
    }
    Ok(())
}

/// Matches every pulse of `b` to its closest pulse of `a`, restricted to the
/// `a` pulses inside `region` when given. An empty selection yields no groups.
pub fn compare(
    a: &PulseCatalog,
    b: &PulseCatalog,
    region: Option<&[GeoPoint]>,
    mode: FunctionMode,
) -> Result<Vec<SimilarityResult>> {
    let groups = match region {
        Some(ring) => similar_pulses(ring, a, b, mode),
        None => assign_all(&a.pulses, &b.pulses, mode),
    };
    match groups {
        Ok(g) => Ok(g),
        Err(Error::EmptySelection) => Ok(Vec::new()),
        Err(e) => Err(e.into()),
    }
}

/// One row per (source, matched target), in group order. A source without
/// matches gets one row with empty target columns.
pub fn similarity_csv(groups: &[SimilarityResult]) -> String {
    let mut out = String::from("source_id,source_rank,target_id,measure\n");
    for g in groups {
        if g.matches.is_empty() {
            writeln!(out, "{},{},,", g.source, g.source_rank).expect("write to string");
        }
        for m in &g.matches {
            writeln!(out, "{},{},{},{}", g.source, g.source_rank, m.target, m.measure).expect("write to string");
        }
    }
    out
}

