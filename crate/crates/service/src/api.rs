//! Read-only JSON API over loaded city datasets.
//!
//! Every response body is a pure function of the request and the loaded
//! datasets, so GET responses carry the dataset digest as their ETag.

use std::collections::BTreeMap;
use std::sync::Arc;

use anyhow::bail;
use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use urban_pulse::ingest::{Resolution, Scenario, ScenarioFamily};
use urban_pulse::pulse::{similar_pulses, FunctionMode, PulseCatalog, ResolutionBeats};
use urban_pulse::{CityConfig, Error};

use crate::dataset::CityDataset;
use crate::region::parse_region;

pub struct AppState {
    cities: BTreeMap<String, CityDataset>,
    inventory_tag: String,
}

impl AppState {
    pub fn new(datasets: Vec<CityDataset>) -> anyhow::Result<Self> {
        let mut cities = BTreeMap::new();
        for d in datasets {
            let name = d.name().to_string();
            if cities.contains_key(&name) {
                bail!("city `{name}` is loaded twice");
            }
            cities.insert(name, d);
        }
        let mut h = Sha256::new();
        for (name, d) in &cities {
            h.update(name.as_bytes());
            h.update(d.digest().as_bytes());
        }
        Ok(Self { cities, inventory_tag: hex::encode(h.finalize()) })
    }

    fn city(&self, name: &str) -> Result<&CityDataset, ApiError> {
        self.cities
            .get(name)
            .ok_or_else(|| ApiError::not_found(format!("unknown city `{name}`")))
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/cities", get(list_cities))
        .route("/cities/{city}/pulses", get(city_pulses))
        .route("/cities/{city}/pulses/{id}/beats", get(pulse_beats))
        .route("/cities/{city}/fields/{scenario}/{part}/{resolution}/{step}", get(field))
        .route("/similarity", post(similarity))
        .fallback(|| async { ApiError::not_found("no such endpoint".into()) })
        .with_state(state)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn not_found(message: String) -> Self {
        Self { status: StatusCode::NOT_FOUND, code: "not_found", message }
    }

    fn bad_request(message: String) -> Self {
        Self { status: StatusCode::BAD_REQUEST, code: "bad_request", message }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        match e {
            Error::Unknown { .. } => Self::not_found(e.to_string()),
            Error::InvalidRegion(_) | Error::InvalidCoordinate(_) | Error::NoCommonResolution => {
                Self::bad_request(e.to_string())
            }
            _ => Self { status: StatusCode::INTERNAL_SERVER_ERROR, code: "internal", message: e.to_string() },
        }
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    code: &'a str,
    message: &'a str,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(ErrorBody { code: self.code, message: &self.message })).into_response()
    }
}

type ApiResult = Result<Response, ApiError>;

fn tagged_json(headers: &HeaderMap, tag: &str, body: &impl Serialize) -> ApiResult {
    let etag = HeaderValue::from_str(&format!("\"{tag}\"")).expect("hex digest is a valid header");
    if headers.get(header::IF_NONE_MATCH) == Some(&etag) {
        return Ok((StatusCode::NOT_MODIFIED, [(header::ETAG, etag)]).into_response());
    }
    let bytes = serde_json::to_vec(body).map_err(Error::from)?;
    Ok((
        [(header::CONTENT_TYPE, HeaderValue::from_static("application/json")), (header::ETAG, etag)],
        bytes,
    )
        .into_response())
}

fn scenario_of(family: Option<&str>, part: Option<&str>) -> Result<Scenario, ApiError> {
    let family: ScenarioFamily = family.unwrap_or("default").parse()?;
    let part = part.unwrap_or(family.parts()[0]);
    Ok(Scenario::new(family, part)?)
}

fn catalog(city: &CityDataset, scenario: Scenario) -> Result<&PulseCatalog, ApiError> {
    city.catalogs
        .get(&scenario)
        .ok_or_else(|| ApiError::not_found(format!("city `{}` has no pulse catalog for {scenario}", city.name())))
}

#[derive(Serialize)]
struct MeshSummary {
    nx: usize,
    ny: usize,
    spacing_m: f64,
    vertex_count: usize,
}

#[derive(Serialize)]
struct PartSummary {
    part: &'static str,
    resolutions: &'static [Resolution],
    fields: usize,
    pulses: Option<usize>,
}

#[derive(Serialize)]
struct CitySummary<'a> {
    name: &'a str,
    dataset_digest: &'a str,
    config: &'a CityConfig,
    mesh: MeshSummary,
    scenarios: BTreeMap<ScenarioFamily, Vec<PartSummary>>,
}

async fn list_cities(State(state): State<Arc<AppState>>, headers: HeaderMap) -> ApiResult {
    let cities: Vec<CitySummary> = state
        .cities
        .values()
        .map(|c| {
            let mut scenarios: BTreeMap<ScenarioFamily, Vec<PartSummary>> = BTreeMap::new();
            for (s, fields) in &c.fields {
                scenarios.entry(s.family).or_default().push(PartSummary {
                    part: s.part_label(),
                    resolutions: s.resolutions(),
                    fields: fields.fields.len(),
                    pulses: c.catalogs.get(s).map(|k| k.pulses.len()),
                });
            }
            CitySummary {
                name: c.name(),
                dataset_digest: c.digest(),
                config: &c.config,
                mesh: MeshSummary {
                    nx: c.mesh.nx(),
                    ny: c.mesh.ny(),
                    spacing_m: c.mesh.spacing(),
                    vertex_count: c.mesh.vertex_count(),
                },
                scenarios,
            }
        })
        .collect();
    tagged_json(&headers, &state.inventory_tag, &cities)
}

#[derive(Debug, Default, Deserialize)]
struct ScenarioQuery {
    scenario: Option<String>,
    part: Option<String>,
}

async fn city_pulses(
    State(state): State<Arc<AppState>>,
    Path(city): Path<String>,
    Query(q): Query<ScenarioQuery>,
    headers: HeaderMap,
) -> ApiResult {
    let city = state.city(&city)?;
    let scenario = scenario_of(q.scenario.as_deref(), q.part.as_deref())?;
    tagged_json(&headers, city.digest(), catalog(city, scenario)?)
}

#[derive(Debug, Default, Deserialize)]
struct FieldQuery {
    norm: Option<String>,
}

#[derive(Serialize)]
struct FieldBody<'a> {
    city: &'a str,
    scenario: ScenarioFamily,
    part: &'static str,
    resolution: Resolution,
    step: usize,
    nx: usize,
    ny: usize,
    spacing_m: f64,
    normalized: bool,
    resolution_max: f64,
    /// Row-major, `values[j * nx + i]`, rounded to 6 decimals.
    values: Vec<f64>,
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

async fn field(
    State(state): State<Arc<AppState>>,
    Path((city, scenario, part, resolution, step)): Path<(String, String, String, String, String)>,
    Query(q): Query<FieldQuery>,
    headers: HeaderMap,
) -> ApiResult {
    let city = state.city(&city)?;
    let scenario = scenario_of(Some(&scenario), Some(&part))?;
    let resolution: Resolution = resolution.parse()?;
    if !scenario.resolutions().contains(&resolution) {
        return Err(ApiError::not_found(format!("{scenario} has no {resolution} resolution")));
    }
    let last = resolution.step_count() - 1;
    let step: usize = step
        .parse()
        .ok()
        .filter(|&s| s <= last)
        .ok_or_else(|| ApiError::bad_request(format!("step `{step}` out of range for {resolution} (0..={last})")))?;
    let normalized = match q.norm.as_deref() {
        None | Some("true") | Some("1") => true,
        Some("false") | Some("0") => false,
        Some(other) => return Err(ApiError::bad_request(format!("norm must be true or false, got `{other}`"))),
    };
    let collection = city
        .fields
        .get(&scenario)
        .ok_or_else(|| ApiError::not_found(format!("city `{}` has no fields for {scenario}", city.name())))?;
    let f = collection.get(resolution, step).expect("complete collection");
    let values = if normalized { f.normalized_values() } else { f.values.clone() };
    let body = FieldBody {
        city: city.name(),
        scenario: scenario.family,
        part: scenario.part_label(),
        resolution,
        step,
        nx: collection.nx,
        ny: collection.ny,
        spacing_m: city.mesh.spacing(),
        normalized,
        resolution_max: f.resolution_max,
        values: values.into_iter().map(round6).collect(),
    };
    tagged_json(&headers, city.digest(), &body)
}

#[derive(Debug, Default, Deserialize)]
struct BeatsQuery {
    scenario: Option<String>,
    part: Option<String>,
    resolution: Option<String>,
}

#[derive(Serialize)]
struct BeatsBody<'a> {
    id: usize,
    rank: f64,
    beats: BTreeMap<Resolution, &'a ResolutionBeats>,
}

async fn pulse_beats(
    State(state): State<Arc<AppState>>,
    Path((city, id)): Path<(String, String)>,
    Query(q): Query<BeatsQuery>,
    headers: HeaderMap,
) -> ApiResult {
    let city = state.city(&city)?;
    let scenario = scenario_of(q.scenario.as_deref(), q.part.as_deref())?;
    let catalog = catalog(city, scenario)?;
    let pulse = id
        .parse()
        .ok()
        .and_then(|id| catalog.pulse(id))
        .ok_or_else(|| ApiError::not_found(format!("unknown pulse `{id}` in {scenario}")))?;
    let beats = match q.resolution.as_deref() {
        None => pulse.beats.iter().map(|(&r, b)| (r, b)).collect(),
        Some(name) => {
            let r: Resolution = name.parse()?;
            let b = pulse
                .beats
                .get(&r)
                .ok_or_else(|| ApiError::not_found(format!("{scenario} has no {r} resolution")))?;
            BTreeMap::from([(r, b)])
        }
    };
    tagged_json(&headers, city.digest(), &BeatsBody { id: pulse.id, rank: pulse.rank, beats })
}

#[derive(Debug, Deserialize)]
pub struct SimilarityRequest {
    pub source_city: String,
    pub target_city: String,
    pub scenario: Option<String>,
    pub part: Option<String>,
    /// Lon/lat ring or GeoJSON polygon.
    pub region: Value,
    #[serde(default)]
    pub mode: FunctionMode,
}

async fn similarity(
    State(state): State<Arc<AppState>>,
    body: Result<Json<SimilarityRequest>, JsonRejection>,
) -> ApiResult {
    let Json(req) = body.map_err(|e| ApiError::bad_request(e.body_text()))?;
    let scenario = scenario_of(req.scenario.as_deref(), req.part.as_deref())?;
    let source = catalog(state.city(&req.source_city)?, scenario)?;
    let target = catalog(state.city(&req.target_city)?, scenario)?;
    let ring = parse_region(&req.region)?;
    let groups = match similar_pulses(&ring, source, target, req.mode) {
        Err(Error::EmptySelection) => Vec::new(),
        other => other?,
    };
    Ok(Json(groups).into_response())
}
