use std::fs;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use urban_pulse::geo::GeoPoint;
use urban_pulse::ingest::ScenarioFamily;
use urban_pulse::pulse::{FunctionMode, PulseCatalog, DEFAULT_THRESHOLD};
use urban_pulse::synthetic::{generate_points, planted_generators, square_city, to_csv};
use urban_pulse_service::api::{router, AppState};
use urban_pulse_service::dataset::{discover, Aggregate};
use urban_pulse_service::pipeline::{self, IngestRequest, PulsesRequest};
use urban_pulse_service::region::parse_region;
use urban_pulse_service::CityDataset;

#[derive(Parser)]
#[command(name = "urban-pulse", version, about = "Topological pulse extraction for urban point data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute density fields for every part of a scenario family.
    Ingest {
        /// City config JSON.
        #[arg(long)]
        city: PathBuf,
        /// CSV with lat, lon, timestamp and an optional weight column.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "default")]
        scenario: ScenarioFamily,
        /// Dataset directory.
        #[arg(long)]
        out: PathBuf,
        /// `mean` divides weighted sums by counts and keeps both.
        #[arg(long, default_value = "sum")]
        aggregate: Aggregate,
    },
    /// Extract pulse catalogs from ingested fields.
    Pulses {
        /// Dataset directory.
        #[arg(long)]
        fields: PathBuf,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        /// Catalog path; defaults to pulses/<family>/<part>.json in the dataset.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        scenario: Option<ScenarioFamily>,
        #[arg(long)]
        part: Option<String>,
        /// Write each field's persistence diagram as CSV into this directory.
        #[arg(long)]
        dump_persistence: Option<PathBuf>,
    },
    /// Match the pulses of catalog B to their closest pulses of catalog A.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// GeoJSON polygon selecting the pulses of A.
        #[arg(long)]
        region: Option<PathBuf>,
        /// Compare raw instead of normalized function beats.
        #[arg(long)]
        raw: bool,
    },
    /// Serve datasets over HTTP.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Dataset directories, or roots containing them.
        #[arg(env = "UP_DATA_DIR", value_delimiter = ',')]
        datasets: Vec<PathBuf>,
    },
    /// Write a synthetic city config and point CSV with five planted hot spots.
    Synth {
        #[arg(long, default_value = "synthetic")]
        name: String,
        #[arg(long, default_value_t = 40.75)]
        lat: f64,
        #[arg(long, default_value_t = -73.98)]
        lon: f64,
        /// Side of the square city in meters.
        #[arg(long, default_value_t = 10_000.0)]
        size: f64,
        #[arg(long, default_value_t = -300)]
        utc_offset: i32,
        #[arg(long, default_value_t = 100_000)]
        points: usize,
        /// Fraction of uniformly scattered points.
        #[arg(long, default_value_t = 0.05)]
        background: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        config_out: PathBuf,
        #[arg(long)]
        csv_out: PathBuf,
    },
}

fn ingest(req: IngestRequest) -> Result<()> {
    let s = pipeline::ingest(&req)?;
    let r = s.rejection;
    println!(
        "rows {} accepted {} malformed {} out_of_bounds {}",
        r.rows, r.accepted, r.malformed, r.out_of_bounds
    );
    println!("parsed in {:.2?}, fields in {:.2?}", s.parse_time, s.field_time);
    for (scenario, count) in &s.parts {
        println!("{scenario}: {count} fields");
    }
    println!("dataset {}", s.manifest.dataset_digest);
    Ok(())
}

fn pulses(req: PulsesRequest) -> Result<()> {
    for out in pipeline::pulses(&req)? {
        let c = &out.catalog;
        println!("{}: {} pulses in {:.2?} -> {}", out.scenario, c.pulses.len(), out.elapsed, out.path.display());
        for p in c.pulses.iter().take(10) {
            println!("  #{:<4} rank {:.6}  ({:.6}, {:.6})", p.id, p.rank, p.representative_geo.lat, p.representative_geo.lon);
        }
    }
    Ok(())
}

fn compare(a: PathBuf, b: PathBuf, region: Option<PathBuf>, raw: bool) -> Result<()> {
    let a = PulseCatalog::load(&a).with_context(|| format!("loading {}", a.display()))?;
    let b = PulseCatalog::load(&b).with_context(|| format!("loading {}", b.display()))?;
    let ring = match region {
        Some(path) => {
            let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            Some(parse_region(&serde_json::from_str(&text)?)?)
        }
        None => None,
    };
    let mode = if raw { FunctionMode::Raw } else { FunctionMode::Normalized };
    let groups = pipeline::compare(&a, &b, ring.as_deref(), mode)?;
    print!("{}", pipeline::similarity_csv(&groups));
    Ok(())
}

async fn serve(host: String, port: u16, roots: Vec<PathBuf>) -> Result<()> {
    if roots.is_empty() {
        bail!("no dataset directories given (pass them as arguments or set UP_DATA_DIR)");
    }
    let mut datasets = Vec::new();
    for root in &roots {
        for dir in discover(root)? {
            let d = CityDataset::load(&dir)?;
            log::info!("loaded {} from {} ({} parts)", d.name(), dir.display(), d.fields.len());
            datasets.push(d);
        }
    }
    if datasets.is_empty() {
        bail!("no datasets found");
    }
    let app = router(Arc::new(AppState::new(datasets)?));
    let addr: SocketAddr = format!("{host}:{port}").parse().context("invalid listen address")?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn synth(
    name: String,
    center: GeoPoint,
    size: f64,
    utc_offset: i32,
    points: usize,
    background: f64,
    seed: u64,
    config_out: PathBuf,
    csv_out: PathBuf,
) -> Result<()> {
    if !(0.0..=1.0).contains(&background) {
        bail!("background must be within [0, 1]");
    }
    let config = square_city(&name, center, size, utc_offset);
    let mesh = config.mesh()?;
    let data = generate_points(&mesh, &planted_generators(size), points, background, utc_offset, seed);
    fs::write(&config_out, serde_json::to_string_pretty(&config)? + "\n")?;
    fs::write(&csv_out, to_csv(&data, &mesh))?;
    println!("{} points on a {}x{} mesh", data.len(), mesh.nx(), mesh.ny());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { city, input, scenario, out, aggregate } => {
            ingest(IngestRequest { config: city, input, family: scenario, out, aggregate })
        }
        Command::Pulses { fields, threshold, out, scenario, part, dump_persistence } => pulses(PulsesRequest {
            dir: fields,
            threshold,
            family: scenario,
            part,
            out,
            dump_persistence,
        }),
        Command::Compare { a, b, region, raw } => compare(a, b, region, raw),
        Command::Serve { port, host, datasets } => {
            tokio::runtime::Runtime::new()?.block_on(serve(host, port, datasets))
        }
        Command::Synth { name, lat, lon, size, utc_offset, points, background, seed, config_out, csv_out } => synth(
            name,
            GeoPoint::new(lat, lon)?,
            size,
            utc_offset,
            points,
            background,
            seed,
            config_out,
            csv_out,
        ),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
