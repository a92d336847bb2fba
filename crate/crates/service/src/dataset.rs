use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use urban_pulse::geo::Mesh;
use urban_pulse::ingest::{read_fields_for_mesh, FieldCollection, RejectionReport, Scenario, ScenarioFamily};
use urban_pulse::pulse::PulseCatalog;
use urban_pulse::CityConfig;

pub const CONFIG_FILE: &str = "city.json";
pub const MANIFEST_FILE: &str = "manifest.json";

/// How weighted inputs are turned into fields.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregate {
    /// Kernel-weighted sum of weights.
    #[default]
    Sum,
    /// Kernel-weighted sum divided by the kernel-weighted count.
    Mean,
}

impl fmt::Display for Aggregate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregate::Sum => "sum",
            Aggregate::Mean => "mean",
        })
    }
}

impl FromStr for Aggregate {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sum" => Ok(Aggregate::Sum),
            "mean" => Ok(Aggregate::Mean),
            _ => bail!("unknown aggregate `{s}` (expected sum or mean)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub city: String,
    /// Hex SHA-256 of the city config.
    pub config_digest: String,
    /// Hex SHA-256 over the config digest, the aggregate mode and the input bytes.
    pub dataset_digest: String,
    pub aggregate: Aggregate,
    pub rejection: RejectionReport,
    /// Ingested parts per scenario family.
    pub scenarios: BTreeMap<ScenarioFamily, Vec<String>>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(dir.join(MANIFEST_FILE), text)?;
        Ok(())
    }

    pub fn parts(&self) -> Result<Vec<Scenario>> {
        let mut out = Vec::new();
        for (&family, parts) in &self.scenarios {
            for part in parts {
                out.push(Scenario::new(family, part)?);
            }
        }
        Ok(out)
    }
}

fn scenario_dir(dir: &Path, kind: &str, scenario: Scenario) -> PathBuf {
    dir.join(kind).join(scenario.family.name())
}

/// Field file of one scenario part.
pub fn field_path(dir: &Path, scenario: Scenario) -> PathBuf {
    scenario_dir(dir, "fields", scenario).join(format!("{}.upf", scenario.part_label()))
}

/// Sum or count companion file written with `--aggregate mean`.
pub fn component_path(dir: &Path, scenario: Scenario, component: &str) -> PathBuf {
    scenario_dir(dir, "fields", scenario).join(format!("{}.{component}.upf", scenario.part_label()))
}

pub fn catalog_path(dir: &Path, scenario: Scenario) -> PathBuf {
    scenario_dir(dir, "pulses", scenario).join(format!("{}.json", scenario.part_label()))
}

pub fn load_config(dir: &Path) -> Result<CityConfig> {
    let path = dir.join(CONFIG_FILE);
    CityConfig::load(&path).with_context(|| format!("loading {}", path.display()))
}

/// Reads the field file of `scenario` and checks it belongs to `config`.
pub fn load_fields(dir: &Path, config: &CityConfig, mesh: &Mesh, scenario: Scenario) -> Result<FieldCollection> {
    let path = field_path(dir, scenario);
    let (header, fields) =
        read_fields_for_mesh(&path, mesh).with_context(|| format!("reading {}", path.display()))?;
    if header.config_digest != config.digest() {
        bail!("{} was computed for a different city config", path.display());
    }
    if header.scenario != scenario {
        bail!("{} holds {}, expected {scenario}", path.display(), header.scenario);
    }
    Ok(fields)
}

/// Everything served for one city, loaded once and never mutated.
#[derive(Debug)]
pub struct CityDataset {
    pub dir: PathBuf,
    pub config: CityConfig,
    pub mesh: Mesh,
    pub manifest: Manifest,
    pub fields: BTreeMap<Scenario, FieldCollection>,
    pub catalogs: BTreeMap<Scenario, PulseCatalog>,
}

impl CityDataset {
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        let config = load_config(&dir)?;
        let mesh = config.mesh()?;
        let manifest = Manifest::load(&dir)?;
        if manifest.config_digest != hex::encode(config.digest()) {
            bail!("{}: manifest and city config disagree", dir.display());
        }
        let mut fields = BTreeMap::new();
        let mut catalogs = BTreeMap::new();
        for scenario in manifest.parts()? {
            fields.insert(scenario, load_fields(&dir, &config, &mesh, scenario)?);
            let path = catalog_path(&dir, scenario);
            if !path.exists() {
                log::warn!("{}: no pulse catalog for {scenario}", dir.display());
                continue;
            }
            let catalog = PulseCatalog::load(&path).with_context(|| format!("loading {}", path.display()))?;
            if catalog.dataset_digest != manifest.dataset_digest {
                bail!("{} is stale: dataset digest differs from the manifest", path.display());
            }
            catalogs.insert(scenario, catalog);
        }
        Ok(Self { dir, config, mesh, manifest, fields, catalogs })
    }

    pub fn name(&self) -> &str {
        &self.config.name
    }

    pub fn digest(&self) -> &str {
        &self.manifest.dataset_digest
    }
}

/// Dataset directories under `root`: `root` itself if it holds a manifest,
/// otherwise its immediate subdirectories that do, sorted by path.
pub fn discover(root: &Path) -> Result<Vec<PathBuf>> {
    if root.join(MANIFEST_FILE).is_file() {
        return Ok(vec![root.to_path_buf()]);
    }
    let mut dirs = Vec::new();
    for entry in fs::read_dir(root).with_context(|| format!("listing {}", root.display()))? {
        let path = entry?.path();
        if path.join(MANIFEST_FILE).is_file() {
            dirs.push(path);
        }
    }
    dirs.sort();
    Ok(dirs)
}
