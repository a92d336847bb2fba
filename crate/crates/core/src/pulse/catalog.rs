//! Pulse catalog JSON files.

use std::{fs, path::Path};

use serde::{Deserialize, Serialize};

use super::{extract_pulses, Pulse};
use crate::error::{Error, Result};
use crate::geo::Mesh;
use crate::ingest::{FieldCollection, Resolution, Scenario, ScenarioFamily};

/// Every pulse of one city and scenario part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseCatalog {
    pub city: String,
    pub scenario: ScenarioFamily,
    pub part: String,
    pub threshold: f64,
    pub epsilon_m: f64,
    pub dataset_digest: String,
    pub resolutions: Vec<Resolution>,
    pub pulses: Vec<Pulse>,
}

pub fn build_catalog(
    city: &str,
    dataset_digest: &str,
    collection: &FieldCollection,
    mesh: &Mesh,
    threshold: f64,
    epsilon: f64,
) -> PulseCatalog {
    PulseCatalog {
        city: city.to_string(),
        scenario: collection.scenario.family,
        part: collection.scenario.part_label().to_string(),
        threshold,
        epsilon_m: epsilon,
        dataset_digest: dataset_digest.to_string(),
        resolutions: collection.resolutions().to_vec(),
        pulses: extract_pulses(collection, mesh, threshold, epsilon),
    }
}

impl PulseCatalog {
    pub fn scenario(&self) -> Result<Scenario> {
        Scenario::new(self.scenario, &self.part)
    }

    pub fn pulse(&self, id: usize) -> Option<&Pulse> {
        self.pulses.iter().find(|p| p.id == id)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let catalog: PulseCatalog = serde_json::from_str(text)?;
        if catalog.resolutions.is_empty() {
            return Err(Error::Config("catalog lists no resolutions".into()));
        }
        Ok(catalog)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}
