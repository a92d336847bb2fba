//! City configuration file.

use std::{fs, path::Path};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geo::{build_mesh, Bounds, Mesh};
use crate::ingest::DensityParams;

/// Default vertex spacing of the city mesh, in meters.
pub const DEFAULT_SPACING_M: f64 = 50.0;
/// Default influence scale of a data point, in meters (about one city block).
pub const DEFAULT_EPSILON_M: f64 = 100.0;
/// Kernel truncation radius as a multiple of epsilon.
pub const RADIUS_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CityConfig {
    pub name: String,
    pub bounds: Bounds,
    #[serde(default = "default_spacing")]
    pub spacing_m: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon_m: f64,
    #[serde(default)]
    pub utc_offset_minutes: i32,
}

fn default_spacing() -> f64 {
    DEFAULT_SPACING_M
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON_M
}

impl CityConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: CityConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::Config("city name is empty".into()));
        }
        if !(self.epsilon_m.is_finite() && self.epsilon_m > 0.0) {
            return Err(Error::Config(format!("epsilon_m must be positive, got {}", self.epsilon_m)));
        }
        if !(-24 * 60..=24 * 60).contains(&self.utc_offset_minutes) {
            return Err(Error::Config(format!(
                "utc_offset_minutes out of range: {}",
                self.utc_offset_minutes
            )));
        }
        Ok(())
    }

    pub fn mesh(&self) -> Result<Mesh> {
        build_mesh(self.bounds, self.spacing_m)
    }

    pub fn density_params(&self) -> Result<DensityParams> {
        DensityParams::new(self.epsilon_m, RADIUS_FACTOR * self.epsilon_m)
    }

    /// SHA-256 over the canonical JSON encoding of the config.
    pub fn digest(&self) -> [u8; 32] {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&canonical).into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const NYC: &str = r#"{
        "name": "nyc",
        "bounds": {"south": 40.70, "west": -74.02, "north": 40.80, "east": -73.93},
        "spacing_m": 50,
        "epsilon_m": 100,
        "utc_offset_minutes": -300
    }"#;

    #[test]
    fn parses_and_derives_radius() {
        let c = CityConfig::from_json(NYC).unwrap();
        assert_eq!(c.utc_offset_minutes, -300);
        let p = c.density_params().unwrap();
        assert_eq!(p.radius(), 500.0);
        assert_eq!(p.epsilon(), 100.0);
        assert!(c.mesh().unwrap().vertex_count() > 0);
    }

    #[test]
    fn digest_changes_with_content() {
        let a = CityConfig::from_json(NYC).unwrap();
        let mut b = a.clone();
        b.epsilon_m = 80.0;
        assert_eq!(a.digest(), a.clone().digest());
        assert_ne!(a.digest(), b.digest());
    }

    #[test]
    fn rejects_bad_epsilon() {
        let text = NYC.replace("\"epsilon_m\": 100", "\"epsilon_m\": -1");
        assert!(CityConfig::from_json(&text).is_err());
    }
}
