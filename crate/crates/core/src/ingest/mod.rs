//! Point ingestion: CSV parsing, temporal bucketing into resolutions and
//! scenario parts, and Gaussian density fields over the city mesh.

mod density;
mod points;
mod store;
mod time;

use std::{fmt, str::FromStr};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use density::{compute_fields, mean_fields, normalize, GridIndex};
pub use points::{parse_points, parse_timestamp, DataPoint, RejectionReport};
pub use store::{read_fields, read_fields_for_mesh, write_fields, FieldFileHeader, UPF_MAGIC, UPF_VERSION};
pub use time::{bucket, local_time, scenario_member};

/// Temporal grouping of data points. The declaration order is the canonical
/// ordering used by feature vectors and files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Resolution {
    All,
    Month,
    Day,
    Hour,
}

impl Resolution {
    pub const ALL: [Resolution; 4] = [Resolution::All, Resolution::Month, Resolution::Day, Resolution::Hour];

    pub const fn step_count(self) -> usize {
        match self {
            Resolution::All => 1,
            Resolution::Month => 12,
            Resolution::Day => 7,
            Resolution::Hour => 24,
        }
    }

    pub const fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    pub const fn name(self) -> &'static str {
        match self {
            Resolution::All => "all",
            Resolution::Month => "month",
            Resolution::Day => "day",
            Resolution::Hour => "hour",
        }
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Resolution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|r| r.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unknown { kind: "resolution", name: s.to_string() })
    }
}

/// Partition of time analyzed as separate field collections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioFamily {
    Default,
    PartsOfWeek,
    Seasons,
    PartsOfDay,
}

impl ScenarioFamily {
    pub const ALL: [ScenarioFamily; 4] = [
        ScenarioFamily::Default,
        ScenarioFamily::PartsOfWeek,
        ScenarioFamily::Seasons,
        ScenarioFamily::PartsOfDay,
    ];

    /// Resolutions analyzed for this family. A family that partitions one
    /// resolution drops it.
    pub const fn resolutions(self) -> &'static [Resolution] {
        use Resolution::*;
        match self {
            ScenarioFamily::Default => &[All, Month, Day, Hour],
            ScenarioFamily::PartsOfWeek => &[All, Month, Hour],
            ScenarioFamily::Seasons => &[All, Day, Hour],
            ScenarioFamily::PartsOfDay => &[All, Month, Day],
        }
    }

    pub const fn parts(self) -> &'static [&'static str] {
        match self {
            ScenarioFamily::Default => &["all"],
            ScenarioFamily::PartsOfWeek => &["weekday", "weekend"],
            ScenarioFamily::Seasons => &["spring", "summer", "fall", "winter"],
            ScenarioFamily::PartsOfDay => &["morning", "afternoon", "evening", "night"],
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            ScenarioFamily::Default => "default",
            ScenarioFamily::PartsOfWeek => "parts-of-week",
            ScenarioFamily::Seasons => "seasons",
            ScenarioFamily::PartsOfDay => "parts-of-day",
        }
    }

    pub const fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn scenarios(self) -> impl Iterator<Item = Scenario> {
        (0..self.parts().len()).map(move |part| Scenario { family: self, part: part as u8 })
    }

    /// Total number of fields per part.
    pub fn field_count(self) -> usize {
        self.resolutions().iter().map(|r| r.step_count()).sum()
    }
}

impl fmt::Display for ScenarioFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|f| f.name() == norm || f.name().replace('-', "") == norm)
            .ok_or_else(|| Error::Unknown { kind: "scenario", name: s.to_string() })
    }
}

/// One part of a scenario family, e.g. `seasons/winter`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scenario {
    pub family: ScenarioFamily,
    pub part: u8,
}

impl Scenario {
    pub const DEFAULT: Scenario = Scenario { family: ScenarioFamily::Default, part: 0 };

    pub fn new(family: ScenarioFamily, part: &str) -> Result<Self> {
        family
            .parts()
            .iter()
            .position(|p| p.eq_ignore_ascii_case(part))
            .map(|idx| Scenario { family, part: idx as u8 })
            .ok_or_else(|| Error::Unknown { kind: "scenario part", name: part.to_string() })
    }

    pub fn part_label(&self) -> &'static str {
        self.family.parts()[self.part as usize]
    }

    pub fn resolutions(&self) -> &'static [Resolution] {
        self.family.resolutions()
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.family.name(), self.part_label())
    }
}

/// Kernel parameters of the density function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityParams {
    epsilon: f64,
    radius: f64,
}

impl DensityParams {
    pub fn new(epsilon: f64, radius: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0 && radius.is_finite() && radius >= epsilon) {
            return Err(Error::Config(format!(
                "density params need radius >= epsilon > 0, got epsilon={epsilon}, radius={radius}"
            )));
        }
        Ok(Self { epsilon, radius })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Truncated Gaussian weight at squared distance `d2`.
    #[inline]
    pub fn kernel(&self, d2: f64) -> f64 {
        if d2 <= self.radius * self.radius {
            (-d2 / (self.epsilon * self.epsilon)).exp()
        } else {
            0.0
        }
    }
}

/// Density over the mesh for one (resolution, step).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub resolution: Resolution,
    pub step: u16,
    /// Raw per-vertex values.
    pub values: Vec<f64>,
    /// Maximum raw value over all steps of this resolution.
    pub resolution_max: f64,
}

impl ScalarField {
    #[inline]
    pub fn normalized(&self, v: usize) -> f64 {
        if self.resolution_max > 0.0 {
            self.values[v] / self.resolution_max
        } else {
            0.0
        }
    }

    pub fn normalized_values(&self) -> Vec<f64> {
        (0..self.values.len()).map(|v| self.normalized(v)).collect()
    }

    pub fn raw_max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Every field of one scenario part, in canonical (resolution, step) order.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldCollection {
    pub scenario: Scenario,
    pub nx: usize,
    pub ny: usize,
    pub fields: Vec<ScalarField>,
}

impl FieldCollection {
    /// All-zero collection with one field per step per scenario resolution.
    pub fn zeros(scenario: Scenario, nx: usize, ny: usize) -> Self {
        let fields = scenario
            .resolutions()
            .iter()
            .flat_map(|&resolution| {
                (0..resolution.step_count()).map(move |step| ScalarField {
                    resolution,
                    step: step as u16,
                    values: vec![0.0; nx * ny],
                    resolution_max: 0.0,
                })
            })
            .collect();
        Self { scenario, nx, ny, fields }
    }

    pub fn resolutions(&self) -> &'static [Resolution] {
        self.scenario.resolutions()
    }

    fn offset(&self, resolution: Resolution) -> Option<usize> {
        let mut offset = 0;
        for &r in self.resolutions() {
            if r == resolution {
                return Some(offset);
            }
            offset += r.step_count();
        }
        None
    }

    pub fn get(&self, resolution: Resolution, step: usize) -> Option<&ScalarField> {
        if step >= resolution.step_count() {
            return None;
        }
        self.offset(resolution).and_then(|o| self.fields.get(o + step))
    }

    /// Fields of one resolution, ordered by step.
    pub fn resolution_fields(&self, resolution: Resolution) -> &[ScalarField] {
        match self.offset(resolution) {
            Some(o) => &self.fields[o..o + resolution.step_count()],
            None => &[],
        }
    }

    pub(crate) fn resolution_fields_mut(&mut self, resolution: Resolution) -> &mut [ScalarField] {
        match self.offset(resolution) {
            Some(o) => &mut self.fields[o..o + resolution.step_count()],
            None => &mut [],
        }
    }

    pub fn is_complete(&self) -> bool {
        self.fields.len() == self.scenario.family.field_count()
            && self.resolutions().iter().all(|&r| {
                self.resolution_fields(r)
                    .iter()
                    .enumerate()
                    .all(|(s, f)| f.resolution == r && f.step as usize == s && f.values.len() == self.nx * self.ny)
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_counts_per_family() {
        assert_eq!(ScenarioFamily::Default.field_count(), 44);
        assert_eq!(ScenarioFamily::Seasons.field_count(), 32);
        assert_eq!(ScenarioFamily::PartsOfWeek.field_count(), 37);
        assert_eq!(ScenarioFamily::PartsOfDay.field_count(), 20);
    }

    #[test]
    fn parse_names() {
        assert_eq!("Hour".parse::<Resolution>().unwrap(), Resolution::Hour);
        assert_eq!("seasons".parse::<ScenarioFamily>().unwrap(), ScenarioFamily::Seasons);
        assert_eq!("parts_of_day".parse::<ScenarioFamily>().unwrap(), ScenarioFamily::PartsOfDay);
        assert!("week".parse::<Resolution>().is_err());
        let s = Scenario::new(ScenarioFamily::Seasons, "Winter").unwrap();
        assert_eq!(s.to_string(), "seasons/winter");
    }

    #[test]
    fn zeros_is_complete() {
        let c = FieldCollection::zeros(Scenario::DEFAULT, 3, 2);
        assert!(c.is_complete());
        assert_eq!(c.get(Resolution::Hour, 23).unwrap().step, 23);
        assert!(c.get(Resolution::Hour, 24).is_none());
        let winter = FieldCollection::zeros(Scenario::new(ScenarioFamily::Seasons, "winter").unwrap(), 3, 2);
        assert!(winter.get(Resolution::Month, 0).is_none());
        assert_eq!(winter.fields.len(), 32);
    }

    #[test]
    fn density_params_validation() {
        assert!(DensityParams::new(100.0, 50.0).is_err());
        assert!(DensityParams::new(0.0, 50.0).is_err());
        let p = DensityParams::new(100.0, 500.0).unwrap();
        assert_eq!(p.kernel(0.0), 1.0);
        assert_eq!(p.kernel(501.0 * 501.0), 0.0);
    }
}
