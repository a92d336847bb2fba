//! Topological pulse extraction for spatio-temporal urban point data.
//!
//! Data points are bucketed by temporal resolution (all, month, day of week,
//! hour of day), turned into Gaussian density fields over a triangulated city
//! grid, and swept for 0-dimensional super-level-set persistence. Maxima that
//! stand out in at least one time step become pulse locations, each described
//! by its beats over time. Pulses can then be ranked and compared across
//! scenarios and cities.

pub mod config;
pub mod error;
pub mod geo;
pub mod ingest;
pub mod pulse;
pub mod synthetic;
pub mod topology;

pub use config::CityConfig;
pub use error::{Error, Result};
