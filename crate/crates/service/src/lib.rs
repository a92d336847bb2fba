//! Batch pipeline and read-only HTTP service over urban pulse datasets.
//!
//! A dataset is one directory per city:
//!
//! ```text
//! city.json                      city configuration
//! manifest.json                  digests, rejection report, ingested parts
//! fields/<family>/<part>.upf     density fields (UPF1)
//! pulses/<family>/<part>.json    pulse catalogs
//! ```

pub mod api;
pub mod dataset;
pub mod pipeline;
pub mod region;

pub use dataset::{CityDataset, Manifest};
