use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid coordinate: {0}")]
    InvalidCoordinate(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("vertex {vertex} out of range (mesh has {count} vertices)")]
    InvalidVertex { vertex: usize, count: usize },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("input is missing required column `{0}`")]
    MissingColumn(&'static str),

    #[error("field file: {0}")]
    FieldFormat(String),

    #[error("field file mesh is {file_nx}x{file_ny}, loaded mesh is {mesh_nx}x{mesh_ny}")]
    DimensionMismatch {
        file_nx: usize,
        file_ny: usize,
        mesh_nx: usize,
        mesh_ny: usize,
    },

    #[error("pulses share no temporal resolution")]
    NoCommonResolution,

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("region selects no source pulse")]
    EmptySelection,

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] io::Error),
}
