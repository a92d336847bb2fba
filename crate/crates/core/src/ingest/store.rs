//! `UPF1` binary field files.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic        4 bytes  "UPF1"
//! version      u32
//! config       32 bytes SHA-256 of the city config
//! nx, ny       u32, u32
//! spacing      f64
//! scenario     u8 family, u8 part
//! fields       u32 count
//! per field:   u8 resolution, u16 step, f64 resolution_max, nx*ny f64 raw values
//! ```

use std::{
    fs::File,
    io::{self, BufReader, BufWriter, Read, Write},
    path::Path,
};

use super::{FieldCollection, Resolution, ScalarField, Scenario, ScenarioFamily};
use crate::error::{Error, Result};
use crate::geo::Mesh;

pub const UPF_MAGIC: &[u8; 4] = b"UPF1";
pub const UPF_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldFileHeader {
    pub config_digest: [u8; 32],
    pub nx: usize,
    pub ny: usize,
    pub spacing: f64,
    pub scenario: Scenario,
}

pub fn write_fields(
    collection: &FieldCollection,
    spacing: f64,
    config_digest: &[u8; 32],
    path: impl AsRef<Path>,
) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    encode(collection, spacing, config_digest, &mut out)?;
    out.flush()?;
    Ok(())
}

fn encode<W: Write>(c: &FieldCollection, spacing: f64, digest: &[u8; 32], out: &mut W) -> io::Result<()> {
    out.write_all(UPF_MAGIC)?;
    out.write_all(&UPF_VERSION.to_le_bytes())?;
    out.write_all(digest)?;
    out.write_all(&(c.nx as u32).to_le_bytes())?;
    out.write_all(&(c.ny as u32).to_le_bytes())?;
    out.write_all(&spacing.to_le_bytes())?;
    out.write_all(&[c.scenario.family.code(), c.scenario.part])?;
    out.write_all(&(c.fields.len() as u32).to_le_bytes())?;
    for f in &c.fields {
        out.write_all(&[f.resolution.code()])?;
        out.write_all(&f.step.to_le_bytes())?;
        out.write_all(&f.resolution_max.to_le_bytes())?;
        for v in &f.values {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

struct Decoder<R> {
    inner: R,
}

impl<R: Read> Decoder<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner.read_exact(&mut buf).map_err(|e| match e.kind() {
            io::ErrorKind::UnexpectedEof => Error::FieldFormat("truncated file".into()),
            _ => Error::Io(e),
        })?;
        Ok(buf)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes::<1>()?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.bytes()?))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
}

fn decode<R: Read>(reader: R) -> Result<(FieldFileHeader, FieldCollection)> {
    let mut d = Decoder { inner: reader };
    if &d.bytes::<4>()? != UPF_MAGIC {
        return Err(Error::FieldFormat("bad magic".into()));
    }
    let version = d.u32()?;
    if version != UPF_VERSION {
        return Err(Error::FieldFormat(format!("unsupported version {version}")));
    }
    let config_digest = d.bytes::<32>()?;
    let nx = d.u32()? as usize;
    let ny = d.u32()? as usize;
    let spacing = d.f64()?;
    let family = ScenarioFamily::from_code(d.u8()?).ok_or_else(|| Error::FieldFormat("bad scenario family".into()))?;
    let part = d.u8()?;
    if part as usize >= family.parts().len() {
        return Err(Error::FieldFormat(format!("bad scenario part {part}")));
    }
    let scenario = Scenario { family, part };
    let count = d.u32()? as usize;
    if count != family.field_count() {
        return Err(Error::FieldFormat(format!(
            "{scenario} needs {} fields, file declares {count}",
            family.field_count()
        )));
    }

    let mut fields = Vec::with_capacity(count);
    for _ in 0..count {
        let resolution = Resolution::from_code(d.u8()?).ok_or_else(|| Error::FieldFormat("bad resolution".into()))?;
        let step = d.u16()?;
        let resolution_max = d.f64()?;
        let mut values = Vec::with_capacity(nx * ny);
        for _ in 0..nx * ny {
            values.push(d.f64()?);
        }
        fields.push(ScalarField { resolution, step, values, resolution_max });
    }
    let mut rest = [0u8; 1];
    if d.inner.read(&mut rest)? != 0 {
        return Err(Error::FieldFormat("trailing bytes after last field".into()));
    }

    let collection = FieldCollection { scenario, nx, ny, fields };
    if !collection.is_complete() {
        return Err(Error::FieldFormat("fields out of canonical order".into()));
    }
    Ok((FieldFileHeader { config_digest, nx, ny, spacing, scenario }, collection))
}

pub fn read_fields(path: impl AsRef<Path>) -> Result<(FieldFileHeader, FieldCollection)> {
    decode(BufReader::new(File::open(path)?))
}

/// Reads a field file and checks it was computed on `mesh`.
pub fn read_fields_for_mesh(path: impl AsRef<Path>, mesh: &Mesh) -> Result<(FieldFileHeader, FieldCollection)> {
    let (header, collection) = read_fields(path)?;
    if header.nx != mesh.nx() || header.ny != mesh.ny() {
        return Err(Error::DimensionMismatch {
            file_nx: header.nx,
            file_ny: header.ny,
            mesh_nx: mesh.nx(),
            mesh_ny: mesh.ny(),
        });
    }
    Ok((header, collection))
}
