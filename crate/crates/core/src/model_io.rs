//! `SIKM` model files.
//!
//! Layout, all little-endian:
//!
//! | field    | type      |
//! |----------|-----------|
//! | magic    | `b"SIKM"` |
//! | version  | u32 (= 1) |
//! | d        | u64       |
//! | psi      | u64       |
//! | t        | u64       |
//! | seed     | u64       |
//!
//! followed by `t` blocks of `psi × d` center coordinates then `psi` radii, as f64.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::ensemble::SphereEnsemble;
use crate::error::{Result, SikError};
use crate::partition::Partitioning;

pub const MODEL_MAGIC: &[u8; 4] = b"SIKM";
pub const MODEL_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 * 8;

pub fn write_model<W: Write>(ensemble: &SphereEnsemble, mut out: W) -> Result<()> {
    out.write_all(MODEL_MAGIC)?;
    out.write_all(&MODEL_VERSION.to_le_bytes())?;
    for v in [ensemble.d(), ensemble.psi(), ensemble.t()] {
        out.write_all(&(v as u64).to_le_bytes())?;
    }
    out.write_all(&ensemble.seed().to_le_bytes())?;
    for p in ensemble.partitionings() {
        for v in p.centers().iter().chain(p.radii()) {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn model_to_bytes(ensemble: &SphereEnsemble) -> Vec<u8> {
    let mut buf = Vec::with_capacity(model_len(ensemble));
    write_model(ensemble, &mut buf).expect("writing to a Vec cannot fail");
    buf
}

/// Size in bytes of the serialized model.
pub fn model_len(ensemble: &SphereEnsemble) -> usize {
    HEADER_LEN + ensemble.t() * ensemble.psi() * (ensemble.d() + 1) * 8
}

fn read_u64<R: Read>(input: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf).map_err(truncated)?;
    Ok(u64::from_le_bytes(buf))
}

fn truncated(err: std::io::Error) -> SikError {
    if err.kind() == std::io::ErrorKind::UnexpectedEof {
        SikError::format("model", "file is truncated")
    } else {
        SikError::Io(err)
    }
}

fn read_dim<R: Read>(input: &mut R, name: &str) -> Result<usize> {
    let v = read_u64(input)?;
    usize::try_from(v).map_err(|_| SikError::format("model", format!("{name} = {v} does not fit in memory")))
}

pub fn read_model<R: Read>(mut input: R) -> Result<SphereEnsemble> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic).map_err(truncated)?;
    if &magic != MODEL_MAGIC {
        return Err(SikError::format("model", "missing SIKM magic"));
    }
    let mut version = [0u8; 4];
    input.read_exact(&mut version).map_err(truncated)?;
    let version = u32::from_le_bytes(version);
    if version != MODEL_VERSION {
        return Err(SikError::format("model", format!("unsupported version {version}")));
    }
    let d = read_dim(&mut input, "d")?;
    let psi = read_dim(&mut input, "psi")?;
    let t = read_dim(&mut input, "t")?;
    let seed = read_u64(&mut input)?;
    if d == 0 || psi < 2 || t == 0 {
        return Err(SikError::format("model", format!("invalid header d = {d}, psi = {psi}, t = {t}")));
    }
    let block = psi
        .checked_mul(d + 1)
        .and_then(|v| v.checked_mul(8))
        .ok_or_else(|| SikError::format("model", "header dimensions overflow"))?;
    let mut bytes = vec![0u8; block];
    let mut partitionings = Vec::with_capacity(t.min(1 << 16));
    for _ in 0..t {
        input.read_exact(&mut bytes).map_err(truncated)?;
        let mut floats = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        let centers: Vec<f64> = floats.by_ref().take(psi * d).collect();
        let radii: Vec<f64> = floats.collect();
        if centers.iter().any(|v| !v.is_finite()) {
            return Err(SikError::format("model", "non-finite center coordinate"));
        }
        partitionings.push(Partitioning::from_parts(d, centers, radii)?);
    }
    let mut rest = [0u8; 1];
    if input.read(&mut rest)? != 0 {
        return Err(SikError::format("model", "trailing bytes after last partitioning"));
    }
    SphereEnsemble::from_partitionings(partitionings, seed)
}

pub fn save_model(ensemble: &SphereEnsemble, path: impl AsRef<Path>) -> Result<()> {
    write_model(ensemble, BufWriter::new(File::create(path)?))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SphereEnsemble> {
    read_model(BufReader::new(File::open(path)?))
}
