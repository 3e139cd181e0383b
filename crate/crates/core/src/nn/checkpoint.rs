//! Versioned binary checkpoints for trained recurrent denoisers.
//!
//! Layout (little endian): magic, `u32` version, `u8` model tag, `u32` hidden
//! size, six `f64` scaler values (mean then std), `u64` parameter count,
//! parameters.

use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::model::{ModelKind, RecurrentModel};
use super::train::{RecurrentDenoiser, Standardizer};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"ADRNNCKP";
const VERSION: u32 = 1;

pub fn save(path: &Path, denoiser: &RecurrentDenoiser) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write(&mut out, denoiser).map_err(|e| Error::io(path, e))
}

fn write<W: Write>(out: &mut W, d: &RecurrentDenoiser) -> std::io::Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&[d.model.kind.tag()])?;
    out.write_all(&(d.model.hidden as u32).to_le_bytes())?;
    for v in d.scaler.mean.iter().chain(&d.scaler.std) {
        out.write_all(&v.to_le_bytes())?;
    }
    out.write_all(&(d.model.params.len() as u64).to_le_bytes())?;
    for v in &d.model.params {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()
}

pub fn load(path: &Path) -> Result<RecurrentDenoiser> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read(&mut BufReader::new(file))
        .map_err(|e| Error::InvalidData(format!("{}: {e}", path.display())))
}

fn read<R: Read>(input: &mut R) -> std::result::Result<RecurrentDenoiser, String> {
    let mut bytes = |n: usize| -> std::result::Result<Vec<u8>, String> {
        let mut buf = vec![0u8; n];
        input.read_exact(&mut buf).map_err(|e| format!("truncated checkpoint: {e}"))?;
        Ok(buf)
    };
    if bytes(8)? != MAGIC {
        return Err("not a model checkpoint".into());
    }
    let version = u32::from_le_bytes(bytes(4)?.try_into().unwrap());
    if version != VERSION {
        return Err(format!("unsupported checkpoint version {version}"));
    }
    let tag = bytes(1)?[0];
    let kind = ModelKind::from_tag(tag).ok_or_else(|| format!("unknown model tag {tag}"))?;
    let hidden = u32::from_le_bytes(bytes(4)?.try_into().unwrap()) as usize;
    let f64s = |raw: Vec<u8>| -> Vec<f64> {
        raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect()
    };
    let s = f64s(bytes(48)?);
    let scaler = Standardizer {
        mean: [s[0], s[1], s[2]],
        std: [s[3], s[4], s[5]],
    };
    let n = u64::from_le_bytes(bytes(8)?.try_into().unwrap()) as usize;
    if n != RecurrentModel::param_len(kind, hidden) {
        return Err(format!("parameter count {n} does not match {kind:?} with {hidden} units"));
    }
    let params = f64s(bytes(n * 8)?);
    let model = RecurrentModel::from_params(kind, hidden, params).map_err(|e| e.to_string())?;
    Ok(RecurrentDenoiser::new(model, scaler))
}
