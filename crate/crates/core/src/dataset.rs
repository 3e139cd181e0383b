//! CSV dataset files and their JSON metadata sidecar.
//!
//! One row per sample:
//!
//! ```text
//! roll_deg,pitch_deg,yaw_deg,t_s,gt_x,gt_y,gt_z,noisy_x,noisy_y,noisy_z
//! ```
//!
//! Floats are written in shortest round-trip form, so writing and reading a
//! dataset reproduces every value bit for bit. Consecutive rows belong to the
//! same recording until the orientation changes or `t_s` stops increasing.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{EulerAngles, Recording, SimConfig};
use crate::Triad;

pub const CSV_HEADER: [&str; 10] = [
    "roll_deg", "pitch_deg", "yaw_deg", "t_s", "gt_x", "gt_y", "gt_z", "noisy_x", "noisy_y", "noisy_z",
];

/// Sidecar describing how a dataset file was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMetadata {
    pub sim: SimConfig,
    pub recordings: usize,
    pub samples: usize,
}

pub fn write_csv(path: &Path, recordings: &[Recording]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_records(&mut out, recordings).map_err(|e| Error::io(path, e))
}

fn write_records<W: Write>(out: &mut W, recordings: &[Recording]) -> std::io::Result<()> {
    writeln!(out, "{}", CSV_HEADER.join(","))?;
    for rec in recordings {
        let a = rec.angles;
        for (i, (gt, noisy)) in rec.gt.iter().zip(&rec.noisy).enumerate() {
            let t = i as f64 / rec.sample_rate;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                a.roll_deg, a.pitch_deg, a.yaw_deg, t, gt[0], gt[1], gt[2], noisy[0], noisy[1], noisy[2]
            )?;
        }
    }
    out.flush()
}

pub(crate) fn parse_field(path: &Path, line: u64, name: &str, raw: &str) -> Result<f64> {
    raw.trim().parse::<f64>().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("column {name}: cannot parse {raw:?} as a number"),
    })
}

pub(crate) fn column_index(path: &Path, headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers.iter().position(|h| h.trim() == name).ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        line: 1,
        message: format!("missing column {name:?}"),
    })
}

pub(crate) fn open_csv(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().has_headers(true).from_reader(file))
}

pub(crate) fn csv_error(path: &Path, err: csv::Error) -> Error {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    match err.into_kind() {
        csv::ErrorKind::Io(e) => Error::io(path, e),
        other => Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("{other:?}"),
        },
    }
}

/// Reads a dataset file written by [`write_csv`].
pub fn read_csv(path: &Path, sample_rate: f64) -> Result<Vec<Recording>> {
    let mut reader = open_csv(path)?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let cols: Vec<usize> = CSV_HEADER
        .iter()
        .map(|name| column_index(path, &headers, name))
        .collect::<Result<_>>()?;

    let mut recordings = Vec::new();
    let mut current: Option<(EulerAngles, f64, Vec<Triad>, Vec<Triad>)> = None;
    for row in reader.records() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let mut v = [0.0; 10];
        for (slot, (&c, name)) in v.iter_mut().zip(cols.iter().zip(CSV_HEADER)) {
            let raw = row.get(c).ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("missing value for {name}"),
            })?;
            *slot = parse_field(path, line, name, raw)?;
        }
        let angles = EulerAngles::new(v[0], v[1], v[2]);
        let t = v[3];
        let gt = [v[4], v[5], v[6]];
        let noisy = [v[7], v[8], v[9]];

        let starts_new = match &current {
            Some((a, last_t, _, _)) => *a != angles || t <= *last_t,
            None => true,
        };
        if starts_new {
            if let Some((a, _, g, n)) = current.take() {
                recordings.push(Recording::new(a, g, n, sample_rate)?);
            }
            current = Some((angles, t, vec![gt], vec![noisy]));
        } else if let Some((_, last_t, g, n)) = current.as_mut() {
            *last_t = t;
            g.push(gt);
            n.push(noisy);
        }
    }
    if let Some((a, _, g, n)) = current {
        recordings.push(Recording::new(a, g, n, sample_rate)?);
    }
    Ok(recordings)
}

pub fn write_metadata(path: &Path, meta: &DatasetMetadata) -> Result<()> {
    let json = serde_json::to_string_pretty(meta).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(path, json).map_err(|e| Error::io(path, e))
}

pub fn read_metadata(path: &Path) -> Result<DatasetMetadata> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line() as u64,
        message: e.to_string(),
    })
}
