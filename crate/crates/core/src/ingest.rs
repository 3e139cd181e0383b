//! Loading externally recorded stationary datasets.
//!
//! A [`FieldManifest`] lists one CSV file per orientation together with the
//! reference roll/pitch and sample rate. Each file holds paired samples from
//! the unit under test and the reference sensor; by default the columns follow
//! the simulated dataset schema, and a manifest may remap them.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{column_index, csv_error, open_csv, parse_field};
use crate::error::{Error, Result};
use crate::sim::{EulerAngles, Recording};
use crate::Triad;

/// Column names holding the reference (`gt`) and unit-under-test (`noisy`) axes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub gt: [String; 3],
    pub noisy: [String; 3],
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            gt: ["gt_x".into(), "gt_y".into(), "gt_z".into()],
            noisy: ["noisy_x".into(), "noisy_y".into(), "noisy_z".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub roll_deg: f64,
    pub pitch_deg: f64,
    #[serde(default)]
    pub yaw_deg: f64,
    pub sample_rate: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FieldManifest {
    pub entries: Vec<ManifestEntry>,
    #[serde(default)]
    pub columns: ColumnMap,
}

impl FieldManifest {
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for e in &self.entries {
            if !seen.insert(&e.path) {
                return Err(Error::Config(format!("duplicate manifest path {}", e.path.display())));
            }
            if !(e.sample_rate.is_finite() && e.sample_rate > 0.0) {
                return Err(Error::Config(format!(
                    "{}: sample_rate must be > 0, got {}",
                    e.path.display(),
                    e.sample_rate
                )));
            }
        }
        Ok(())
    }
}

/// Reads a JSON manifest; relative entry paths resolve against its directory.
pub fn load_manifest(path: &Path) -> Result<FieldManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut manifest: FieldManifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line() as u64,
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    for entry in &mut manifest.entries {
        if entry.path.is_relative() {
            entry.path = base.join(&entry.path);
        }
    }
    manifest.validate()?;
    Ok(manifest)
}

fn read_pairs(path: &Path, columns: &ColumnMap) -> Result<(Vec<Triad>, Vec<Triad>)> {
    let mut reader = open_csv(path)?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let names: Vec<&str> = columns.gt.iter().chain(&columns.noisy).map(String::as_str).collect();
    let idx: Vec<usize> = names
        .iter()
        .map(|n| column_index(path, &headers, n))
        .collect::<Result<_>>()?;

    let mut gt = Vec::new();
    let mut noisy = Vec::new();
    let mut dropped = 0usize;
    for row in reader.records() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let mut v = [0.0; 6];
        for (slot, (&c, name)) in v.iter_mut().zip(idx.iter().zip(&names)) {
            let raw = row.get(c).ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("missing value for {name}"),
            })?;
            *slot = parse_field(path, line, name, raw)?;
        }
        if v.iter().all(|x| x.is_finite()) {
            gt.push([v[0], v[1], v[2]]);
            noisy.push([v[3], v[4], v[5]]);
        } else {
            dropped += 1;
        }
    }
    if dropped > 0 {
        log::warn!("{}: dropped {dropped} rows with non-finite values", path.display());
    }
    Ok((gt, noisy))
}

/// Loads every manifest entry as one recording, files read in parallel.
pub fn load_recordings(manifest: &FieldManifest) -> Result<Vec<Recording>> {
    manifest.validate()?;
    manifest
        .entries
        .par_iter()
        .map(|entry| {
            let (gt, noisy) = read_pairs(&entry.path, &manifest.columns)?;
            if gt.is_empty() {
                return Err(Error::InvalidData(format!(
                    "{}: recording has no valid samples",
                    entry.path.display()
                )));
            }
            let angles = EulerAngles::new(entry.roll_deg, entry.pitch_deg, entry.yaw_deg);
            Recording::new(angles, gt, noisy, entry.sample_rate)
        })
        .collect()
}

/// Consecutive windows of `h` samples starting every `stride` samples.
/// A trailing partial window is dropped.
pub fn window(rec: &Recording, h: usize, stride: usize) -> Result<Vec<Recording>> {
    if h == 0 || stride == 0 {
        return Err(Error::invalid(format!("window {h} and stride {stride} must be >= 1")));
    }
    if h > rec.len() {
        return Err(Error::invalid(format!(
            "window {h} longer than recording of {} samples",
            rec.len()
        )));
    }
    Ok((0..=rec.len() - h)
        .step_by(stride)
        .map(|start| Recording {
            angles: rec.angles,
            gt: rec.gt[start..start + h].to_vec(),
            noisy: rec.noisy[start..start + h].to_vec(),
            sample_rate: rec.sample_rate,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::write_csv;
    use crate::sim::{build_dataset, SimConfig};
    use proptest::prelude::*;

    fn ramp(n: usize) -> Recording {
        let gt: Vec<Triad> = (0..n).map(|i| [i as f64, 0.0, -9.8]).collect();
        Recording::new(EulerAngles::level(0.0, 0.0), gt.clone(), gt, 100.0).unwrap()
    }

    #[test]
    fn window_counts() {
        assert_eq!(window(&ramp(10), 5, 5).unwrap().len(), 2);
        let w = window(&ramp(10), 4, 3).unwrap();
        let starts: Vec<f64> = w.iter().map(|r| r.gt[0][0]).collect();
        assert_eq!(starts, vec![0.0, 3.0, 6.0]);
        assert!(matches!(window(&ramp(10), 11, 1), Err(Error::InvalidArgument(_))));
        assert!(window(&ramp(10), 0, 1).is_err());
        assert!(window(&ramp(10), 2, 0).is_err());
    }

    proptest! {
        #[test]
        fn tiling_windows_are_a_prefix(n in 1usize..60, h in 1usize..20) {
            prop_assume!(h <= n);
            let rec = ramp(n);
            let joined: Vec<Triad> = window(&rec, h, h).unwrap().into_iter().flat_map(|w| w.gt).collect();
            prop_assert_eq!(joined.len(), (n / h) * h);
            prop_assert_eq!(&joined[..], &rec.gt[..joined.len()]);
        }
    }

    fn write_each(dir: &Path, recs: &[Recording]) -> FieldManifest {
        let entries = recs
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let path = dir.join(format!("rec{i}.csv"));
                write_csv(&path, std::slice::from_ref(r)).unwrap();
                ManifestEntry {
                    path,
                    roll_deg: r.angles.roll_deg,
                    pitch_deg: r.angles.pitch_deg,
                    yaw_deg: r.angles.yaw_deg,
                    sample_rate: r.sample_rate,
                }
            })
            .collect();
        FieldManifest {
            entries,
            columns: ColumnMap::default(),
        }
    }

    #[test]
    fn generated_dataset_round_trips_through_manifest() {
        let cfg = SimConfig {
            angle_min_deg: 0.0,
            angle_max_deg: 2.0,
            angle_step_deg: 1.0,
            window_len: 25,
            seed: 3,
            ..SimConfig::default()
        };
        let data = build_dataset(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_each(dir.path(), &data[..2]);
        let loaded = load_recordings(&manifest).unwrap();
        assert_eq!(loaded.len(), 2);
        assert_eq!(&loaded[..], &data[..2]);
    }

    #[test]
    fn manifest_file_paths_resolve_relative_to_manifest() {
        let dir = tempfile::tempdir().unwrap();
        write_csv(&dir.path().join("a.csv"), &[ramp(4)]).unwrap();
        let json = r#"{"entries":[{"path":"a.csv","roll_deg":1.0,"pitch_deg":2.0,"sample_rate":50.0}]}"#;
        let mpath = dir.path().join("manifest.json");
        std::fs::write(&mpath, json).unwrap();
        let recs = load_recordings(&load_manifest(&mpath).unwrap()).unwrap();
        assert_eq!(recs[0].len(), 4);
        assert_eq!(recs[0].angles, EulerAngles::new(1.0, 2.0, 0.0));
        assert_eq!(recs[0].sample_rate, 50.0);
    }

    #[test]
    fn column_mapping_override() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.csv");
        std::fs::write(&path, "time,ax,ay,az,ref_x,ref_y,ref_z\n0,1,2,3,4,5,6\n0.01,1,2,3,4,5,6\n").unwrap();
        let manifest = FieldManifest {
            entries: vec![ManifestEntry {
                path,
                roll_deg: 0.0,
                pitch_deg: 0.0,
                yaw_deg: 0.0,
                sample_rate: 100.0,
            }],
            columns: ColumnMap {
                gt: ["ref_x".into(), "ref_y".into(), "ref_z".into()],
                noisy: ["ax".into(), "ay".into(), "az".into()],
            },
        };
        let recs = load_recordings(&manifest).unwrap();
        assert_eq!(recs[0].gt[0], [4.0, 5.0, 6.0]);
        assert_eq!(recs[0].noisy[1], [1.0, 2.0, 3.0]);
    }

    #[test]
    fn parse_error_cites_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        let mut text = String::from("roll_deg,pitch_deg,yaw_deg,t_s,gt_x,gt_y,gt_z,noisy_x,noisy_y,noisy_z\n");
        for i in 2..=20 {
            let cell = if i == 17 { "abc".to_string() } else { "1.0".to_string() };
            text.push_str(&format!("0,0,0,{i},{cell},0,-9.8,1,0,-9.8\n"));
        }
        std::fs::write(&path, text).unwrap();
        let manifest = FieldManifest {
            entries: vec![ManifestEntry {
                path,
                roll_deg: 0.0,
                pitch_deg: 0.0,
                yaw_deg: 0.0,
                sample_rate: 100.0,
            }],
            columns: ColumnMap::default(),
        };
        match load_recordings(&manifest) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 17),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_file_reports_path() {
        let manifest = FieldManifest {
            entries: vec![ManifestEntry {
                path: PathBuf::from("/nonexistent/x.csv"),
                roll_deg: 0.0,
                pitch_deg: 0.0,
                yaw_deg: 0.0,
                sample_rate: 100.0,
            }],
            columns: ColumnMap::default(),
        };
        match load_recordings(&manifest) {
            Err(Error::Io { path, .. }) => assert_eq!(path, PathBuf::from("/nonexistent/x.csv")),
            other => panic!("expected I/O error, got {other:?}"),
        }
    }

    #[test]
    fn empty_or_nonfinite_only_file_is_invalid_data() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        std::fs::write(
            &path,
            "roll_deg,pitch_deg,yaw_deg,t_s,gt_x,gt_y,gt_z,noisy_x,noisy_y,noisy_z\n0,0,0,0,NaN,0,0,0,0,0\n",
        )
        .unwrap();
        let manifest = FieldManifest {
            entries: vec![ManifestEntry {
                path,
                roll_deg: 0.0,
                pitch_deg: 0.0,
                yaw_deg: 0.0,
                sample_rate: 100.0,
            }],
            columns: ColumnMap::default(),
        };
        assert!(matches!(load_recordings(&manifest), Err(Error::InvalidData(_))));
    }

    #[test]
    fn duplicate_paths_rejected() {
        let e = ManifestEntry {
            path: PathBuf::from("a.csv"),
            roll_deg: 0.0,
            pitch_deg: 0.0,
            yaw_deg: 0.0,
            sample_rate: 100.0,
        };
        let manifest = FieldManifest {
            entries: vec![e.clone(), e],
            columns: ColumnMap::default(),
        };
        assert!(manifest.validate().is_err());
    }
}
