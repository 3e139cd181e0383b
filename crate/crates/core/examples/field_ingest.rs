//! Loads an externally recorded dataset through a JSON manifest with custom
//! column names, then cuts each recording into fixed windows.
//!
//! ```text
//! cargo run --example field_ingest
//! ```

use std::fmt::Write as _;

use accel_denoise::ingest;
use accel_denoise::metrics;

fn main() -> accel_denoise::Result<()> {
    let dir = std::env::temp_dir().join("accel_field_example");
    std::fs::create_dir_all(&dir).map_err(|e| accel_denoise::Error::io(&dir, e))?;

    // a fake 2 s recording: reference unit in ref_*, phone in ax/ay/az
    let mut csv = String::from("t,ref_x,ref_y,ref_z,ax,ay,az\n");
    for i in 0..200 {
        let wobble = 0.02 * ((i as f64) * 0.7).sin();
        writeln!(csv, "{},0.0,0.0,-9.80665,{},{},{}", i as f64 / 100.0, 0.05 + wobble, -0.03, -9.75 - wobble).unwrap();
    }
    std::fs::write(dir.join("level.csv"), csv).map_err(|e| accel_denoise::Error::io(&dir, e))?;
    let manifest = r#"{
        "entries": [{"path": "level.csv", "roll_deg": 0.0, "pitch_deg": 0.0, "sample_rate": 100.0}],
        "columns": {"gt": ["ref_x", "ref_y", "ref_z"], "noisy": ["ax", "ay", "az"]}
    }"#;
    std::fs::write(dir.join("manifest.json"), manifest).map_err(|e| accel_denoise::Error::io(&dir, e))?;

    let manifest = ingest::load_manifest(&dir.join("manifest.json"))?;
    let recordings = ingest::load_recordings(&manifest)?;
    for rec in &recordings {
        let windows = ingest::window(rec, 50, 50)?;
        println!("{} samples at {:?} -> {} windows", rec.len(), rec.angles, windows.len());
        for w in &windows {
            println!("  window RMSE {:.4} m/s^2", metrics::rmse(&w.noisy, &w.gt)?);
        }
    }
    Ok(())
}
