//! Builds a small simulated dataset on a coarse roll/pitch grid and writes it
//! as CSV plus a JSON metadata sidecar.
//!
//! ```text
//! cargo run --example simulate_dataset [out_dir]
//! ```

use std::path::PathBuf;

use accel_denoise::dataset::{self, DatasetMetadata};
use accel_denoise::sim::{self, SimConfig};

fn main() -> accel_denoise::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "sim_out".into()));
    std::fs::create_dir_all(&out).map_err(|e| accel_denoise::Error::io(&out, e))?;

    let cfg = SimConfig {
        angle_step_deg: 5.0,
        window_len: 200,
        seed: 7,
        ..SimConfig::default()
    };
    let recordings = sim::build_dataset(&cfg)?;
    let samples = recordings.iter().map(|r| r.len()).sum();
    println!("{} recordings, {samples} samples at {} Hz", recordings.len(), cfg.sample_rate());

    let first = &recordings[0];
    let mean_err: Vec<f64> = (0..3)
        .map(|a| first.noisy.iter().zip(&first.gt).map(|(n, g)| n[a] - g[a]).sum::<f64>() / first.len() as f64)
        .collect();
    println!("first orientation {:?}, mean noisy - gt per axis {mean_err:.4?}", first.angles);

    dataset::write_csv(&out.join("dataset.csv"), &recordings)?;
    dataset::write_metadata(
        &out.join("dataset.json"),
        &DatasetMetadata {
            sim: cfg.clone(),
            recordings: recordings.len(),
            samples,
        },
    )?;
    let back = dataset::read_csv(&out.join("dataset.csv"), cfg.sample_rate())?;
    assert_eq!(back, recordings);
    println!("wrote and re-read {}", out.join("dataset.csv").display());
    Ok(())
}
