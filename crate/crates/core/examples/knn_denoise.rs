//! Trains the kNN denoiser on simulated windows, saves and reloads the
//! model, and scores it on held-out windows.
//!
//! ```text
//! cargo run --release --example knn_denoise
//! ```

use accel_denoise::bench::{self, SplitConfig, Splits};
use accel_denoise::knn::{KnnDenoiser, QueryContext};
use accel_denoise::metrics;
use accel_denoise::sim::{self, SimConfig};
use accel_denoise::Denoiser;

fn main() -> accel_denoise::Result<()> {
    let cfg = SimConfig {
        angle_step_deg: 2.0,
        window_len: 500,
        ..SimConfig::default()
    };
    let recordings = sim::build_dataset(&cfg)?;
    let splits = bench::split_windows(&recordings, 100, &SplitConfig::default(), cfg.seed)?;
    let model = KnnDenoiser::train(&Splits::pairs(&splits.train), QueryContext::Window, None)?;
    println!("{} reference samples, k = {}", model.index.len(), model.k);

    let path = std::env::temp_dir().join("knn_example.bin");
    model.save(&path)?;
    let model = KnnDenoiser::load(&path)?;

    let (mut pred, mut noisy, mut gt) = (Vec::new(), Vec::new(), Vec::new());
    for s in &splits.test {
        pred.extend(model.denoise(&s.noisy)?);
        noisy.extend_from_slice(&s.noisy);
        gt.extend_from_slice(&s.gt);
    }
    let (rae_knn, rae_noisy) = (metrics::rae(&pred, &gt)?, metrics::rae(&noisy, &gt)?);
    println!("test RMSE noisy {:.5}, kNN {:.5}", metrics::rmse(&noisy, &gt)?, metrics::rmse(&pred, &gt)?);
    println!("suppression ratio {:.4}", rae_knn / rae_noisy);
    Ok(())
}
