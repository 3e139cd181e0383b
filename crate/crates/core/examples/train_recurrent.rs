//! Trains a small bidirectional GRU on simulated windows and writes its loss
//! curve and checkpoint.
//!
//! ```text
//! cargo run --release --example train_recurrent [gru|lstm|rnn] [epochs]
//! ```

use accel_denoise::bench::{self, SplitConfig, Splits};
use accel_denoise::nn::{self, checkpoint, ModelKind, TrainConfig};
use accel_denoise::sim::{self, SimConfig};

fn main() -> accel_denoise::Result<()> {
    let mut args = std::env::args().skip(1);
    let kind: ModelKind = args.next().as_deref().unwrap_or("gru").parse()?;
    let epochs = args.next().map_or(5, |e| e.parse().expect("epoch count"));

    let sim_cfg = SimConfig {
        angle_step_deg: 3.0,
        window_len: 500,
        ..SimConfig::default()
    };
    let recordings = sim::build_dataset(&sim_cfg)?;
    let splits = bench::split_windows(&recordings, 100, &SplitConfig::default(), 0)?;
    let cfg = TrainConfig {
        epochs,
        step_size: 1e-2,
        hidden: 8,
        ..TrainConfig::default()
    };
    let outcome = nn::train(kind, &Splits::pairs(&splits.train), &Splits::pairs(&splits.val), &cfg)?;
    for e in &outcome.curve {
        println!("epoch {:>3}  train {:.5}  val RMSE {:.5} m/s^2", e.epoch, e.train_mse, e.val_rmse);
    }
    println!("kept parameters from epoch {:?}", outcome.best_epoch);

    let dir = std::env::temp_dir();
    nn::write_loss_curve(&dir.join("example_loss.csv"), &outcome.curve)?;
    checkpoint::save(&dir.join("example.ckpt"), &outcome.denoiser)?;
    let restored = checkpoint::load(&dir.join("example.ckpt"))?;
    assert_eq!(restored, outcome.denoiser);
    println!("checkpoint written to {}", dir.join("example.ckpt").display());
    Ok(())
}
