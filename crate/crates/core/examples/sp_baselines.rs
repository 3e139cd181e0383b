//! Runs the three signal-processing baselines on one noisy stationary
//! recording and compares them against the reference series.
//!
//! ```text
//! cargo run --example sp_baselines
//! ```

use accel_denoise::metrics;
use accel_denoise::sim::{self, SimConfig};
use accel_denoise::sp::{DwtConfig, Dwt, MovingAverage, SavitzkyGolay, ThresholdRule};
use accel_denoise::Denoiser;

fn main() -> accel_denoise::Result<()> {
    let cfg = SimConfig {
        angle_min_deg: 4.0,
        angle_max_deg: 5.0,
        angle_step_deg: 1.0,
        window_len: 1000,
        ..SimConfig::default()
    };
    let rec = sim::build_dataset(&cfg)?.remove(0);

    let denoisers: Vec<Box<dyn Denoiser>> = vec![
        Box::new(MovingAverage { window: 50 }),
        Box::new(SavitzkyGolay::new(51, 2)?),
        Box::new(Dwt {
            config: DwtConfig {
                levels: 5,
                threshold: ThresholdRule::Universal,
            },
        }),
    ];
    let noisy_rmse = metrics::rmse(&rec.noisy, &rec.gt)?;
    println!("noisy  RMSE {noisy_rmse:.5} m/s^2");
    for d in &denoisers {
        let out = d.denoise(&rec.noisy)?;
        println!("{:<6} RMSE {:.5} m/s^2", d.name(), metrics::rmse(&out, &rec.gt)?);
    }
    // smoothing removes white noise but leaves the constant offset in place
    Ok(())
}
