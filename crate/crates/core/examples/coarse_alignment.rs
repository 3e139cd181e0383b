//! Stationary coarse alignment: roll and pitch from specific force, first
//! noiseless and then from averaged noisy and smoothed recordings.
//!
//! ```text
//! cargo run --example coarse_alignment
//! ```

use accel_denoise::sca;
use accel_denoise::sim::{self, EulerAngles, SimConfig, STANDARD_GRAVITY};
use accel_denoise::sp::MovingAverage;
use accel_denoise::Denoiser;

fn main() -> accel_denoise::Result<()> {
    let truth = EulerAngles::level(10.0, 5.0);
    let f = sim::gravity_projection(truth, STANDARD_GRAVITY)?;
    println!("f = {f:.6?}");
    println!("roll {:.6} deg, pitch {:.6} deg", sca::roll_from_f(&f)?, sca::pitch_from_f(&f)?);

    let cfg = SimConfig {
        angle_step_deg: 5.0,
        window_len: 200,
        ..SimConfig::default()
    };
    let recordings = sim::build_dataset(&cfg)?;
    let angles: Vec<EulerAngles> = recordings.iter().map(|r| r.angles).collect();
    let noisy: Vec<_> = recordings.iter().map(|r| r.noisy.clone()).collect();
    let ma = MovingAverage { window: 20 };
    let smoothed = noisy.iter().map(|x| ma.denoise(x)).collect::<accel_denoise::Result<Vec<_>>>()?;

    for t in [Some(10), Some(100), None] {
        let report = sca::evaluate_sca(&[("MA".to_string(), smoothed.clone())], &noisy, &angles, t)?;
        println!("averaging {t:?} samples:\n{}", report.to_csv());
    }
    Ok(())
}
