//! Full simulated benchmark at desk scale: every denoiser, metrics table,
//! alignment table and suppression ratios.
//!
//! ```text
//! cargo run --release --example benchmark [grid_step_deg]
//! ```

use accel_denoise::bench::{self, BenchConfig};

fn main() -> accel_denoise::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ACCEL_DENOISE_LOG", "info")).init();
    let mut cfg = BenchConfig::default();
    if let Some(step) = std::env::args().nth(1) {
        cfg.sim.angle_step_deg = step.parse().expect("grid step in degrees");
    }
    let (result, _) = bench::run(&cfg)?;
    let (tr, va, te) = result.splits;
    println!("windows: {tr} train / {va} val / {te} test, kNN k = {:?}", result.knn_k);
    let sp = &result.tuned_sp;
    if let Some(ma) = &sp.ma {
        println!("MA window {}", ma.window);
    }
    if let Some(sg) = &sp.sg {
        println!("SG window {} degree {}", sg.filter.window_len(), sg.filter.poly_degree());
    }
    if let Some(dwt) = &sp.dwt {
        println!("DWT levels {} threshold {:?}", dwt.config.levels, dwt.config.threshold);
    }
    for (name, t) in &result.suite_timings {
        println!("{name}: {t:.1?}");
    }
    for (m, curve, best) in &result.curves {
        let best_rmse = best.map(|b| curve[b - 1].val_rmse);
        println!("{m}: best epoch {best:?} of {}, val RMSE {best_rmse:?}", curve.len());
    }
    println!("\n{}", result.evaluation.metrics.to_csv());
    println!("{}", result.evaluation.sca.to_csv());
    for row in &result.evaluation.metrics.rows {
        println!("gamma {:<5} {:.4}", row.model, result.evaluation.suppression(&row.model)?);
    }
    Ok(())
}
