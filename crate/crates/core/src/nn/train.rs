//! Mini-batch Adam training with full BPTT.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{ModelKind, RecurrentModel};
use crate::error::{Error, Result};
use crate::{Denoiser, Triad, WindowPair};

const CLIP_NORM: f64 = 5.0;
const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub step_size: f64,
    /// When set, the step size follows a cosine from `step_size` down to this value.
    pub final_step_size: Option<f64>,
    pub seed: u64,
    pub window_len: usize,
    pub hidden: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            batch_size: 64,
            step_size: 1e-3,
            final_step_size: None,
            seed: 0,
            window_len: 100,
            hidden: 32,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.window_len == 0 || self.hidden == 0 {
            return Err(Error::Config("batch size, window length and hidden size must be positive".into()));
        }
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(Error::Config(format!("step size must be positive, got {}", self.step_size)));
        }
        if let Some(end) = self.final_step_size {
            if !(end.is_finite() && end > 0.0 && end <= self.step_size) {
                return Err(Error::Config(format!(
                    "final step size must lie in (0, {}], got {end}",
                    self.step_size
                )));
            }
        }
        Ok(())
    }

    /// Step size used throughout 1-based `epoch`.
    pub fn step_size_at(&self, epoch: usize) -> f64 {
        match self.final_step_size {
            None => self.step_size,
            Some(end) => {
                let t = (epoch.saturating_sub(1)) as f64 / self.epochs.saturating_sub(1).max(1) as f64;
                end + 0.5 * (self.step_size - end) * (1.0 + (std::f64::consts::PI * t).cos())
            }
        }
    }
}

/// Per-axis affine map fitted on the training inputs and shared by targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Triad,
    pub std: Triad,
}

impl Standardizer {
    pub fn identity() -> Self {
        Self {
            mean: [0.0; 3],
            std: [1.0; 3],
        }
    }

    pub fn fit(windows: &[WindowPair]) -> Result<Self> {
        let n = windows.iter().map(|w| w.0.len()).sum::<usize>();
        if n == 0 {
            return Err(Error::invalid("cannot standardize an empty training set"));
        }
        let mut mean = [0.0; 3];
        for s in windows.iter().flat_map(|w| &w.0) {
            for a in 0..3 {
                mean[a] += s[a] / n as f64;
            }
        }
        let mut var = [0.0; 3];
        for s in windows.iter().flat_map(|w| &w.0) {
            for a in 0..3 {
                var[a] += (s[a] - mean[a]).powi(2) / n as f64;
            }
        }
        let std = var.map(|v| if v > 0.0 { v.sqrt() } else { 1.0 });
        Ok(Self { mean, std })
    }

    pub fn forward(&self, s: &Triad) -> Triad {
        std::array::from_fn(|a| (s[a] - self.mean[a]) / self.std[a])
    }

    pub fn inverse(&self, s: &Triad) -> Triad {
        std::array::from_fn(|a| s[a] * self.std[a] + self.mean[a])
    }

    fn flatten(&self, window: &[Triad]) -> Vec<f64> {
        window.iter().flat_map(|s| self.forward(s)).collect()
    }
}

/// Trained recurrent network together with its input scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentDenoiser {
    pub model: RecurrentModel,
    pub scaler: Standardizer,
}

impl RecurrentDenoiser {
    pub fn new(model: RecurrentModel, scaler: Standardizer) -> Self {
        Self { model, scaler }
    }

    pub fn kind(&self) -> ModelKind {
        self.model.kind
    }
}

impl Denoiser for RecurrentDenoiser {
    fn name(&self) -> &str {
        self.model.kind.label()
    }

    fn denoise(&self, window: &[Triad]) -> Result<Vec<Triad>> {
        let out = self.model.forward_flat(&self.scaler.flatten(window)).output;
        Ok(out
            .chunks_exact(3)
            .map(|c| self.scaler.inverse(&[c[0], c[1], c[2]]))
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean batch loss in standardized units.
    pub train_mse: f64,
    /// Validation loss in standardized units; NaN without a validation split.
    pub val_mse: f64,
    /// Validation RMSE in m/s²; NaN without a validation split.
    pub val_rmse: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub denoiser: RecurrentDenoiser,
    pub curve: Vec<EpochStats>,
    /// Epoch whose parameters were kept (lowest validation RMSE in sensor units).
    pub best_epoch: Option<usize>,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
    lr: f64,
}

impl Adam {
    fn new(n: usize, lr: f64) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
            lr,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - BETA1.powi(self.t);
        let c2 = 1.0 - BETA2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = BETA1 * self.m[i] + (1.0 - BETA1) * grad[i];
            self.v[i] = BETA2 * self.v[i] + (1.0 - BETA2) * grad[i] * grad[i];
            params[i] -= self.lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + ADAM_EPS);
        }
    }
}

fn check_windows(windows: &[WindowPair], h: usize, what: &str) -> Result<()> {
    for (noisy, gt) in windows {
        if noisy.len() != h || gt.len() != h {
            return Err(Error::invalid(format!(
                "{what} window of {} / {} samples, expected {h}",
                noisy.len(),
                gt.len()
            )));
        }
    }
    Ok(())
}

/// Initializes a model from `cfg.seed` and trains it.
pub fn train(kind: ModelKind, train_set: &[WindowPair], val_set: &[WindowPair], cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let mut init_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    init_rng.set_stream(1);
    let model = RecurrentModel::init(kind, cfg.hidden, || init_rng.random::<f64>())?;
    let scaler = Standardizer::fit(train_set)?;
    train_from(RecurrentDenoiser::new(model, scaler), train_set, val_set, cfg)
}

/// Continues training an existing network; its scaler is kept.
pub fn train_from(
    start: RecurrentDenoiser,
    train_set: &[WindowPair],
    val_set: &[WindowPair],
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    check_windows(train_set, cfg.window_len, "training")?;
    check_windows(val_set, cfg.window_len, "validation")?;
    if train_set.is_empty() && cfg.epochs > 0 {
        return Err(Error::invalid("empty training set"));
    }
    let scaler = start.scaler;
    let kind = start.model.kind;
    let prep = |set: &[WindowPair]| -> Vec<(Vec<f64>, Vec<f64>)> {
        set.iter().map(|(x, y)| (scaler.flatten(x), scaler.flatten(y))).collect()
    };
    let train_flat = prep(train_set);
    let val_flat = prep(val_set);

    let mut model = start.model;
    let mut adam = Adam::new(model.params.len(), cfg.step_size);
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    shuffle_rng.set_stream(2);
    let mut order: Vec<usize> = (0..train_flat.len()).collect();
    let mut curve = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, usize, Vec<f64>)> = None;

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        adam.lr = cfg.step_size_at(epoch);
        let mut loss_sum = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let results: Vec<(f64, Vec<f64>)> = batch
                .par_iter()
                .map(|&i| model.loss_and_grad(&train_flat[i].0, &train_flat[i].1))
                .collect();
            let scale = 1.0 / batch.len() as f64;
            let mut grad = vec![0.0; model.params.len()];
            let mut batch_loss = 0.0;
            for (loss, g) in &results {
                batch_loss += loss * scale;
                for (a, v) in grad.iter_mut().zip(g) {
                    *a += v * scale;
                }
            }
            if !batch_loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Divergence(format!(
                    "{} training produced a non-finite loss in epoch {epoch}",
                    kind.label()
                )));
            }
            let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if norm > CLIP_NORM {
                for g in &mut grad {
                    *g *= CLIP_NORM / norm;
                }
            }
            adam.step(&mut model.params, &grad);
            loss_sum += batch_loss * batch.len() as f64;
        }
        let train_mse = loss_sum / train_flat.len() as f64;
        let (val_mse, val_rmse) = validation_loss(&model, &val_flat, &scaler);
        log::info!(
            "{} epoch {epoch}/{}: train {train_mse:.5} val {val_mse:.5} ({val_rmse:.5} m/s²)",
            kind.label(),
            cfg.epochs
        );
        if !val_mse.is_finite() && !val_flat.is_empty() {
            return Err(Error::Divergence(format!(
                "{} validation loss is non-finite in epoch {epoch}",
                kind.label()
            )));
        }
        if !val_flat.is_empty() && best.as_ref().is_none_or(|b| val_rmse < b.0) {
            best = Some((val_rmse, epoch, model.params.clone()));
        }
        curve.push(EpochStats {
            epoch,
            train_mse,
            val_mse,
            val_rmse,
        });
    }
    let best_epoch = best.map(|(_, epoch, params)| {
        model.params = params;
        epoch
    });
    Ok(TrainOutcome {
        denoiser: RecurrentDenoiser::new(model, scaler),
        curve,
        best_epoch,
    })
}

fn validation_loss(model: &RecurrentModel, val: &[(Vec<f64>, Vec<f64>)], scaler: &Standardizer) -> (f64, f64) {
    if val.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let parts: Vec<(f64, f64, usize)> = val
        .par_iter()
        .map(|(x, y)| {
            let out = model.forward_flat(x).output;
            let mut a = 0.0;
            let mut b = 0.0;
            for (i, (p, t)) in out.iter().zip(y).enumerate() {
                let e = p - t;
                a += e * e;
                b += (e * scaler.std[i % 3]).powi(2);
            }
            (a, b, out.len())
        })
        .collect();
    let (sq_std, sq_phys, n) = parts
        .iter()
        .fold((0.0, 0.0, 0), |l, r| (l.0 + r.0, l.1 + r.1, l.2 + r.2));
    (sq_std / n as f64, (sq_phys / n as f64).sqrt())
}

pub fn write_loss_curve(path: &Path, curve: &[EpochStats]) -> Result<()> {
    let mut out = csv::Writer::from_path(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let csv_err = |e: csv::Error| Error::Config(format!("{}: {e}", path.display()));
    out.write_record(["epoch", "train_mse", "val_mse", "val_rmse"]).map_err(csv_err)?;
    for s in curve {
        out.write_record([
            s.epoch.to_string(),
            s.train_mse.to_string(),
            s.val_mse.to_string(),
            s.val_rmse.to_string(),
        ])
        .map_err(csv_err)?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn constant_task(n: usize, h: usize, seed: u64) -> Vec<WindowPair> {
        let c = [0.3, -0.5, -9.7];
        let noise = Normal::new(0.0, 0.05).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let noisy = (0..h).map(|_| std::array::from_fn(|a| c[a] + noise.sample(&mut rng))).collect();
                (noisy, vec![c; h])
            })
            .collect()
    }

    fn cfg(epochs: usize) -> TrainConfig {
        TrainConfig {
            epochs,
            batch_size: 8,
            step_size: 1e-2,
            final_step_size: None,
            seed: 3,
            window_len: 20,
            hidden: 6,
        }
    }

    #[test]
    fn cosine_schedule_endpoints() {
        let c = TrainConfig {
            final_step_size: Some(1e-4),
            ..cfg(11)
        };
        assert_eq!(c.step_size_at(1), 1e-2);
        assert!((c.step_size_at(11) - 1e-4).abs() < 1e-15);
        assert!((c.step_size_at(6) - 0.5 * (1e-2 + 1e-4)).abs() < 1e-15);
        assert_eq!(cfg(11).step_size_at(7), 1e-2);
        let bad = TrainConfig {
            final_step_size: Some(1.0),
            ..cfg(3)
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn zero_epochs_returns_start() {
        let data = constant_task(4, 20, 0);
        let start = train(ModelKind::BiGru, &data, &[], &cfg(0)).unwrap().denoiser;
        let again = train_from(start.clone(), &data, &data, &cfg(0)).unwrap();
        assert_eq!(again.denoiser, start);
        assert!(again.curve.is_empty());
        assert_eq!(again.best_epoch, None);
    }

    #[test]
    fn constant_target_is_learned() {
        let train_set = constant_task(64, 20, 1);
        let val_set = constant_task(16, 20, 2);
        for kind in ModelKind::ALL {
            let out = train(kind, &train_set, &val_set, &cfg(20)).unwrap();
            let best = out.curve.iter().map(|s| s.val_rmse).fold(f64::INFINITY, f64::min);
            assert!(best < 0.05, "{kind:?}: {best}");
            assert_eq!(out.curve.len(), 20);
            let kept = out.best_epoch.unwrap();
            assert_eq!(out.curve[kept - 1].val_rmse, best);
            let (mut pred, mut gt) = (Vec::new(), Vec::new());
            for (x, y) in &val_set {
                pred.extend(out.denoiser.denoise(x).unwrap());
                gt.extend_from_slice(y);
            }
            let rmse = crate::metrics::rmse(&pred, &gt).unwrap();
            assert!((rmse - best).abs() < 1e-12, "{rmse} vs {best}");
        }
    }

    #[test]
    fn training_is_deterministic() {
        let data = constant_task(16, 20, 4);
        let a = train(ModelKind::BiRnn, &data, &data, &cfg(2)).unwrap();
        let b = train(ModelKind::BiRnn, &data, &data, &cfg(2)).unwrap();
        assert_eq!(a.denoiser, b.denoiser);
        assert_eq!(a.curve, b.curve);
    }

    #[test]
    fn divergence_is_reported() {
        let mut data = constant_task(4, 20, 5);
        data[0].1[3] = [f64::INFINITY, 0.0, 0.0];
        let err = train(ModelKind::Lstm2, &data, &[], &cfg(1)).unwrap_err();
        assert!(matches!(err, Error::Divergence(_)));
    }

    #[test]
    fn mismatched_windows_rejected() {
        let data = constant_task(4, 19, 6);
        assert!(train(ModelKind::BiGru, &data, &[], &cfg(1)).is_err());
        let mut bad = cfg(1);
        bad.step_size = 0.0;
        assert!(matches!(train(ModelKind::BiGru, &constant_task(2, 20, 0), &[], &bad), Err(Error::Config(_))));
    }

    #[test]
    fn standardizer_round_trip() {
        let data = constant_task(8, 20, 7);
        let s = Standardizer::fit(&data).unwrap();
        let x = [1.0, -2.0, 3.5];
        let y = s.inverse(&s.forward(&x));
        for a in 0..3 {
            assert!((x[a] - y[a]).abs() < 1e-12);
        }
    }
}
