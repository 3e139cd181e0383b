//! Stationary accelerometer dataset synthesis.
//!
//! A dataset is a grid of roll/pitch orientations (yaw fixed at zero). For
//! each orientation the gravity vector is projected onto the body axes and
//! two sensor grades are simulated on top of it: a "noisy" unit under test
//! and a near-ideal "GT" reference. Each grade adds white noise (velocity
//! random walk), a first-order Gauss-Markov bias (bias instability) and a
//! constant offset.
//!
//! Every recording draws from its own ChaCha8 stream selected by its grid
//! index, so serial and parallel generation produce identical datasets.

use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Triad;

/// Standard gravity, m/s².
pub const STANDARD_GRAVITY: f64 = 9.80665;

/// Default correlation time of the bias-instability process, seconds.
pub const DEFAULT_BI_CORR_TIME: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub roll_deg: f64,
    pub pitch_deg: f64,
    pub yaw_deg: f64,
}

impl EulerAngles {
    pub fn new(roll_deg: f64, pitch_deg: f64, yaw_deg: f64) -> Self {
        Self {
            roll_deg,
            pitch_deg,
            yaw_deg,
        }
    }

    /// Roll/pitch pair with zero yaw.
    pub fn level(roll_deg: f64, pitch_deg: f64) -> Self {
        Self::new(roll_deg, pitch_deg, 0.0)
    }

    fn is_finite(&self) -> bool {
        self.roll_deg.is_finite() && self.pitch_deg.is_finite() && self.yaw_deg.is_finite()
    }
}

/// Error magnitudes of one sensor grade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Velocity random walk, m/s/√s.
    pub vrw: f64,
    /// Bias instability (steady-state std of the Gauss-Markov bias), m/s².
    pub bi: f64,
    /// Bias offset bound, m/s².
    pub bo: f64,
    /// Hz.
    pub sample_rate: f64,
    /// Gauss-Markov correlation time, s.
    pub bi_corr_time: f64,
}

impl NoiseSpec {
    pub fn new(vrw: f64, bi: f64, bo: f64, sample_rate: f64) -> Result<Self> {
        let spec = Self {
            vrw,
            bi,
            bo,
            sample_rate,
            bi_corr_time: DEFAULT_BI_CORR_TIME,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// No error sources at all.
    pub fn zero(sample_rate: f64) -> Self {
        Self {
            vrw: 0.0,
            bi: 0.0,
            bo: 0.0,
            sample_rate,
            bi_corr_time: DEFAULT_BI_CORR_TIME,
        }
    }

    /// Consumer-grade unit used for the simulated benchmark.
    pub fn simulated_noisy() -> Self {
        Self {
            vrw: 0.005,
            bi: 0.001,
            bo: 0.05,
            sample_rate: 100.0,
            bi_corr_time: DEFAULT_BI_CORR_TIME,
        }
    }

    /// Reference grade used as simulated ground truth.
    pub fn simulated_gt() -> Self {
        Self {
            vrw: 1e-5,
            bi: 1e-5,
            bo: 1e-5,
            sample_rate: 100.0,
            bi_corr_time: DEFAULT_BI_CORR_TIME,
        }
    }

    /// Smartphone accelerometer datasheet values (field experiment unit).
    pub fn smartphone() -> Self {
        Self {
            vrw: 0.003,
            bi: 0.001,
            bo: 0.067,
            sample_rate: 100.0,
            bi_corr_time: DEFAULT_BI_CORR_TIME,
        }
    }

    /// Marine reference unit datasheet values (field experiment GT).
    pub fn reference_mru() -> Self {
        Self {
            vrw: 0.00025,
            bi: 0.00005,
            bo: 0.0001,
            sample_rate: 100.0,
            bi_corr_time: DEFAULT_BI_CORR_TIME,
        }
    }

    pub fn with_sample_rate(mut self, sample_rate: f64) -> Self {
        self.sample_rate = sample_rate;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let mags = [("vrw", self.vrw), ("bi", self.bi), ("bo", self.bo)];
        for (name, v) in mags {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("noise spec {name} must be >= 0, got {v}")));
            }
        }
        if !(self.sample_rate.is_finite() && self.sample_rate > 0.0) {
            return Err(Error::invalid(format!(
                "sample_rate must be > 0, got {}",
                self.sample_rate
            )));
        }
        if !(self.bi_corr_time.is_finite() && self.bi_corr_time > 0.0) {
            return Err(Error::invalid(format!(
                "bi_corr_time must be > 0, got {}",
                self.bi_corr_time
            )));
        }
        Ok(())
    }

    /// Per-sample white-noise standard deviation, `vrw * sqrt(fs)`.
    pub fn white_std(&self) -> f64 {
        self.vrw * self.sample_rate.sqrt()
    }
}

/// When the constant bias offset is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BiasOffsetMode {
    /// One signed offset per axis shared by every recording of the dataset.
    #[default]
    PerDataset,
    /// A fresh signed offset per axis for every recording.
    PerRecording,
}

/// Paired noisy / ground-truth specific-force series at one orientation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recording {
    pub angles: EulerAngles,
    pub gt: Vec<Triad>,
    pub noisy: Vec<Triad>,
    pub sample_rate: f64,
}

impl Recording {
    pub fn new(angles: EulerAngles, gt: Vec<Triad>, noisy: Vec<Triad>, sample_rate: f64) -> Result<Self> {
        let rec = Self {
            angles,
            gt,
            noisy,
            sample_rate,
        };
        rec.validate()?;
        Ok(rec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.gt.is_empty() {
            return Err(Error::InvalidData("recording has no samples".into()));
        }
        if self.gt.len() != self.noisy.len() {
            return Err(Error::InvalidData(format!(
                "gt has {} samples but noisy has {}",
                self.gt.len(),
                self.noisy.len()
            )));
        }
        if !(self.sample_rate.is_finite() && self.sample_rate > 0.0) {
            return Err(Error::InvalidData(format!("bad sample rate {}", self.sample_rate)));
        }
        if !self.angles.is_finite() {
            return Err(Error::InvalidData("non-finite orientation".into()));
        }
        let finite = |s: &[Triad]| s.iter().flatten().all(|v| v.is_finite());
        if !finite(&self.gt) || !finite(&self.noisy) {
            return Err(Error::InvalidData("non-finite sample".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.gt.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gt.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub angle_min_deg: f64,
    pub angle_max_deg: f64,
    pub angle_step_deg: f64,
    /// Samples per recording.
    pub window_len: usize,
    pub noisy_spec: NoiseSpec,
    pub gt_spec: NoiseSpec,
    /// m/s².
    pub gravity: f64,
    pub seed: u64,
    pub bias_offset_mode: BiasOffsetMode,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            angle_min_deg: -15.0,
            angle_max_deg: 15.0,
            angle_step_deg: 0.1,
            window_len: 100,
            noisy_spec: NoiseSpec::simulated_noisy(),
            gt_spec: NoiseSpec::simulated_gt(),
            gravity: STANDARD_GRAVITY,
            seed: 0,
            bias_offset_mode: BiasOffsetMode::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.angle_step_deg.is_finite() && self.angle_step_deg > 0.0) {
            return Err(Error::invalid(format!(
                "angle step must be > 0, got {}",
                self.angle_step_deg
            )));
        }
        if !(self.angle_min_deg.is_finite() && self.angle_max_deg.is_finite())
            || self.angle_max_deg < self.angle_min_deg
        {
            return Err(Error::invalid(format!(
                "bad angle range [{}, {}]",
                self.angle_min_deg, self.angle_max_deg
            )));
        }
        if self.window_len == 0 {
            return Err(Error::invalid("window_len must be >= 1"));
        }
        if !(self.gravity.is_finite() && self.gravity > 0.0) {
            return Err(Error::invalid(format!("gravity must be > 0, got {}", self.gravity)));
        }
        self.noisy_spec.validate()?;
        self.gt_spec.validate()?;
        if self.noisy_spec.sample_rate != self.gt_spec.sample_rate {
            return Err(Error::invalid("noisy and GT grades must share a sample rate"));
        }
        Ok(())
    }

    pub fn sample_rate(&self) -> f64 {
        self.noisy_spec.sample_rate
    }
}

/// Body-to-navigation rotation for z-y-x (yaw, pitch, roll) Euler angles.
pub fn body_to_nav_matrix(angles: EulerAngles) -> Result<Matrix3<f64>> {
    if !angles.is_finite() {
        return Err(Error::invalid(format!("non-finite angles {angles:?}")));
    }
    let (sp, cp) = angles.roll_deg.to_radians().sin_cos();
    let (st, ct) = angles.pitch_deg.to_radians().sin_cos();
    let (sy, cy) = angles.yaw_deg.to_radians().sin_cos();
    Ok(Matrix3::new(
        ct * cy,
        sp * st * cy - cp * sy,
        cp * st * cy + sp * sy,
        ct * sy,
        sp * st * sy + cp * cy,
        cp * st * sy - sp * cy,
        -st,
        sp * ct,
        cp * ct,
    ))
}

/// Specific force sensed by a stationary accelerometer: `[sθ, −sφcθ, −cφcθ]·g`.
///
/// Yaw does not enter the result.
pub fn gravity_projection(angles: EulerAngles, gravity: f64) -> Result<Triad> {
    if !(gravity.is_finite() && gravity > 0.0) {
        return Err(Error::invalid(format!("gravity must be > 0, got {gravity}")));
    }
    if !angles.is_finite() {
        return Err(Error::invalid(format!("non-finite angles {angles:?}")));
    }
    let (sp, cp) = angles.roll_deg.to_radians().sin_cos();
    let (st, ct) = angles.pitch_deg.to_radians().sin_cos();
    Ok([st * gravity, -sp * ct * gravity, -cp * ct * gravity])
}

/// Axis values `min, min+step, ...` over the half-open range `[min, max)`.
///
/// A degenerate range (`min == max`) yields the single value `min`.
pub fn axis_values(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::invalid(format!("angle step must be > 0, got {step}")));
    }
    if !(min.is_finite() && max.is_finite()) || max < min {
        return Err(Error::invalid(format!("bad angle range [{min}, {max}]")));
    }
    let ratio = (max - min) / step;
    let count = ratio.round();
    if (ratio - count).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "range {} is not a whole number of {step} steps",
            max - min
        )));
    }
    if count == 0.0 {
        return Ok(vec![min]);
    }
    Ok((0..count as usize).map(|i| min + i as f64 * step).collect())
}

/// Roll × pitch grid, roll-major, yaw fixed at zero.
pub fn generate_grid(config: &SimConfig) -> Result<Vec<EulerAngles>> {
    let values = axis_values(config.angle_min_deg, config.angle_max_deg, config.angle_step_deg)?;
    Ok(values
        .iter()
        .flat_map(|&roll| values.iter().map(move |&pitch| EulerAngles::level(roll, pitch)))
        .collect())
}

fn draw_offset<R: Rng + ?Sized>(spec: &NoiseSpec, rng: &mut R) -> Triad {
    if spec.bo == 0.0 {
        return [0.0; 3];
    }
    std::array::from_fn(|_| rng.random_range(-spec.bo..=spec.bo))
}

/// White noise plus Gauss-Markov bias, without the constant offset.
fn stochastic_errors<R: Rng + ?Sized>(spec: &NoiseSpec, n: usize, rng: &mut R) -> Vec<Triad> {
    let white = spec.white_std();
    let dt = 1.0 / spec.sample_rate;
    let phi = (-dt / spec.bi_corr_time).exp();
    let drive = spec.bi * (1.0 - phi * phi).sqrt();

    let mut bias: Triad = [0.0; 3];
    if spec.bi > 0.0 {
        // start in steady state
        for b in &mut bias {
            let z: f64 = rng.sample(StandardNormal);
            *b = spec.bi * z;
        }
    }

    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut e = [0.0; 3];
        for axis in 0..3 {
            if white > 0.0 {
                let z: f64 = rng.sample(StandardNormal);
                e[axis] += white * z;
            }
            e[axis] += bias[axis];
        }
        out.push(e);
        if spec.bi > 0.0 {
            for b in &mut bias {
                let z: f64 = rng.sample(StandardNormal);
                *b = phi * *b + drive * z;
            }
        }
    }
    out
}

/// Additive accelerometer errors for `n` samples: white noise with per-sample
/// std `vrw·√fs`, a Gauss-Markov bias with steady-state std `bi`, and a
/// per-axis constant offset drawn uniformly from `[−bo, bo]`.
pub fn synthesize_errors<R: Rng + ?Sized>(spec: &NoiseSpec, n: usize, rng: &mut R) -> Result<Vec<Triad>> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::invalid("sample count must be >= 1"));
    }
    let offset = draw_offset(spec, rng);
    Ok(add_offset(stochastic_errors(spec, n, rng), offset))
}

fn add_offset(mut errors: Vec<Triad>, offset: Triad) -> Vec<Triad> {
    if offset != [0.0; 3] {
        for e in &mut errors {
            for axis in 0..3 {
                e[axis] += offset[axis];
            }
        }
    }
    errors
}

fn add(a: Triad, b: Triad) -> Triad {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// RNG stream for recording `index`; stream 0 is reserved for dataset-wide draws.
pub fn recording_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index + 1);
    rng
}

fn dataset_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    rng
}

/// One recording per grid orientation, generated in parallel.
pub fn build_dataset(config: &SimConfig) -> Result<Vec<Recording>> {
    config.validate()?;
    let grid = generate_grid(config)?;

    let shared = match config.bias_offset_mode {
        BiasOffsetMode::PerDataset => {
            let mut rng = dataset_rng(config.seed);
            let gt = draw_offset(&config.gt_spec, &mut rng);
            let noisy = draw_offset(&config.noisy_spec, &mut rng);
            Some((gt, noisy))
        }
        BiasOffsetMode::PerRecording => None,
    };

    grid.par_iter()
        .enumerate()
        .map(|(i, &angles)| {
            let truth = gravity_projection(angles, config.gravity)?;
            let mut rng = recording_rng(config.seed, i as u64);
            let (gt_off, noisy_off) = match shared {
                Some(offsets) => offsets,
                None => {
                    let gt = draw_offset(&config.gt_spec, &mut rng);
                    let noisy = draw_offset(&config.noisy_spec, &mut rng);
                    (gt, noisy)
                }
            };
            let n = config.window_len;
            let gt_err = add_offset(stochastic_errors(&config.gt_spec, n, &mut rng), gt_off);
            let noisy_err = add_offset(stochastic_errors(&config.noisy_spec, n, &mut rng), noisy_off);
            let gt = gt_err.into_iter().map(|e| add(truth, e)).collect();
            let noisy = noisy_err.into_iter().map(|e| add(truth, e)).collect();
            Recording::new(angles, gt, noisy, config.sample_rate())
        })
        .collect()
}

/// Angular and noise augmentation.
///
/// The orientation is perturbed by uniform roll/pitch offsets in
/// `[−jitter, +jitter]` and both channels are rotated into the new body frame;
/// then white noise of std `extra_noise_std` is added to the noisy channel.
pub fn augment<R: Rng + ?Sized>(
    rec: &Recording,
    angle_jitter_deg: f64,
    extra_noise_std: f64,
    rng: &mut R,
) -> Result<Recording> {
    if !(angle_jitter_deg.is_finite() && angle_jitter_deg >= 0.0) {
        return Err(Error::invalid(format!("angle jitter must be >= 0, got {angle_jitter_deg}")));
    }
    if !(extra_noise_std.is_finite() && extra_noise_std >= 0.0) {
        return Err(Error::invalid(format!("noise std must be >= 0, got {extra_noise_std}")));
    }
    let mut out = rec.clone();

    if angle_jitter_deg > 0.0 {
        let d_roll = rng.random_range(-angle_jitter_deg..=angle_jitter_deg);
        let d_pitch = rng.random_range(-angle_jitter_deg..=angle_jitter_deg);
        let new_angles = EulerAngles::new(
            rec.angles.roll_deg + d_roll,
            rec.angles.pitch_deg + d_pitch,
            rec.angles.yaw_deg,
        );
        // body-frame vectors move from the old body frame to the new one
        let rot = body_to_nav_matrix(new_angles)?.transpose() * body_to_nav_matrix(rec.angles)?;
        let apply = |v: &Triad| -> Triad {
            let r = rot * nalgebra::Vector3::new(v[0], v[1], v[2]);
            [r[0], r[1], r[2]]
        };
        out.gt = rec.gt.iter().map(apply).collect();
        out.noisy = rec.noisy.iter().map(apply).collect();
        out.angles = new_angles;
    }

    if extra_noise_std > 0.0 {
        for sample in &mut out.noisy {
            for v in sample.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *v += extra_noise_std * z;
            }
        }
    }
    Ok(out)
}
