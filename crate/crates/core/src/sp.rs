//! Classical smoothing baselines: moving average, Savitzky-Golay and a
//! Daubechies-4 wavelet denoiser with hard thresholding.
//!
//! All three operate on scalar series; the [`Denoiser`] wrappers filter each
//! accelerometer axis independently. None of them can remove a constant
//! offset: a constant input is returned unchanged.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{per_axis, Denoiser, Triad};

/// Causal mean over the trailing `t_window` samples (current one included).
///
/// The first `t_window − 1` outputs use the expanding mean of the samples
/// seen so far, so the output has the same length as the input.
pub fn moving_average(x: &[f64], t_window: usize) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::invalid("moving average of an empty series"));
    }
    if t_window == 0 || t_window > x.len() {
        return Err(Error::invalid(format!(
            "moving average window {t_window} outside [1, {}]",
            x.len()
        )));
    }
    Ok((0..x.len())
        .map(|i| {
            let lo = (i + 1).saturating_sub(t_window);
            let span = &x[lo..=i];
            span.iter().sum::<f64>() / span.len() as f64
        })
        .collect())
}

/// Savitzky-Golay smoothing weights for a centered window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgFilter {
    window_len: usize,
    poly_degree: usize,
    coefficients: Vec<f64>,
}

impl SgFilter {
    /// Least-squares weights that evaluate the fitted degree-`p` polynomial at
    /// the window center.
    pub fn new(window_len: usize, poly_degree: usize) -> Result<Self> {
        if window_len.is_multiple_of(2) {
            return Err(Error::invalid(format!("SG window must be odd, got {window_len}")));
        }
        if poly_degree >= window_len {
            return Err(Error::invalid(format!(
                "SG degree {poly_degree} must be below window {window_len}"
            )));
        }
        let half = (window_len / 2) as f64;
        let cols = poly_degree + 1;
        // positions scaled to [-1, 1]; the center weight row does not depend on the scale
        let scale = if half > 0.0 { half } else { 1.0 };
        let design = DMatrix::from_fn(window_len, cols, |r, c| ((r as f64 - half) / scale).powi(c as i32));
        let normal = design.transpose() * &design;
        let mut e0 = DVector::zeros(cols);
        e0[0] = 1.0;
        let row = normal
            .lu()
            .solve(&e0)
            .ok_or_else(|| Error::invalid("singular SG normal equations"))?;
        let raw: Vec<f64> = (0..window_len).map(|r| (design.row(r) * &row)[0]).collect();
        let coefficients = (0..window_len)
            .map(|k| 0.5 * (raw[k] + raw[window_len - 1 - k]))
            .collect();
        Ok(Self {
            window_len,
            poly_degree,
            coefficients,
        })
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    pub fn poly_degree(&self) -> usize {
        self.poly_degree
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Convolves `x` with the weights, mirroring the signal at both ends.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = x.len();
        if n < self.window_len {
            return Err(Error::invalid(format!(
                "SG window {} longer than series of {n}",
                self.window_len
            )));
        }
        let half = (self.window_len / 2) as isize;
        Ok((0..n as isize)
            .map(|i| {
                self.coefficients
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c * x[mirror(i + k as isize - half, n)])
                    .sum()
            })
            .collect())
    }
}

/// Reflects an index into `[0, n)` without repeating the edge sample.
fn mirror(i: isize, n: usize) -> usize {
    let n = n as isize;
    if n == 1 {
        return 0;
    }
    let period = 2 * (n - 1);
    let mut k = i.rem_euclid(period);
    if k >= n {
        k = period - k;
    }
    k as usize
}

pub fn savitzky_golay(x: &[f64], window_len: usize, poly_degree: usize) -> Result<Vec<f64>> {
    SgFilter::new(window_len, poly_degree)?.apply(x)
}

/// Daubechies-4 analysis/synthesis filters.
pub mod db4 {
    pub const DEC_LO: [f64; 8] = [
        -0.010597401785069032,
        0.0328830116668852,
        0.030841381835560764,
        -0.18703481171909309,
        -0.027983769416859854,
        0.6308807679298589,
        0.7148465705529157,
        0.2303778133088965,
    ];

    pub const LEN: usize = DEC_LO.len();

    /// Quadrature mirror of the low-pass filter.
    pub fn dec_hi() -> [f64; LEN] {
        std::array::from_fn(|k| {
            let v = DEC_LO[LEN - 1 - k];
            if k % 2 == 0 {
                -v
            } else {
                v
            }
        })
    }

    pub fn rec_lo() -> [f64; LEN] {
        std::array::from_fn(|k| DEC_LO[LEN - 1 - k])
    }

    pub fn rec_hi() -> [f64; LEN] {
        let hi = dec_hi();
        std::array::from_fn(|k| hi[LEN - 1 - k])
    }
}

/// Half-sample symmetric extension index.
fn symmetric(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let mut k = i.rem_euclid(period);
    if k >= n {
        k = period - 1 - k;
    }
    k as usize
}

/// One analysis level with symmetric extension; returns (approximation, detail).
pub fn dwt_step(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let f = db4::LEN;
    let hi = db4::dec_hi();
    let out_len = (n + f - 1) / 2;
    let mut approx = Vec::with_capacity(out_len);
    let mut detail = Vec::with_capacity(out_len);
    for o in 0..out_len {
        let base = 2 * o as isize + 1;
        let (mut a, mut d) = (0.0, 0.0);
        for j in 0..f {
            let v = x[symmetric(base - j as isize, n)];
            a += db4::DEC_LO[j] * v;
            d += hi[j] * v;
        }
        approx.push(a);
        detail.push(d);
    }
    (approx, detail)
}

/// Inverse of [`dwt_step`]; yields `2·len − 6` samples.
pub fn idwt_step(approx: &[f64], detail: &[f64]) -> Vec<f64> {
    debug_assert_eq!(approx.len(), detail.len());
    let f = db4::LEN;
    let lo = db4::rec_lo();
    let hi = db4::rec_hi();
    let nc = approx.len();
    let out_len = (2 * nc + 2).saturating_sub(f);
    (0..out_len)
        .map(|n| {
            let mut acc = 0.0;
            // filter tap k = n + f − 2 − 2o must lie in [0, f)
            let top = n + f - 2;
            let o_min = (top + 1).saturating_sub(f).div_ceil(2);
            let o_max = (top / 2).min(nc - 1);
            for o in o_min..=o_max {
                let k = top - 2 * o;
                acc += lo[k] * approx[o] + hi[k] * detail[o];
            }
            acc
        })
        .collect()
}

/// Multilevel decomposition: final approximation and details, finest first.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletCoeffs {
    pub approx: Vec<f64>,
    pub details: Vec<Vec<f64>>,
    pub len: usize,
}

pub fn wavedec(x: &[f64], levels: usize) -> WaveletCoeffs {
    let mut approx = x.to_vec();
    let mut details = Vec::with_capacity(levels);
    for _ in 0..levels {
        let (a, d) = dwt_step(&approx);
        details.push(d);
        approx = a;
    }
    WaveletCoeffs {
        approx,
        details,
        len: x.len(),
    }
}

pub fn waverec(coeffs: &WaveletCoeffs) -> Vec<f64> {
    let mut approx = coeffs.approx.clone();
    for detail in coeffs.details.iter().rev() {
        if approx.len() == detail.len() + 1 {
            approx.pop();
        }
        approx = idwt_step(&approx, detail);
    }
    approx.truncate(coeffs.len);
    approx
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdRule {
    Fixed(f64),
    /// `σ̂·√(2 ln N)` with `σ̂ = median(|d₁|) / 0.6745` from the finest details.
    Universal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DwtConfig {
    pub levels: usize,
    pub threshold: ThresholdRule,
}

impl Default for DwtConfig {
    fn default() -> Self {
        Self {
            levels: 4,
            threshold: ThresholdRule::Universal,
        }
    }
}

/// Deepest decomposition allowed for a series of length `n`
/// (`n ≥ 2^levels · filter length`).
pub fn max_levels(n: usize) -> usize {
    let mut levels = 0;
    while n >= (1usize << (levels + 1)) * db4::LEN {
        levels += 1;
    }
    levels
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

pub fn universal_threshold(finest_detail: &[f64], n: usize) -> f64 {
    let mut mags: Vec<f64> = finest_detail.iter().map(|d| d.abs()).collect();
    let sigma = median(&mut mags) / 0.6745;
    sigma * (2.0 * (n as f64).ln()).sqrt()
}

/// Hard-threshold wavelet denoising of a scalar series.
pub fn dwt_denoise(x: &[f64], cfg: &DwtConfig) -> Result<Vec<f64>> {
    if cfg.levels == 0 {
        return Err(Error::invalid("DWT needs at least one level"));
    }
    if cfg.levels > max_levels(x.len()) {
        return Err(Error::invalid(format!(
            "series of {} samples too short for {} db4 levels (max {})",
            x.len(),
            cfg.levels,
            max_levels(x.len())
        )));
    }
    let mut coeffs = wavedec(x, cfg.levels);
    let threshold = match cfg.threshold {
        ThresholdRule::Fixed(t) if t.is_finite() && t >= 0.0 => t,
        ThresholdRule::Fixed(t) => return Err(Error::invalid(format!("bad threshold {t}"))),
        ThresholdRule::Universal => universal_threshold(&coeffs.details[0], x.len()),
    };
    for detail in &mut coeffs.details {
        for c in detail.iter_mut() {
            if c.abs() < threshold {
                *c = 0.0;
            }
        }
    }
    Ok(waverec(&coeffs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MovingAverage {
    pub window: usize,
}

impl Denoiser for MovingAverage {
    fn name(&self) -> &str {
        "MA"
    }

    fn denoise(&self, window: &[Triad]) -> Result<Vec<Triad>> {
        per_axis(window, |x| moving_average(x, self.window.min(x.len())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavitzkyGolay {
    pub filter: SgFilter,
}

impl SavitzkyGolay {
    pub fn new(window_len: usize, poly_degree: usize) -> Result<Self> {
        Ok(Self {
            filter: SgFilter::new(window_len, poly_degree)?,
        })
    }
}

impl Denoiser for SavitzkyGolay {
    fn name(&self) -> &str {
        "SG"
    }

    fn denoise(&self, window: &[Triad]) -> Result<Vec<Triad>> {
        per_axis(window, |x| self.filter.apply(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dwt {
    pub config: DwtConfig,
}

impl Denoiser for Dwt {
    fn name(&self) -> &str {
        "DWT"
    }

    fn denoise(&self, window: &[Triad]) -> Result<Vec<Triad>> {
        per_axis(window, |x| dwt_denoise(x, &self.config))
    }
}
