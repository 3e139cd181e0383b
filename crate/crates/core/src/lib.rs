//! Denoising benchmark for stationary accelerometer recordings.
//!
//! The crate synthesizes paired noisy / reference accelerometer recordings
//! under a configurable error model ([`sim`]), loads recorded field data
//! ([`ingest`]), and denoises them with classical filters ([`sp`]), a kNN
//! regressor ([`knn`]) and recurrent networks written from scratch ([`nn`]).
//! Every method is scored by reconstruction metrics ([`metrics`]) and by the
//! roll/pitch accuracy of stationary coarse alignment ([`sca`]).
//!
//! [`bench`] wires these pieces into the end-to-end benchmark that the
//! `accel-denoise` binary ([`cli`]) exposes.

pub mod bench;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod ingest;
pub mod knn;
pub mod metrics;
pub mod nn;
pub mod sca;
pub mod sim;
pub mod sp;

pub use error::{Error, Result};

/// One 3-axis specific-force sample, m/s².
pub type Triad = [f64; 3];

/// A noisy window and its reference window, equally long.
pub type WindowPair = (Vec<Triad>, Vec<Triad>);

/// Maps a noisy window of 3-axis samples to a denoised window of equal length.
pub trait Denoiser: Send + Sync {
    /// Row label used in reports.
    fn name(&self) -> &str;

    fn denoise(&self, window: &[Triad]) -> Result<Vec<Triad>>;
}

/// Passes the input through unchanged.
#[derive(Debug, Clone, Default)]
pub struct Identity;

impl Denoiser for Identity {
    fn name(&self) -> &str {
        "Identity"
    }

    fn denoise(&self, window: &[Triad]) -> Result<Vec<Triad>> {
        Ok(window.to_vec())
    }
}

/// Applies a scalar filter to each axis independently.
pub(crate) fn per_axis<F>(window: &[Triad], mut filter: F) -> Result<Vec<Triad>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let mut out = vec![[0.0; 3]; window.len()];
    for axis in 0..3 {
        let column: Vec<f64> = window.iter().map(|s| s[axis]).collect();
        for (dst, v) in out.iter_mut().zip(filter(&column)?) {
            dst[axis] = v;
        }
    }
    Ok(out)
}
