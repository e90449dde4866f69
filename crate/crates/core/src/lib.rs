//! Ionospheric and Doppler dispersion correction for sampled radar signals.
//!
//! - [`waveform`]: sampled signals, chirp and tone generators.
//! - [`ionosphere`]: plasma group delay, FFT-domain distortion and
//!   correction, chirp predistortion.
//! - [`doppler`]: time-dilation model and resamplers.
//! - [`analysis`]: matched filtering and accuracy experiments.
//! - [`bench`]: timing harness.
//! - [`iqfile`]: `complex64` sample files with JSON sidecars.

pub mod analysis;
pub mod bench;
pub mod doppler;
pub mod error;
pub mod fft;
pub mod ionosphere;
pub mod iqfile;
pub mod waveform;

pub use error::{Error, Result};
pub use waveform::{generate_lfm, generate_lfm_baseband, generate_tone, LfmParams, SampledSignal};
