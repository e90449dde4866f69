//! Doppler time dilation and the resamplers that undo it.
//!
//! A target closing at range rate `v` returns `S(α·t)` with
//! `α = (1 + v/c)/(1 − v/c)`. Every resampler here maps an input to
//! `S(α·t)` on the same sample grid, so correcting an echo means resampling
//! it by `1/α`.
//!
//! Signals carried relative to a nonzero carrier are dilated as the absolute
//! RF signal they represent: after the envelope is interpolated, the output
//! is rotated by `exp(i2π·carrier·(α−1)·n/fs)` so the carrier scales too.

mod fft_pq;
mod simple;
mod sinc;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use fft_pq::{fft_pq_sample_change, resample_fft_pq};
pub use simple::{
    frequency_convert, resample_lfm_analytic, resample_lfm_analytic_baseband, resample_linear,
};
pub use sinc::{resample_sinc, resample_sinc_exact, sinc, SincLut, DEFAULT_LUT_DENSITY};

use crate::error::{Error, Result};
use crate::ionosphere::constants::SPEED_OF_LIGHT;
use crate::waveform::{unit_phasor, SampledSignal};

/// Exact two-way dilation factor for range rate `v` (m/s, positive closing).
pub fn alpha_from_velocity(range_rate: f64) -> Result<f64> {
    if !range_rate.is_finite() || range_rate.abs() >= SPEED_OF_LIGHT {
        return Err(Error::invalid(
            "range_rate",
            format!("|v| must be below c, got {range_rate} m/s"),
        ));
    }
    Ok((SPEED_OF_LIGHT + range_rate) / (SPEED_OF_LIGHT - range_rate))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DopplerParams {
    pub range_rate: f64,
    pub alpha: f64,
}

impl DopplerParams {
    pub fn from_range_rate(range_rate: f64) -> Result<Self> {
        Ok(Self {
            range_rate,
            alpha: alpha_from_velocity(range_rate)?,
        })
    }

    /// Factor that undoes the dilation.
    pub fn correction_alpha(&self) -> f64 {
        1.0 / self.alpha
    }
}

macro_rules! named_enum {
    ($ty:ident { $($var:ident => $name:literal),+ $(,)? }) => {
        impl $ty {
            pub const ALL: &'static [$ty] = &[$($ty::$var),+];

            pub fn name(self) -> &'static str {
                match self { $($ty::$var => $name),+ }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($ty::$var),)+
                    _ => Err(Error::invalid(
                        stringify!($ty),
                        format!("unknown value `{s}`"),
                    )),
                }
            }
        }
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResampleMethod {
    SincWindowed,
    SincExact,
    FftPq,
    FftPqWithTone,
    FrequencyConversion,
    Linear,
    AnalyticLfm,
}

named_enum!(ResampleMethod {
    SincWindowed => "sinc_windowed",
    SincExact => "sinc_exact",
    FftPq => "fft_pq",
    FftPqWithTone => "fft_pq_with_tone",
    FrequencyConversion => "frequency_conversion",
    Linear => "linear",
    AnalyticLfm => "analytic_lfm",
});

/// Schedule for the windowed sinc sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    /// One thread, reference order.
    Serial,
    /// One task per output index, sinc evaluated directly.
    ParallelNaive,
    /// Output tiles that first copy their input span locally.
    ParallelTiled,
    /// One task per output index, sinc from a lookup table.
    ParallelLut,
    /// Tiled and table-driven.
    ParallelLutTiled,
}

named_enum!(Execution {
    Serial => "serial",
    ParallelNaive => "parallel_naive",
    ParallelTiled => "parallel_tiled",
    ParallelLut => "parallel_lut",
    ParallelLutTiled => "parallel_lut_tiled",
});

impl Execution {
    pub fn uses_lut(self) -> bool {
        matches!(self, Execution::ParallelLut | Execution::ParallelLutTiled)
    }

    pub fn is_tiled(self) -> bool {
        matches!(self, Execution::ParallelTiled | Execution::ParallelLutTiled)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResampleStrategy {
    pub method: ResampleMethod,
    pub execution: Execution,
    /// Odd number of taps for the windowed sinc.
    pub window_size: usize,
}

impl ResampleStrategy {
    pub fn new(method: ResampleMethod, execution: Execution, window_size: usize) -> Result<Self> {
        let s = Self {
            method,
            execution,
            window_size,
        };
        s.validate()?;
        Ok(s)
    }

    /// Strategy for a method that has no window or schedule.
    pub fn simple(method: ResampleMethod) -> Self {
        Self {
            method,
            execution: Execution::Serial,
            window_size: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.method == ResampleMethod::SincWindowed
            && (self.window_size < 3 || self.window_size % 2 == 0)
        {
            return Err(Error::invalid(
                "window_size",
                format!("must be odd and at least 3, got {}", self.window_size),
            ));
        }
        Ok(())
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            "alpha",
            format!("must be positive and finite, got {alpha}"),
        ))
    }
}

/// floor(N/α), rejecting an empty result.
pub(crate) fn output_len(n: usize, alpha: f64) -> Result<usize> {
    let m = (n as f64 / alpha).floor();
    if m < 1.0 {
        return Err(Error::invalid(
            "alpha",
            format!("dilating {n} samples by {alpha} leaves no output"),
        ));
    }
    Ok(m as usize)
}

/// Scales the carrier along with the envelope (see module docs).
pub(crate) fn restore_carrier(samples: &mut [Complex64], alpha: f64, sample_rate: f64, carrier: f64) {
    if carrier == 0.0 || alpha == 1.0 {
        return;
    }
    let step = carrier * (alpha - 1.0) / sample_rate;
    for (n, s) in samples.iter_mut().enumerate() {
        *s *= unit_phasor(step * n as f64);
    }
}

/// Applies `S(t) → S(α·t)` with a sample-domain method.
///
/// `center_frequency` is the absolute frequency used by the tone-based
/// methods (`frequency_conversion`, `fft_pq_with_tone`); the windowed sinc
/// needs `lut` exactly when its execution is table-driven.
pub fn resample(
    signal: &SampledSignal,
    alpha: f64,
    strategy: &ResampleStrategy,
    lut: Option<&SincLut>,
    center_frequency: f64,
) -> Result<SampledSignal> {
    strategy.validate()?;
    match strategy.method {
        ResampleMethod::SincWindowed => resample_sinc(signal, alpha, strategy, lut),
        ResampleMethod::SincExact => resample_sinc_exact(signal, alpha, strategy.execution),
        ResampleMethod::FftPq => resample_fft_pq(signal, alpha, false, center_frequency),
        ResampleMethod::FftPqWithTone => resample_fft_pq(signal, alpha, true, center_frequency),
        ResampleMethod::FrequencyConversion => {
            check_alpha(alpha)?;
            frequency_convert(signal, center_frequency * (alpha - 1.0))
        }
        ResampleMethod::Linear => resample_linear(signal, alpha),
        ResampleMethod::AnalyticLfm => Err(Error::invalid(
            "method",
            "analytic_lfm regenerates a chirp from its parameters and cannot resample samples",
        )),
    }
}
