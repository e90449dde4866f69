//! Sampled complex signals and the two waveform generators the rest of the
//! crate is tested against: linear FM chirps and pure tones.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniformly sampled complex I/Q record.
///
/// `carrier_frequency` is the absolute RF frequency represented by 0 Hz in
/// the samples. It is zero when the samples encode absolute frequencies
/// directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSignal {
    samples: Vec<Complex64>,
    sample_rate: f64,
    carrier_frequency: f64,
}

impl SampledSignal {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64, carrier_frequency: f64) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::invalid(
                "sample_rate",
                format!("must be positive and finite, got {sample_rate}"),
            ));
        }
        if !carrier_frequency.is_finite() {
            return Err(Error::invalid("carrier_frequency", "must be finite"));
        }
        if let Some(k) = samples.iter().position(|s| !(s.re.is_finite() && s.im.is_finite())) {
            return Err(Error::invalid(
                "samples",
                format!("sample {k} is not finite"),
            ));
        }
        Ok(Self {
            samples,
            sample_rate,
            carrier_frequency,
        })
    }

    /// Builds a signal that shares rate and carrier with `self`.
    pub(crate) fn with_samples(&self, samples: Vec<Complex64>) -> Self {
        Self {
            samples,
            sample_rate: self.sample_rate,
            carrier_frequency: self.carrier_frequency,
        }
    }

    pub(crate) fn from_parts(samples: Vec<Complex64>, sample_rate: f64, carrier_frequency: f64) -> Self {
        debug_assert!(sample_rate > 0.0);
        Self {
            samples,
            sample_rate,
            carrier_frequency,
        }
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn carrier_frequency(&self) -> f64 {
        self.carrier_frequency
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    /// Sum of squared magnitudes.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }

    pub(crate) fn require_non_empty(&self) -> Result<()> {
        if self.samples.is_empty() {
            Err(Error::EmptySignal)
        } else {
            Ok(())
        }
    }

    /// Places the signal at `offset` inside a zero-filled window of `len`
    /// samples, e.g. a pulse inside its receive window.
    pub fn embed(&self, len: usize, offset: usize) -> Result<Self> {
        if offset + self.samples.len() > len {
            return Err(Error::invalid(
                "len",
                format!(
                    "window of {len} samples cannot hold {} samples at offset {offset}",
                    self.samples.len()
                ),
            ));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); len];
        out[offset..offset + self.samples.len()].copy_from_slice(&self.samples);
        Ok(self.with_samples(out))
    }
}

/// Linear FM chirp description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LfmParams {
    /// Start frequency, Hz.
    pub f0: f64,
    /// Swept bandwidth, Hz. Negative values describe a down-chirp.
    pub bandwidth: f64,
    /// Pulse width, s.
    pub pulse_width: f64,
}

impl LfmParams {
    pub fn new(f0: f64, bandwidth: f64, pulse_width: f64) -> Result<Self> {
        let p = Self {
            f0,
            bandwidth,
            pulse_width,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f0.is_finite() && self.f0 > 0.0) {
            return Err(Error::invalid("f0", format!("must be positive, got {}", self.f0)));
        }
        if !(self.pulse_width.is_finite() && self.pulse_width > 0.0) {
            return Err(Error::invalid(
                "pulse_width",
                format!("must be positive, got {}", self.pulse_width),
            ));
        }
        if !self.bandwidth.is_finite() || self.f0 + self.bandwidth <= 0.0 {
            return Err(Error::invalid(
                "bandwidth",
                "chirp must not reach or cross 0 Hz",
            ));
        }
        Ok(())
    }

    pub fn stop_frequency(&self) -> f64 {
        self.f0 + self.bandwidth
    }

    pub fn center_frequency(&self) -> f64 {
        self.f0 + 0.5 * self.bandwidth
    }

    /// Chirp rate B/T in Hz/s.
    pub fn chirp_rate(&self) -> f64 {
        self.bandwidth / self.pulse_width
    }

    /// Number of samples at `sample_rate`: round(T·fs), ties to even.
    pub fn sample_count(&self, sample_rate: f64) -> usize {
        (self.pulse_width * sample_rate).round_ties_even() as usize
    }

    pub fn instantaneous_frequency(&self, t: f64) -> f64 {
        self.f0 + self.bandwidth * t / self.pulse_width
    }

    /// Phase in cycles, f0·t + B·t²/(2T).
    pub fn phase_cycles(&self, t: f64) -> f64 {
        self.f0 * t + self.bandwidth / (2.0 * self.pulse_width) * t * t
    }

    /// Same chirp observed through the time dilation S(αt).
    pub fn dilated(&self, alpha: f64) -> Self {
        Self {
            f0: alpha * self.f0,
            bandwidth: alpha * self.bandwidth,
            pulse_width: self.pulse_width / alpha,
        }
    }
}

/// `exp(i·2π·cycles)` with the integer part of `cycles` removed first, which
/// keeps full precision for phases of many thousands of cycles.
#[inline]
pub(crate) fn unit_phasor(cycles: f64) -> Complex64 {
    let frac = cycles - cycles.floor();
    Complex64::from_polar(1.0, TAU * frac)
}

pub(crate) fn check_band(
    lo: f64,
    hi: f64,
    sample_rate: f64,
    carrier_frequency: f64,
) -> Result<()> {
    let (lo, hi) = (lo.min(hi), lo.max(hi));
    let half = 0.5 * sample_rate;
    if carrier_frequency == 0.0 {
        if lo <= 0.0 || hi > half {
            return Err(Error::Nyquist(format!(
                "band [{lo:.6e}, {hi:.6e}] Hz needs 0 < f <= fs/2 = {half:.6e} Hz"
            )));
        }
    } else if lo - carrier_frequency <= -half || hi - carrier_frequency >= half {
        return Err(Error::Nyquist(format!(
            "band [{lo:.6e}, {hi:.6e}] Hz does not fit in carrier {carrier_frequency:.6e} Hz ± fs/2 = {half:.6e} Hz"
        )));
    }
    Ok(())
}

fn check_rate(sample_rate: f64) -> Result<()> {
    if sample_rate.is_finite() && sample_rate > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            "sample_rate",
            format!("must be positive and finite, got {sample_rate}"),
        ))
    }
}

/// Unit-amplitude LFM encoded at absolute frequencies (carrier 0).
pub fn generate_lfm(params: &LfmParams, sample_rate: f64) -> Result<SampledSignal> {
    generate_lfm_baseband(params, sample_rate, 0.0)
}

/// Unit-amplitude LFM represented relative to `carrier_frequency`.
pub fn generate_lfm_baseband(
    params: &LfmParams,
    sample_rate: f64,
    carrier_frequency: f64,
) -> Result<SampledSignal> {
    params.validate()?;
    check_rate(sample_rate)?;
    check_band(
        params.f0,
        params.stop_frequency(),
        sample_rate,
        carrier_frequency,
    )?;
    let n = params.sample_count(sample_rate);
    if n == 0 {
        return Err(Error::invalid(
            "pulse_width",
            "pulse is shorter than half a sample",
        ));
    }
    // The offset start frequency is formed once so the large absolute
    // phase never has to be cancelled against the carrier sample by sample.
    let offset = params.f0 - carrier_frequency;
    let half_rate = params.bandwidth / (2.0 * params.pulse_width);
    let samples = (0..n)
        .map(|k| {
            let t = k as f64 / sample_rate;
            unit_phasor(offset * t + half_rate * t * t)
        })
        .collect();
    Ok(SampledSignal::from_parts(samples, sample_rate, carrier_frequency))
}

/// Unit-amplitude complex tone of round(duration·fs) samples.
pub fn generate_tone(frequency: f64, duration: f64, sample_rate: f64) -> Result<SampledSignal> {
    check_rate(sample_rate)?;
    if !frequency.is_finite() || frequency.abs() >= 0.5 * sample_rate {
        return Err(Error::Nyquist(format!(
            "tone at {frequency} Hz needs |f| < fs/2 = {} Hz",
            0.5 * sample_rate
        )));
    }
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::invalid("duration", "must be positive"));
    }
    let n = (duration * sample_rate).round_ties_even() as usize;
    if n == 0 {
        return Err(Error::invalid("duration", "shorter than half a sample"));
    }
    let samples = (0..n)
        .map(|k| unit_phasor(frequency * k as f64 / sample_rate))
        .collect();
    Ok(SampledSignal::from_parts(samples, sample_rate, 0.0))
}
