use num_complex::Complex64;

use super::{check_alpha, output_len, restore_carrier};
use crate::error::{Error, Result};
use crate::waveform::{generate_lfm_baseband, unit_phasor, LfmParams, SampledSignal};

/// Multiplies sample `k` by `exp(i2π·shift·k/fs)`.
pub fn frequency_convert(signal: &SampledSignal, shift: f64) -> Result<SampledSignal> {
    signal.require_non_empty()?;
    let fs = signal.sample_rate();
    if !shift.is_finite() || shift.abs() >= 0.5 * fs {
        return Err(Error::Nyquist(format!(
            "shift of {shift} Hz needs |shift| < fs/2 = {} Hz",
            0.5 * fs
        )));
    }
    if shift == 0.0 {
        return Ok(signal.clone());
    }
    let step = shift / fs;
    let out = signal
        .samples()
        .iter()
        .enumerate()
        .map(|(k, v)| v * unit_phasor(step * k as f64))
        .collect();
    Ok(signal.with_samples(out))
}

/// Two-point linear interpolation to `S(α·t)`.
pub fn resample_linear(signal: &SampledSignal, alpha: f64) -> Result<SampledSignal> {
    check_alpha(alpha)?;
    signal.require_non_empty()?;
    if alpha == 1.0 {
        return Ok(signal.clone());
    }
    let x = signal.samples();
    let zero = Complex64::new(0.0, 0.0);
    let mut out: Vec<Complex64> = (0..output_len(x.len(), alpha)?)
        .map(|n| {
            let p = n as f64 * alpha;
            let i = p.floor() as usize;
            let fr = p - i as f64;
            let a = x.get(i).copied().unwrap_or(zero);
            let b = x.get(i + 1).copied().unwrap_or(zero);
            a * (1.0 - fr) + b * fr
        })
        .collect();
    restore_carrier(&mut out, alpha, signal.sample_rate(), signal.carrier_frequency());
    Ok(signal.with_samples(out))
}

/// Regenerates the chirp as it reads after dilation: `α·f0`, `α·B`, `T/α`.
pub fn resample_lfm_analytic(
    params: &LfmParams,
    alpha: f64,
    sample_rate: f64,
) -> Result<SampledSignal> {
    resample_lfm_analytic_baseband(params, alpha, sample_rate, 0.0)
}

pub fn resample_lfm_analytic_baseband(
    params: &LfmParams,
    alpha: f64,
    sample_rate: f64,
    carrier_frequency: f64,
) -> Result<SampledSignal> {
    check_alpha(alpha)?;
    params.validate()?;
    generate_lfm_baseband(&params.dilated(alpha), sample_rate, carrier_frequency)
}
