//! FFT P/Q resampling: change the record length in the frequency domain by
//! adding or removing bins at ±fs/2, then inverse-transform at the new
//! length. Only even length changes are used so the spectrum stays
//! symmetric, which makes the method exact at even sample changes and
//! quantizes the dilation everywhere else.

use num_complex::Complex64;

use super::simple::frequency_convert;
use super::{check_alpha, restore_carrier};
use crate::error::{Error, Result};
use crate::fft;
use crate::waveform::SampledSignal;

/// Tolerance for treating `N/α − N` as an integer.
const INTEGER_SNAP: f64 = 1e-9;

/// Even number of samples added (positive) or removed (negative) when
/// resampling `n` samples by `alpha`.
pub fn fft_pq_sample_change(n: usize, alpha: f64) -> i64 {
    let d = n as f64 / alpha - n as f64;
    let d = if (d - d.round()).abs() <= INTEGER_SNAP {
        d.round()
    } else {
        d
    };
    // f64::round breaks ties away from zero.
    2 * (0.5 * d).round() as i64
}

/// Resamples to approximately `S(α·t)`.
///
/// With `with_tone`, the dilation lost to even rounding is made up by a
/// frequency shift evaluated at `center_frequency`.
pub fn resample_fft_pq(
    signal: &SampledSignal,
    alpha: f64,
    with_tone: bool,
    center_frequency: f64,
) -> Result<SampledSignal> {
    check_alpha(alpha)?;
    signal.require_non_empty()?;
    let n = signal.len();
    let change = fft_pq_sample_change(n, alpha);
    let new_n = n as i64 + change;
    if new_n < 2 {
        return Err(Error::invalid(
            "alpha",
            format!("resampling {n} samples by {alpha} leaves {new_n}"),
        ));
    }
    let new_n = new_n as usize;
    let actual = n as f64 / new_n as f64;

    let out = if change == 0 {
        signal.clone()
    } else {
        let mut spectrum = signal.samples().to_vec();
        fft::forward(&mut spectrum);
        let mut resized = vec![Complex64::new(0.0, 0.0); new_n];
        let keep_low = if new_n > n { n.div_ceil(2) } else { new_n.div_ceil(2) };
        let keep_high = n.min(new_n) - keep_low;
        resized[..keep_low].copy_from_slice(&spectrum[..keep_low]);
        resized[new_n - keep_high..].copy_from_slice(&spectrum[n - keep_high..]);
        fft::inverse(&mut resized);
        let scale = new_n as f64 / n as f64;
        for v in resized.iter_mut() {
            *v *= scale;
        }
        restore_carrier(&mut resized, actual, signal.sample_rate(), signal.carrier_frequency());
        signal.with_samples(resized)
    };
    if with_tone {
        frequency_convert(&out, center_frequency * (alpha - actual))
    } else {
        Ok(out)
    }
}
