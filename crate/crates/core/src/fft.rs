//! Shared FFT plumbing.
//!
//! Plans are cached in one process-wide planner so that repeated transforms
//! of the same length (sweeps, timing trials) do not pay planning cost again.
//! Forward transforms use the `e^{-i2πft}` kernel and are unnormalized; the
//! inverse divides by the length.

use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

pub(crate) fn forward_plan(len: usize) -> Arc<dyn Fft<f64>> {
    planner()
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .plan_fft_forward(len)
}

pub(crate) fn inverse_plan(len: usize) -> Arc<dyn Fft<f64>> {
    planner()
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .plan_fft_inverse(len)
}

/// In-place forward FFT.
pub fn forward(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    forward_plan(buf.len()).process(buf);
}

/// In-place inverse FFT, normalized so that `inverse(forward(x)) == x`.
pub fn inverse(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    inverse_plan(buf.len()).process(buf);
    let scale = 1.0 / buf.len() as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

/// Frequency offset of bin `k` in an `n`-point FFT sampled at `sample_rate`.
///
/// Bins below `n/2` are non-negative; the rest wrap to negative offsets.
pub fn fftfreq(k: usize, n: usize, sample_rate: f64) -> f64 {
    let df = sample_rate / n as f64;
    if k < n.div_ceil(2) {
        k as f64 * df
    } else {
        (k as f64 - n as f64) * df
    }
}
