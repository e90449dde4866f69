//! Whittaker–Shannon resampling.
//!
//! Output `n` is `Σ_k x[k]·sinc(n·α − k)`. The windowed form keeps only the
//! `W` taps centred on the nearest input index `round(n·α)`; the exact form
//! sums over every input sample.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{check_alpha, output_len, restore_carrier, Execution, ResampleStrategy};
use crate::error::{Error, Result};
use crate::waveform::SampledSignal;

/// Table nodes per unit of sinc argument.
pub const DEFAULT_LUT_DENSITY: usize = 100;

/// Output indices per tile in the tiled schedules.
const TILE: usize = 2048;

/// Normalized sinc, `sin(πx)/(πx)`, exactly 0 at nonzero integers.
#[inline]
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else if x.fract() == 0.0 {
        0.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

/// sinc sampled at `k/density` for `k/density ∈ [0, half_width + 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SincLut {
    density: usize,
    spacing: f64,
    window_half_width: usize,
    values: Vec<f64>,
}

impl SincLut {
    pub fn new(density: usize, window_half_width: usize) -> Result<Self> {
        if density == 0 {
            return Err(Error::invalid("density", "must be at least 1"));
        }
        let count = (window_half_width + 1) * density + 1;
        let values = (0..count).map(|k| sinc(Self::node_at(k, density))).collect();
        Ok(Self {
            density,
            spacing: 1.0 / density as f64,
            window_half_width,
            values,
        })
    }

    /// Table sized for a `window_size`-tap window.
    pub fn for_window(density: usize, window_size: usize) -> Result<Self> {
        Self::new(density, window_size / 2)
    }

    fn node_at(k: usize, density: usize) -> f64 {
        k as f64 / density as f64
    }

    /// Argument of table entry `k`.
    pub fn node(&self, k: usize) -> f64 {
        Self::node_at(k, self.density)
    }

    pub fn density(&self) -> usize {
        self.density
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn window_half_width(&self) -> usize {
        self.window_half_width
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Nearest-node lookup; sinc is even so only `|x|` is tabulated.
    #[inline]
    pub fn lookup(&self, x: f64) -> f64 {
        let idx = (x.abs() * self.density as f64).round() as usize;
        self.values.get(idx).copied().unwrap_or(0.0)
    }
}

struct Kernel<'a> {
    x: &'a [Complex64],
    alpha: f64,
    half: isize,
}

impl Kernel<'_> {
    /// Sum for output `n`, reading input `k` from `local[k - base]`.
    #[inline]
    fn eval(&self, n: usize, local: &[Complex64], base: isize, weight: impl Fn(f64) -> f64) -> Complex64 {
        let p = n as f64 * self.alpha;
        let c = p.round_ties_even() as isize;
        let len = self.x.len() as isize;
        let lo = (c - self.half).max(0);
        let hi = (c + self.half).min(len - 1);
        let mut acc = Complex64::new(0.0, 0.0);
        for k in lo..=hi {
            acc += local[(k - base) as usize] * weight(p - k as f64);
        }
        acc
    }

    /// Clamped input span read by outputs `first..=last`.
    fn span(&self, first: usize, last: usize) -> (isize, isize) {
        let len = self.x.len() as isize;
        let lo = ((first as f64 * self.alpha).round_ties_even() as isize - self.half).clamp(0, len - 1);
        let hi = ((last as f64 * self.alpha).round_ties_even() as isize + self.half).clamp(0, len - 1);
        (lo, hi)
    }
}

fn run_schedule(
    out: &mut [Complex64],
    kernel: &Kernel<'_>,
    execution: Execution,
    weight: impl Fn(f64) -> f64 + Sync,
) {
    let x = kernel.x;
    match execution {
        Execution::Serial => {
            for (n, o) in out.iter_mut().enumerate() {
                *o = kernel.eval(n, x, 0, &weight);
            }
        }
        Execution::ParallelNaive | Execution::ParallelLut => {
            out.par_iter_mut()
                .enumerate()
                .for_each(|(n, o)| *o = kernel.eval(n, x, 0, &weight));
        }
        Execution::ParallelTiled | Execution::ParallelLutTiled => {
            out.par_chunks_mut(TILE).enumerate().for_each(|(t, chunk)| {
                let first = t * TILE;
                let last = first + chunk.len() - 1;
                let (lo, hi) = kernel.span(first, last);
                let local: Vec<Complex64> = x[lo as usize..=hi as usize].to_vec();
                for (i, o) in chunk.iter_mut().enumerate() {
                    *o = kernel.eval(first + i, &local, lo, &weight);
                }
            });
        }
    }
}

/// Windowed sinc resampling to `S(α·t)`.
///
/// The window may span at most `2N − 1` taps, which already reaches every
/// input sample from any centre.
pub fn resample_sinc(
    signal: &SampledSignal,
    alpha: f64,
    strategy: &ResampleStrategy,
    lut: Option<&SincLut>,
) -> Result<SampledSignal> {
    strategy.validate()?;
    check_alpha(alpha)?;
    signal.require_non_empty()?;
    let n_in = signal.len();
    let w = strategy.window_size;
    if w > 2 * n_in - 1 {
        return Err(Error::invalid(
            "window_size",
            format!("{w} taps exceed the {} a {n_in}-sample signal can use", 2 * n_in - 1),
        ));
    }
    let half = w / 2;
    let lut = match (strategy.execution.uses_lut(), lut) {
        (true, Some(l)) => {
            if l.window_half_width() < half {
                return Err(Error::invalid(
                    "lut",
                    format!(
                        "table covers half-width {} but the window needs {half}",
                        l.window_half_width()
                    ),
                ));
            }
            Some(l)
        }
        (true, None) => {
            return Err(Error::invalid(
                "lut",
                format!("{} needs a lookup table", strategy.execution),
            ))
        }
        (false, Some(_)) => {
            return Err(Error::invalid(
                "lut",
                format!("{} evaluates sinc directly and takes no table", strategy.execution),
            ))
        }
        (false, None) => None,
    };
    if alpha == 1.0 {
        return Ok(signal.clone());
    }
    let n_out = output_len(n_in, alpha)?;
    let kernel = Kernel {
        x: signal.samples(),
        alpha,
        half: half as isize,
    };
    let mut out = vec![Complex64::new(0.0, 0.0); n_out];
    match lut {
        Some(l) => run_schedule(&mut out, &kernel, strategy.execution, |d| l.lookup(d)),
        None => run_schedule(&mut out, &kernel, strategy.execution, sinc),
    }
    restore_carrier(&mut out, alpha, signal.sample_rate(), signal.carrier_frequency());
    Ok(signal.with_samples(out))
}

/// Unwindowed sinc resampling: every input sample contributes to every
/// output. `O(N²)`; meant for short signals and as a reference.
pub fn resample_sinc_exact(
    signal: &SampledSignal,
    alpha: f64,
    execution: Execution,
) -> Result<SampledSignal> {
    check_alpha(alpha)?;
    signal.require_non_empty()?;
    if alpha == 1.0 {
        return Ok(signal.clone());
    }
    let x = signal.samples();
    let n_out = output_len(x.len(), alpha)?;
    // sin(π(p−k)) = (−1)^(i0−k)·sin(π·r) with p = i0 + r, so one sine per
    // output suffices.
    let eval = |n: usize| {
        let p = n as f64 * alpha;
        let i0 = p.floor();
        let r = p - i0;
        if r == 0.0 {
            return x.get(i0 as usize).copied().unwrap_or_default();
        }
        let s = (PI * r).sin() / PI;
        let i0 = i0 as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, v) in x.iter().enumerate() {
            let sign = if (i0 - k as i64) % 2 == 0 { s } else { -s };
            acc += v * (sign / (p - k as f64));
        }
        acc
    };
    let mut out: Vec<Complex64> = if execution == Execution::Serial {
        (0..n_out).map(eval).collect()
    } else {
        (0..n_out).into_par_iter().map(eval).collect()
    };
    restore_carrier(&mut out, alpha, signal.sample_rate(), signal.carrier_frequency());
    Ok(signal.with_samples(out))
}
