//! LFM-specific predistortion: transmit a chirp whose instantaneous
//! frequency law, after two-way passage through the ionosphere, arrives as a
//! clean linear sweep.
//!
//! A frequency `f` transmitted at time `t` arrives `2K₂/(c·f²)` later. Asking
//! the arrival to follow `f0 + B·t'/T` (with the sweep anchored so that `f0`
//! leaves at `t = 0`) gives the cubic
//!
//! ```text
//! f³ − X·f² − D = 0,   X = f0 + B·t/T − 2K₂B/(c·f0²·T),   D = 2K₂B/(c·T)
//! ```
//!
//! solved here in closed form. The pseudo-Chebyshev alternative replaces the
//! exact law by the quadratic that interpolates it at the chirp centre and
//! at the two Chebyshev nodes `±a = ±√3/2` of the band.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::IonosphereModel;
use crate::error::{Error, Result};
use crate::waveform::{check_band, unit_phasor, LfmParams, SampledSignal};

/// Half-spacing of the outer Chebyshev nodes, cos(π/6).
pub const CHEBYSHEV_NODE: f64 = 0.866_025_403_784_438_6;

/// Node offsets smaller than this fraction of the pulse width are degenerate.
const DEGENERATE_FRACTION: f64 = 1e-9;

/// Relative imaginary part below which a Cardano branch counts as real.
const REAL_ROOT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChebyshevVariant {
    /// Node offsets scaled by the two-way factor 2K₂/c.
    Corrected,
    /// Node offsets scaled by 4K₂/c, as first published.
    Original,
}

impl ChebyshevVariant {
    fn factor(self) -> f64 {
        match self {
            ChebyshevVariant::Corrected => 2.0,
            ChebyshevVariant::Original => 4.0,
        }
    }
}

/// Quadratic frequency law `f(t) = fc + (μ0+Δμ)(t−t_c) + γ(t−t_c)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevCoeffs {
    /// B/T, Hz/s.
    pub mu0: f64,
    /// Slope correction, Hz/s.
    pub delta_mu: f64,
    /// Curvature, Hz/s².
    pub gamma: f64,
    /// Offsets of the lower node, centre and upper node transmit times, s.
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub a: f64,
    /// Transmit time of the band centre, s.
    pub center_time: f64,
    /// f0 + B/2, Hz.
    pub center_frequency: f64,
    pub variant: ChebyshevVariant,
}

impl ChebyshevCoeffs {
    pub fn slope(&self) -> f64 {
        self.mu0 + self.delta_mu
    }

    pub fn frequency_at(&self, t: f64) -> f64 {
        let u = t - self.center_time;
        self.center_frequency + self.slope() * u + self.gamma * u * u
    }

    /// Exact integral of [`Self::frequency_at`] from 0 to `t`, in cycles.
    pub fn phase_cycles(&self, t: f64) -> f64 {
        let tc = self.center_time;
        self.center_frequency * t
            + 0.5 * self.slope() * t * (t - 2.0 * tc)
            + self.gamma * t * (t * t - 3.0 * t * tc + 3.0 * tc * tc) / 3.0
    }
}

pub fn chebyshev_coeffs(
    params: &LfmParams,
    model: &IonosphereModel,
    variant: ChebyshevVariant,
) -> Result<ChebyshevCoeffs> {
    params.validate()?;
    let a = CHEBYSHEV_NODE;
    let (f0, b, t) = (params.f0, params.bandwidth, params.pulse_width);
    let kc = variant.factor() * model.delay_coefficient();
    let fc = f0 + 0.5 * b;
    let flo = f0 + 0.5 * b * (1.0 - a);
    let fhi = f0 + 0.5 * b * (1.0 + a);
    let inv2 = |f: f64| 1.0 / (f * f);
    let t1 = -0.5 * a * t + kc * (inv2(fc) - inv2(flo));
    let t3 = 0.5 * a * t + kc * (inv2(fc) - inv2(fhi));
    let t2 = kc * (2.0 * inv2(fc) - inv2(flo) - inv2(fhi));
    let denom = t1 * t3 * (t3 - t1);
    // A node whose transmit time collapses onto the centre (or onto the other
    // node) leaves the interpolating quadratic undefined.
    let tiny = DEGENERATE_FRACTION * t;
    if t1.abs() <= tiny || t3.abs() <= tiny || (t3 - t1).abs() <= tiny || !denom.is_finite() {
        return Err(Error::DegenerateCoefficients(format!(
            "T1 = {t1:e} s, T3 = {t3:e} s give a zero interpolation denominator"
        )));
    }
    let half_span = 0.5 * a * b;
    let slope = -half_span * (t1 * t1 + t3 * t3) / denom;
    let gamma = half_span * t2 / denom;
    let mu0 = params.chirp_rate();
    Ok(ChebyshevCoeffs {
        mu0,
        delta_mu: slope - mu0,
        gamma,
        t1,
        t2,
        t3,
        a,
        center_time: 0.5 * t + kc * (inv2(f0) - inv2(fc)),
        center_frequency: fc,
        variant,
    })
}

fn cubic_terms(t: f64, params: &LfmParams, model: &IonosphereModel) -> (f64, f64) {
    let d = 2.0 * model.delay_coefficient() * params.chirp_rate();
    let x = params.instantaneous_frequency(t) - d / (params.f0 * params.f0);
    (x, d)
}

/// All three Cardano roots of the predistortion cubic at time `t`.
pub fn cubic_roots(t: f64, params: &LfmParams, model: &IonosphereModel) -> [Complex64; 3] {
    let (x, d) = cubic_terms(t, params, model);
    let chi = Complex64::new(x * x, 0.0);
    let psi = Complex64::new(-2.0 * x * x * x - 27.0 * d, 0.0);
    let disc = (psi * psi - 4.0 * chi * chi * chi).sqrt();
    // Either sign of the square root spans the same root set; the larger
    // sum avoids cancellation.
    let s = if (psi + disc).norm() >= (psi - disc).norm() {
        psi + disc
    } else {
        psi - disc
    };
    let omega = (0.5 * s).cbrt();
    let rot = Complex64::from_polar(1.0, std::f64::consts::TAU / 3.0);
    let mut roots = [Complex64::new(x, 0.0); 3];
    if omega.norm() == 0.0 {
        return roots;
    }
    let mut w = omega;
    for r in roots.iter_mut() {
        *r = (x - w - chi / w) / 3.0;
        w *= rot;
    }
    roots
}

fn select_root(t: f64, params: &LfmParams, model: &IonosphereModel) -> Result<f64> {
    let (x, d) = cubic_terms(t, params, model);
    if d == 0.0 {
        return Ok(x);
    }
    let target = params.instantaneous_frequency(t);
    let roots = cubic_roots(t, params, model);
    let best = roots
        .iter()
        .filter(|r| r.im.abs() <= REAL_ROOT_TOLERANCE * r.norm())
        .min_by(|p, q| {
            (p.re - target)
                .abs()
                .total_cmp(&(q.re - target).abs())
        });
    let Some(root) = best else {
        let imag = roots.iter().map(|r| r.im.abs()).fold(f64::INFINITY, f64::min);
        return Err(Error::NoRealRoot { t, imag });
    };
    // One Newton step on the real axis removes the Cardano round-off.
    let f = root.re;
    let g = f * f * (f - x) - d;
    let dg = f * (3.0 * f - 2.0 * x);
    let f = if dg != 0.0 { f - g / dg } else { f };
    if !(f.is_finite() && f > 0.0) {
        return Err(Error::NoRealRoot { t, imag: 0.0 });
    }
    Ok(f)
}

/// Transmit frequency at time `t` that arrives on the undistorted sweep.
pub fn predistort_frequency_cubic(
    t: f64,
    params: &LfmParams,
    model: &IonosphereModel,
) -> Result<f64> {
    params.validate()?;
    if !(0.0..=params.pulse_width).contains(&t) {
        return Err(Error::invalid(
            "t",
            format!("{t} s lies outside the pulse [0, {}] s", params.pulse_width),
        ));
    }
    select_root(t, params, model)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PredistortionMethod {
    /// Exact cubic frequency law, phase by trapezoidal integration.
    CubicTrapezoid,
    ChebyshevCorrected,
    ChebyshevOriginal,
}

/// Generates a predistorted chirp at absolute frequencies (carrier 0).
pub fn predistort_lfm(
    params: &LfmParams,
    model: &IonosphereModel,
    sample_rate: f64,
    method: PredistortionMethod,
) -> Result<SampledSignal> {
    params.validate()?;
    if !(sample_rate.is_finite() && sample_rate > 0.0) {
        return Err(Error::invalid("sample_rate", "must be positive and finite"));
    }
    let n = params.sample_count(sample_rate);
    if n == 0 {
        return Err(Error::invalid("pulse_width", "pulse is shorter than half a sample"));
    }
    let time = |k: usize| k as f64 / sample_rate;
    let samples: Vec<Complex64> = match method {
        PredistortionMethod::CubicTrapezoid => {
            let freqs = (0..n)
                .map(|k| select_root(time(k), params, model))
                .collect::<Result<Vec<f64>>>()?;
            let (lo, hi) = min_max(&freqs);
            check_band(lo, hi, sample_rate, 0.0)?;
            // Integrate only the departure from the linear sweep; it is small,
            // so the running sum keeps full precision over many cycles.
            let mut dev = 0.0;
            let mut prev = 0.0;
            freqs
                .iter()
                .enumerate()
                .map(|(k, &f)| {
                    let t = time(k);
                    let excess = f - params.instantaneous_frequency(t);
                    if k > 0 {
                        dev += 0.5 * (prev + excess) / sample_rate;
                    }
                    prev = excess;
                    unit_phasor(params.phase_cycles(t) + dev)
                })
                .collect()
        }
        PredistortionMethod::ChebyshevCorrected | PredistortionMethod::ChebyshevOriginal => {
            let variant = if method == PredistortionMethod::ChebyshevCorrected {
                ChebyshevVariant::Corrected
            } else {
                ChebyshevVariant::Original
            };
            let c = chebyshev_coeffs(params, model, variant)?;
            let last = time(n - 1);
            let (lo, hi) = min_max(&[c.frequency_at(0.0), c.frequency_at(last)]);
            check_band(lo, hi, sample_rate, 0.0)?;
            (0..n).map(|k| unit_phasor(c.phase_cycles(time(k)))).collect()
        }
    };
    Ok(SampledSignal::from_parts(samples, sample_rate, 0.0))
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}
