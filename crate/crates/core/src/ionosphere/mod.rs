//! Cold-plasma ionospheric group delay and its FFT-domain application and
//! removal for arbitrary waveforms.
//!
//! The delay at frequency `f` is `τ(f) = K₂/(c·f²)` with
//! `K₂ = q_e²·E/(8π²·m_e·ε₀)` and `E` the total electron content. Because the
//! phase of a delayed bin is `2π·f·τ(f) = 2π·K₂/(c·f)`, the whole dispersive
//! channel is a single per-bin phase screen.

mod predistort;

pub use predistort::{
    chebyshev_coeffs, cubic_roots, predistort_frequency_cubic, predistort_lfm, ChebyshevCoeffs,
    ChebyshevVariant, PredistortionMethod,
};

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, OffendingBin, Result};
use crate::fft;
use crate::waveform::{unit_phasor, SampledSignal};

/// Physical constants (CODATA 2018, SI).
pub mod constants {
    pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
    pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
    pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
    pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
    /// Electrons per square metre in one TEC unit.
    pub const TECU: f64 = 1e16;
}

use constants::*;

/// Signals whose bins mapped to `f ≤ 0` hold more than this fraction of the
/// total energy are rejected: the phase screen is undefined there and those
/// bins pass through unadjusted.
pub const NON_POSITIVE_ENERGY_THRESHOLD_DB: f64 = -50.0;

/// Offending bins reported in a rejection, strongest first.
const REPORTED_BINS: usize = 16;

/// `K₂ / E`, the delay constant per electron/m². About 40.31 m³/s².
pub fn plasma_constant_per_tec() -> f64 {
    ELEMENTARY_CHARGE * ELEMENTARY_CHARGE
        / (8.0 * PI * PI * ELECTRON_MASS * VACUUM_PERMITTIVITY)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IonosphereModel {
    tec: f64,
    k2: f64,
}

impl IonosphereModel {
    /// Model from TEC in electrons/m².
    pub fn from_tec(tec: f64) -> Result<Self> {
        if !(tec.is_finite() && tec >= 0.0) {
            return Err(Error::invalid(
                "tec",
                format!("must be finite and non-negative, got {tec}"),
            ));
        }
        Ok(Self {
            tec,
            k2: tec * plasma_constant_per_tec(),
        })
    }

    /// Model from TEC in TECU.
    pub fn from_tecu(tecu: f64) -> Result<Self> {
        Self::from_tec(tecu * TECU)
    }

    pub fn none() -> Self {
        Self { tec: 0.0, k2: 0.0 }
    }

    pub fn tec(&self) -> f64 {
        self.tec
    }

    pub fn tecu(&self) -> f64 {
        self.tec / TECU
    }

    pub fn k2(&self) -> f64 {
        self.k2
    }

    /// `K₂/c` in s·Hz², the coefficient of `f⁻²` in the one-way delay.
    pub fn delay_coefficient(&self) -> f64 {
        self.k2 / SPEED_OF_LIGHT
    }
}

/// Number of traversals of the ionosphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Propagation {
    OneWay,
    TwoWay,
}

impl Propagation {
    pub fn passes(self) -> u32 {
        match self {
            Propagation::OneWay => 1,
            Propagation::TwoWay => 2,
        }
    }

    pub fn from_passes(passes: u32) -> Result<Self> {
        match passes {
            1 => Ok(Propagation::OneWay),
            2 => Ok(Propagation::TwoWay),
            n => Err(Error::invalid("passes", format!("must be 1 or 2, got {n}"))),
        }
    }
}

/// One-way group delay in seconds.
pub fn group_delay(frequency: f64, model: &IonosphereModel) -> Result<f64> {
    if !(frequency.is_finite() && frequency > 0.0) {
        return Err(Error::invalid(
            "frequency",
            format!("group delay is undefined at {frequency} Hz"),
        ));
    }
    Ok(model.delay_coefficient() / (frequency * frequency))
}

/// Absolute frequency of each FFT bin of `signal`.
pub fn bin_frequencies(len: usize, sample_rate: f64, carrier_frequency: f64) -> Vec<f64> {
    (0..len)
        .map(|k| carrier_frequency + fft::fftfreq(k, len, sample_rate))
        .collect()
}

/// Per-bin phase factors that delay every positive-frequency bin by
/// `passes·τ(f)`. Bins at or below 0 Hz are left at unity.
pub fn phase_screen(
    len: usize,
    sample_rate: f64,
    carrier_frequency: f64,
    model: &IonosphereModel,
    propagation: Propagation,
) -> Vec<Complex64> {
    let coeff = propagation.passes() as f64 * model.delay_coefficient();
    bin_frequencies(len, sample_rate, carrier_frequency)
        .into_iter()
        .map(|f| {
            if f > 0.0 && coeff != 0.0 {
                unit_phasor(coeff / f)
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
        .collect()
}

/// Rejects spectra whose non-positive-frequency bins carry significant energy.
pub(crate) fn check_positive_band(
    spectrum: &[Complex64],
    sample_rate: f64,
    carrier_frequency: f64,
) -> Result<()> {
    let n = spectrum.len();
    let total: f64 = spectrum.iter().map(|x| x.norm_sqr()).sum();
    if total == 0.0 {
        return Ok(());
    }
    let mut bins: Vec<(usize, f64, f64)> = spectrum
        .iter()
        .enumerate()
        .filter_map(|(k, x)| {
            let f = carrier_frequency + fft::fftfreq(k, n, sample_rate);
            (f <= 0.0 && x.norm_sqr() > 0.0).then(|| (k, f, x.norm_sqr()))
        })
        .collect();
    let bad: f64 = bins.iter().map(|b| b.2).sum();
    let level_db = 10.0 * (bad / total).log10();
    if bad == 0.0 || level_db <= NON_POSITIVE_ENERGY_THRESHOLD_DB {
        return Ok(());
    }
    bins.sort_by(|a, b| b.2.total_cmp(&a.2));
    Err(Error::NonPositiveFrequencyEnergy {
        threshold_db: NON_POSITIVE_ENERGY_THRESHOLD_DB,
        level_db,
        bins: bins
            .into_iter()
            .take(REPORTED_BINS)
            .map(|(index, frequency_hz, p)| OffendingBin {
                index,
                frequency_hz,
                level_db: 10.0 * (p / total).log10(),
            })
            .collect(),
    })
}

fn dispersive(
    signal: &SampledSignal,
    model: &IonosphereModel,
    propagation: Propagation,
    conjugate: bool,
) -> Result<SampledSignal> {
    signal.require_non_empty()?;
    let mut buf = signal.samples().to_vec();
    fft::forward(&mut buf);
    check_positive_band(&buf, signal.sample_rate(), signal.carrier_frequency())?;
    let screen = phase_screen(
        buf.len(),
        signal.sample_rate(),
        signal.carrier_frequency(),
        model,
        propagation,
    );
    for (x, p) in buf.iter_mut().zip(&screen) {
        *x *= if conjugate { p.conj() } else { *p };
    }
    fft::inverse(&mut buf);
    Ok(signal.with_samples(buf))
}

/// Imposes the dispersive ionospheric delay on `signal`.
///
/// The delay is applied circularly over the record length, so pulses should
/// sit in a receive window with room for the longest delay.
pub fn apply_ionosphere(
    signal: &SampledSignal,
    model: &IonosphereModel,
    propagation: Propagation,
) -> Result<SampledSignal> {
    dispersive(signal, model, propagation, false)
}

/// Removes the dispersive delay imposed by [`apply_ionosphere`].
pub fn correct_ionosphere(
    signal: &SampledSignal,
    model: &IonosphereModel,
    propagation: Propagation,
) -> Result<SampledSignal> {
    dispersive(signal, model, propagation, true)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::TAU;

    use super::*;
    use crate::waveform::generate_tone;

    const K2_PER_TEC: f64 = 40.308_193_022_001_69;

    #[test]
    fn plasma_constant_matches_reference() {
        let k = plasma_constant_per_tec();
        assert!((k - K2_PER_TEC).abs() / K2_PER_TEC < 1e-14);
        assert!((k - 40.31).abs() / 40.31 < 1e-3);
        let m = IonosphereModel::from_tecu(100.0).unwrap();
        assert!((m.k2() / m.tec() - k).abs() < 1e-12);
        assert_eq!(IonosphereModel::from_tec(0.0).unwrap().k2(), 0.0);
        assert!(IonosphereModel::from_tec(-1.0).is_err());
    }

    #[test]
    fn group_delay_values() {
        let m = IonosphereModel::from_tec(1e18).unwrap();
        let tau = group_delay(413e6, &m).unwrap();
        assert!((tau - 7.882_655_074_753_595e-7).abs() / tau < 1e-12);
        let r = group_delay(826e6, &m).unwrap() / tau;
        assert!((r - 0.25).abs() < 1e-15);
        assert_eq!(group_delay(1e6, &IonosphereModel::none()).unwrap(), 0.0);
        assert!(group_delay(0.0, &m).is_err());
        assert!(group_delay(-5.0, &m).is_err());
    }

    #[test]
    fn zero_tec_is_identity() {
        let s = generate_tone(100e6, 1e-6, 2.048e9).unwrap();
        let out = apply_ionosphere(&s, &IonosphereModel::none(), Propagation::TwoWay).unwrap();
        for (a, b) in s.samples().iter().zip(out.samples()) {
            assert!((a - b).norm() < 1e-5);
        }
    }

    #[test]
    fn tone_takes_constant_phase() {
        // A bin-centred tone only sees the phase of its own bin.
        let fs = 2.048e9;
        let s = generate_tone(100e6, 1e-6, fs).unwrap();
        let m = IonosphereModel::from_tecu(100.0).unwrap();
        let out = apply_ionosphere(&s, &m, Propagation::TwoWay).unwrap();
        let phase = 2.0 * m.delay_coefficient() / 100e6;
        let rot = Complex64::from_polar(1.0, TAU * phase.fract());
        for (a, b) in s.samples().iter().zip(out.samples()) {
            assert!((a * rot - b).norm() < 1e-9);
        }
    }

    fn envelope_centroid(x: &[Complex64]) -> f64 {
        let (num, den) = x
            .iter()
            .enumerate()
            .fold((0.0, 0.0), |(n, d), (k, v)| {
                (n + k as f64 * v.norm_sqr(), d + v.norm_sqr())
            });
        num / den
    }

    fn gaussian_pulse(fs: f64, n: usize, f: f64, centre: f64, width: f64) -> SampledSignal {
        let samples = (0..n)
            .map(|k| {
                let t = k as f64 / fs;
                let env = (-((t - centre) / width).powi(2)).exp();
                Complex64::from_polar(env, TAU * (f * t).fract())
            })
            .collect();
        SampledSignal::new(samples, fs, 0.0).unwrap()
    }

    #[test]
    fn envelope_is_delayed_by_group_delay() {
        let fs = 1e9;
        let n = 1 << 14;
        let m = IonosphereModel::from_tecu(50.0).unwrap();
        let f = 300e6;
        let s = gaussian_pulse(fs, n, f, 4e-6, 0.2e-6);
        let out = apply_ionosphere(&s, &m, Propagation::TwoWay).unwrap();
        let shift = (envelope_centroid(out.samples()) - envelope_centroid(s.samples())) / fs;
        let want = 2.0 * group_delay(f, &m).unwrap();
        assert!((shift - want).abs() / want < 1e-2, "shift {shift} want {want}");
    }

    #[test]
    fn low_frequencies_are_delayed_more() {
        let fs = 1e9;
        let n = 1 << 14;
        let m = IonosphereModel::from_tecu(50.0).unwrap();
        let lo = gaussian_pulse(fs, n, 150e6, 4e-6, 0.2e-6);
        let hi = gaussian_pulse(fs, n, 400e6, 4e-6, 0.2e-6);
        let probe: Vec<Complex64> = lo
            .samples()
            .iter()
            .zip(hi.samples())
            .map(|(a, b)| a + b)
            .collect();
        let probe = SampledSignal::new(probe, fs, 0.0).unwrap();
        let out = apply_ionosphere(&probe, &m, Propagation::OneWay).unwrap();
        // Separate the two components again by band-splitting the spectrum.
        let mut spectrum = out.samples().to_vec();
        fft::forward(&mut spectrum);
        let split = |keep_low: bool| {
            let mut b: Vec<Complex64> = spectrum
                .iter()
                .enumerate()
                .map(|(k, &v)| {
                    let f = fft::fftfreq(k, n, fs);
                    if (f < 275e6) == keep_low { v } else { Complex64::new(0.0, 0.0) }
                })
                .collect();
            fft::inverse(&mut b);
            envelope_centroid(&b)
        };
        assert!(split(true) > split(false) + 1.0);
    }

    #[test]
    fn round_trip_and_energy() {
        let s = gaussian_pulse(1e9, 4096, 200e6, 2e-6, 0.3e-6);
        let m = IonosphereModel::from_tecu(30.0).unwrap();
        let d = apply_ionosphere(&s, &m, Propagation::TwoWay).unwrap();
        assert!((d.energy() - s.energy()).abs() / s.energy() < 1e-4);
        let back = correct_ionosphere(&d, &m, Propagation::TwoWay).unwrap();
        for (a, b) in s.samples().iter().zip(back.samples()) {
            assert!((a - b).norm() < 1e-4);
        }
    }

    #[test]
    fn rejects_energy_at_non_positive_frequencies() {
        // Tone at -100 MHz relative to 0 Hz carrier.
        let s = generate_tone(-100e6, 1e-6, 1e9).unwrap();
        let m = IonosphereModel::from_tecu(10.0).unwrap();
        match apply_ionosphere(&s, &m, Propagation::OneWay) {
            Err(Error::NonPositiveFrequencyEnergy { bins, .. }) => {
                assert!(!bins.is_empty());
                assert!(bins.iter().all(|b| b.frequency_hz <= 0.0));
            }
            other => panic!("expected rejection, got {other:?}"),
        }
        // The same samples described relative to a 400 MHz carrier are fine.
        let shifted =
            SampledSignal::new(s.samples().to_vec(), s.sample_rate(), 400e6).unwrap();
        assert!(apply_ionosphere(&shifted, &m, Propagation::OneWay).is_ok());
    }

    #[test]
    fn propagation_passes() {
        assert_eq!(Propagation::from_passes(2).unwrap(), Propagation::TwoWay);
        assert!(Propagation::from_passes(3).is_err());
    }
}
