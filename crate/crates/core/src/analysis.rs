//! Pulse compression, SNR-loss metrics and the accuracy experiments built
//! on them.

use std::collections::HashMap;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::doppler::{
    alpha_from_velocity, fft_pq_sample_change, resample, resample_lfm_analytic_baseband,
    Execution, ResampleMethod, ResampleStrategy, SincLut,
};
use crate::error::{Error, Result};
use crate::fft;
use crate::ionosphere::{
    apply_ionosphere, chebyshev_coeffs, check_positive_band, correct_ionosphere, phase_screen,
    predistort_frequency_cubic, predistort_lfm, ChebyshevVariant, IonosphereModel,
    PredistortionMethod, Propagation,
};
use crate::ionosphere::constants::SPEED_OF_LIGHT;
use crate::waveform::{generate_lfm, generate_lfm_baseband, LfmParams, SampledSignal};

/// Matched-filter output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionResult {
    /// Cross-correlation over all lags, in FFT order.
    pub compressed: SampledSignal,
    pub peak_index: usize,
    /// Delay of `received` relative to `reference` at the peak, samples.
    pub peak_lag: i64,
    pub peak_magnitude: f64,
    /// Loss against the reference peak supplied to the filter.
    pub snr_loss_db: f64,
}

impl CompressionResult {
    /// Lag represented by `index` of `compressed`.
    pub fn lag_of(&self, index: usize, received_len: usize) -> i64 {
        lag_of(index, received_len, self.compressed.len())
    }

    /// Correlation magnitude at `lag`, zero outside the computed range.
    pub fn magnitude_at_lag(&self, lag: i64) -> f64 {
        let l = self.compressed.len() as i64;
        if lag.abs() >= l {
            return 0.0;
        }
        self.compressed.samples()[lag.rem_euclid(l) as usize].norm()
    }

    /// Writes `lag,time_s,magnitude,relative_db` for lags within `half_span`
    /// of the peak, dB relative to the reference peak.
    pub fn write_csv<W: Write>(&self, w: W, half_span: i64) -> Result<()> {
        let reference = self.peak_magnitude * 10f64.powf(self.snr_loss_db / 20.0);
        let fs = self.compressed.sample_rate();
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["lag", "time_s", "magnitude", "relative_db"])?;
        for lag in self.peak_lag - half_span..=self.peak_lag + half_span {
            let m = self.magnitude_at_lag(lag);
            out.write_record([
                lag.to_string(),
                (lag as f64 / fs).to_string(),
                m.to_string(),
                (20.0 * (m / reference).max(1e-300).log10()).to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn lag_of(index: usize, received_len: usize, len: usize) -> i64 {
    if index < received_len {
        index as i64
    } else {
        index as i64 - len as i64
    }
}

/// `20·log10(reference_peak / peak)`.
pub fn snr_loss_db(peak: f64, reference_peak: f64) -> Result<f64> {
    if !(reference_peak.is_finite() && reference_peak > 0.0) {
        return Err(Error::invalid("reference_peak", "must be positive"));
    }
    if !(peak.is_finite() && peak > 0.0) {
        return Err(Error::invalid("peak", "matched-filter peak is zero"));
    }
    Ok(20.0 * (reference_peak / peak).log10())
}

pub fn snr_loss(candidate: &CompressionResult, reference_peak: f64) -> Result<f64> {
    snr_loss_db(candidate.peak_magnitude, reference_peak)
}

fn check_pair(received: &SampledSignal, reference: &SampledSignal) -> Result<()> {
    received.require_non_empty()?;
    reference.require_non_empty()?;
    if received.sample_rate() != reference.sample_rate() {
        return Err(Error::SampleRateMismatch {
            received: received.sample_rate(),
            reference: reference.sample_rate(),
        });
    }
    if received.carrier_frequency() != reference.carrier_frequency() {
        return Err(Error::invalid(
            "carrier_frequency",
            format!(
                "received at {} Hz but reference at {} Hz",
                received.carrier_frequency(),
                reference.carrier_frequency()
            ),
        ));
    }
    Ok(())
}

fn padded_spectrum(x: &[Complex64], len: usize) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    buf[..x.len()].copy_from_slice(x);
    fft::forward(&mut buf);
    buf
}

fn correlate(
    received: &SampledSignal,
    reference: &SampledSignal,
    reference_peak: f64,
    correction: Option<(&IonosphereModel, Propagation)>,
) -> Result<CompressionResult> {
    check_pair(received, reference)?;
    let n_rx = received.len();
    let len = (n_rx + reference.len() - 1).next_power_of_two();
    let mut rx = padded_spectrum(received.samples(), len);
    let refs = padded_spectrum(reference.samples(), len);
    if let Some((model, propagation)) = correction {
        check_positive_band(&rx, received.sample_rate(), received.carrier_frequency())?;
        let screen = phase_screen(
            len,
            received.sample_rate(),
            received.carrier_frequency(),
            model,
            propagation,
        );
        for ((x, r), s) in rx.iter_mut().zip(&refs).zip(&screen) {
            *x *= r.conj() * s.conj();
        }
    } else {
        for (x, r) in rx.iter_mut().zip(&refs) {
            *x *= r.conj();
        }
    }
    fft::inverse(&mut rx);
    let (peak_index, peak_magnitude) = rx
        .iter()
        .enumerate()
        .map(|(k, v)| (k, v.norm()))
        .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    Ok(CompressionResult {
        compressed: SampledSignal::from_parts(rx, received.sample_rate(), 0.0),
        peak_index,
        peak_lag: lag_of(peak_index, n_rx, len),
        peak_magnitude,
        snr_loss_db: snr_loss_db(peak_magnitude, reference_peak)?,
    })
}

/// Cross-correlates `received` with `reference`; the loss is measured
/// against the reference's own autocorrelation peak, `Σ|ref|²`.
pub fn matched_filter(received: &SampledSignal, reference: &SampledSignal) -> Result<CompressionResult> {
    matched_filter_against(received, reference, reference.energy())
}

/// As [`matched_filter`] with an explicit ideal peak for the loss.
pub fn matched_filter_against(
    received: &SampledSignal,
    reference: &SampledSignal,
    reference_peak: f64,
) -> Result<CompressionResult> {
    correlate(received, reference, reference_peak, None)
}

/// Pulse compression with the ionospheric correction folded into the same
/// spectral product, so the corrected signal is never materialized.
pub fn matched_filter_with_ionosphere_correction(
    received: &SampledSignal,
    reference: &SampledSignal,
    model: &IonosphereModel,
    propagation: Propagation,
) -> Result<CompressionResult> {
    correlate(received, reference, reference.energy(), Some((model, propagation)))
}

// ---------------------------------------------------------------------------
// Doppler accuracy sweep

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DopplerLossRow {
    pub velocity_mps: f64,
    pub method: ResampleMethod,
    pub execution: Execution,
    pub window_size: usize,
    pub loss_db: f64,
}

/// Loss of each correction method against a dilated chirp echo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DopplerSweep {
    pub params: LfmParams,
    pub sample_rate: f64,
    /// Carrier of the sampled representation; 0 for absolute frequencies.
    pub carrier_frequency: f64,
    /// Nodes per unit argument for table-driven sinc strategies.
    pub lut_density: usize,
}

impl DopplerSweep {
    pub fn pristine(&self) -> Result<SampledSignal> {
        generate_lfm_baseband(&self.params, self.sample_rate, self.carrier_frequency)
    }

    /// Echo from a target at `velocity` (m/s), simulated analytically.
    pub fn echo(&self, velocity: f64) -> Result<SampledSignal> {
        let alpha = alpha_from_velocity(velocity)?;
        resample_lfm_analytic_baseband(&self.params, alpha, self.sample_rate, self.carrier_frequency)
    }

    /// Velocity at which correcting the echo with FFT P/Q changes its length
    /// by exactly `samples`.
    pub fn fft_pq_velocity(&self, samples: i64) -> Result<f64> {
        let n = self.params.sample_count(self.sample_rate) as f64;
        let d = samples as f64;
        if d.abs() >= n {
            return Err(Error::invalid("samples", "must be smaller than the pulse length"));
        }
        // α = N/(N−D) leaves N−D echo samples, and N−D samples resampled by
        // 1/α grow back by exactly D.
        Ok(SPEED_OF_LIGHT * d / (2.0 * n - d))
    }

    fn luts(&self, strategies: &[ResampleStrategy]) -> Result<HashMap<usize, SincLut>> {
        let mut out = HashMap::new();
        for s in strategies {
            if s.method == ResampleMethod::SincWindowed && s.execution.uses_lut() {
                if let std::collections::hash_map::Entry::Vacant(e) = out.entry(s.window_size) {
                    e.insert(SincLut::for_window(self.lut_density, s.window_size)?);
                }
            }
        }
        Ok(out)
    }

    fn correct(
        &self,
        echo: &SampledSignal,
        alpha: f64,
        strategy: &ResampleStrategy,
        luts: &HashMap<usize, SincLut>,
    ) -> Result<SampledSignal> {
        let undo = 1.0 / alpha;
        if strategy.method == ResampleMethod::AnalyticLfm {
            return resample_lfm_analytic_baseband(
                &self.params.dilated(alpha),
                undo,
                self.sample_rate,
                self.carrier_frequency,
            );
        }
        let lut = if strategy.method == ResampleMethod::SincWindowed && strategy.execution.uses_lut() {
            luts.get(&strategy.window_size)
        } else {
            None
        };
        let center = alpha * self.params.center_frequency();
        resample(echo, undo, strategy, lut, center)
    }

    /// Loss of one method at one velocity.
    pub fn loss(&self, velocity: f64, strategy: &ResampleStrategy) -> Result<f64> {
        let rows = self.run(&[velocity], std::slice::from_ref(strategy))?;
        Ok(rows[0].loss_db)
    }

    /// Every (velocity, strategy) cell, ordered velocity-major.
    pub fn run(&self, velocities: &[f64], strategies: &[ResampleStrategy]) -> Result<Vec<DopplerLossRow>> {
        if velocities.is_empty() || strategies.is_empty() {
            return Err(Error::invalid("velocities", "sweep needs at least one velocity and one method"));
        }
        for s in strategies {
            s.validate()?;
        }
        let pristine = self.pristine()?;
        let ideal = pristine.energy();
        let luts = self.luts(strategies)?;
        let rows: Vec<Vec<DopplerLossRow>> = velocities
            .par_iter()
            .map(|&v| {
                let alpha = alpha_from_velocity(v)?;
                let echo = self.echo(v)?;
                strategies
                    .iter()
                    .map(|s| {
                        let corrected = self.correct(&echo, alpha, s, &luts)?;
                        let mf = matched_filter_against(&corrected, &pristine, ideal)?;
                        Ok(DopplerLossRow {
                            velocity_mps: v,
                            method: s.method,
                            execution: s.execution,
                            window_size: s.window_size,
                            loss_db: mf.snr_loss_db,
                        })
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        Ok(rows.into_iter().flatten().collect())
    }

    /// Sample change FFT P/Q applies when correcting the echo at `velocity`.
    pub fn fft_pq_change_at(&self, velocity: f64) -> Result<i64> {
        let alpha = alpha_from_velocity(velocity)?;
        let n = self.params.dilated(alpha).sample_count(self.sample_rate);
        Ok(fft_pq_sample_change(n, 1.0 / alpha))
    }
}

pub fn write_doppler_csv<W: Write>(w: W, rows: &[DopplerLossRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["velocity_mps", "method", "execution", "loss_db"])?;
    for r in rows {
        out.write_record([
            r.velocity_mps.to_string(),
            r.method.name().to_owned(),
            r.execution.name().to_owned(),
            r.loss_db.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Pseudo-Chebyshev residuals

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub t_s: f64,
    pub residual_corrected_hz: f64,
    pub residual_original_hz: f64,
}

/// `|f_chebyshev(t) − f_cubic(t)|` for both coefficient variants.
pub fn chebyshev_residual_sweep(
    params: &LfmParams,
    model: &IonosphereModel,
    times: &[f64],
) -> Result<Vec<ResidualRow>> {
    let cor = chebyshev_coeffs(params, model, ChebyshevVariant::Corrected)?;
    let ori = chebyshev_coeffs(params, model, ChebyshevVariant::Original)?;
    times
        .iter()
        .map(|&t| {
            let truth = predistort_frequency_cubic(t, params, model)?;
            Ok(ResidualRow {
                t_s: t,
                residual_corrected_hz: (cor.frequency_at(t) - truth).abs(),
                residual_original_hz: (ori.frequency_at(t) - truth).abs(),
            })
        })
        .collect()
}

pub fn write_residual_csv<W: Write>(w: W, rows: &[ResidualRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t_s", "residual_corrected_hz", "residual_original_hz"])?;
    for r in rows {
        out.write_record([
            r.t_s.to_string(),
            r.residual_corrected_hz.to_string(),
            r.residual_original_hz.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Loss of a predistorted chirp correlated against the cubic predistortion.
pub fn predistortion_loss_vs_cubic(
    params: &LfmParams,
    model: &IonosphereModel,
    sample_rate: f64,
    method: PredistortionMethod,
) -> Result<f64> {
    let truth = predistort_lfm(params, model, sample_rate, PredistortionMethod::CubicTrapezoid)?;
    let candidate = predistort_lfm(params, model, sample_rate, method)?;
    Ok(matched_filter(&candidate, &truth)?.snr_loss_db)
}

// ---------------------------------------------------------------------------
// FFT correction against predistortion

/// Chirp in a receive window, compared four ways against the cubic truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IonosphereComparison {
    pub params: LfmParams,
    pub sample_rate: f64,
    pub model: IonosphereModel,
    pub propagation: Propagation,
    /// Samples in the receive window.
    pub window_len: usize,
    /// Start of the pulse inside the window; must exceed the largest advance
    /// the FFT predistortion applies.
    pub offset: usize,
}

pub const TRACE_LABELS: [&str; 4] = ["LFM", "POLY", "FFT", "CUBIC"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IonosphereComparisonResult {
    /// Transmit-side waveforms correlated with the cubic truth, in
    /// [`TRACE_LABELS`] order: undistorted chirp, corrected pseudo-Chebyshev,
    /// FFT-method predistortion and the cubic itself.
    pub traces: Vec<CompressionResult>,
    /// Losses of the traces against the cubic autocorrelation peak.
    pub trace_losses_db: [f64; 4],
    /// FFT correction of the FFT-distorted chirp against the pristine chirp.
    pub fft_round_trip_db: f64,
    /// Received-side losses against the pristine chirp after two-way
    /// propagation (FFT entry is the corrected echo).
    pub received_losses_db: [f64; 4],
}

impl IonosphereComparisonResult {
    pub fn loss(&self, label: &str) -> Option<f64> {
        TRACE_LABELS
            .iter()
            .position(|l| *l == label)
            .map(|i| self.trace_losses_db[i])
    }

    /// Writes correlation magnitude in dB relative to the cubic
    /// autocorrelation peak for lags within `half_span` of zero.
    pub fn write_traces_csv<W: Write>(&self, w: W, half_span: i64, sample_rate: f64) -> Result<()> {
        let norm = self.traces[3].peak_magnitude / 10f64.powf(-self.trace_losses_db[3] / 20.0);
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["lag", "time_s", "lfm_db", "poly_db", "fft_db", "cubic_db"])?;
        for lag in -half_span..=half_span {
            let mut rec = vec![lag.to_string(), (lag as f64 / sample_rate).to_string()];
            for t in &self.traces {
                let m = t.magnitude_at_lag(lag) / norm;
                rec.push((20.0 * m.max(1e-300).log10()).to_string());
            }
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }
}

impl IonosphereComparison {
    /// Chirp and ionosphere of the reference comparison: 413 MHz start,
    /// 18 MHz sweep, 100 µs pulse, 2.048 GHz sampling, 100 TECU, two-way,
    /// in a 2^19-sample window.
    pub fn reference() -> Result<Self> {
        Ok(Self {
            params: LfmParams::new(413e6, 18e6, 100e-6)?,
            sample_rate: 2.048e9,
            model: IonosphereModel::from_tecu(100.0)?,
            propagation: Propagation::TwoWay,
            window_len: 1 << 19,
            offset: 1 << 13,
        })
    }

    pub fn run(&self) -> Result<IonosphereComparisonResult> {
        let p = &self.params;
        let fs = self.sample_rate;
        let place = |s: SampledSignal| s.embed(self.window_len, self.offset);
        let lfm = generate_lfm(p, fs)?;
        let poly = predistort_lfm(p, &self.model, fs, PredistortionMethod::ChebyshevCorrected)?;
        let cubic = predistort_lfm(p, &self.model, fs, PredistortionMethod::CubicTrapezoid)?;
        let lfm_w = place(lfm.clone())?;
        let poly_w = place(poly)?;
        let cubic_w = place(cubic.clone())?;
        let fft_pre = correct_ionosphere(&lfm_w, &self.model, self.propagation)?;

        let truth_peak = cubic.energy();
        let traces = [&lfm_w, &poly_w, &fft_pre, &cubic_w]
            .par_iter()
            .map(|s| matched_filter_against(s, &cubic, truth_peak))
            .collect::<Result<Vec<_>>>()?;
        let mut trace_losses_db = [0.0; 4];
        for (l, t) in trace_losses_db.iter_mut().zip(&traces) {
            *l = t.snr_loss_db;
        }

        let ideal = lfm.energy();
        let received = [&lfm_w, &poly_w, &lfm_w, &cubic_w]
            .par_iter()
            .enumerate()
            .map(|(i, s)| {
                let mut rx = apply_ionosphere(s, &self.model, self.propagation)?;
                if i == 2 {
                    rx = correct_ionosphere(&rx, &self.model, self.propagation)?;
                }
                Ok(matched_filter_against(&rx, &lfm, ideal)?.snr_loss_db)
            })
            .collect::<Result<Vec<f64>>>()?;
        let received_losses_db = [received[0], received[1], received[2], received[3]];
        Ok(IonosphereComparisonResult {
            traces,
            trace_losses_db,
            fft_round_trip_db: received_losses_db[2],
            received_losses_db,
        })
    }
}
