//! Timing harness: repeated trials of a prepared operation, summary
//! statistics, size-scaling fits and the FFT P/Q velocity study.
//!
//! Inputs are built before the clock starts and outputs are dropped after it
//! stops, so only the operation itself is timed.

use std::collections::BTreeMap;
use std::fmt;
use std::hint::black_box;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::matched_filter_with_ionosphere_correction;
use crate::doppler::{
    alpha_from_velocity, fft_pq_sample_change, frequency_convert, resample_fft_pq, resample_linear,
    resample_sinc, Execution, ResampleMethod, ResampleStrategy, SincLut,
};
use crate::error::{Error, Result};
use crate::fft;
use crate::ionosphere::{correct_ionosphere, phase_screen, IonosphereModel, Propagation};
use crate::waveform::SampledSignal;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub trials: usize,
    /// Input samples processed per trial.
    pub samples_per_run: usize,
    /// Trial durations in seconds, in execution order.
    pub durations: Vec<f64>,
    pub mean: f64,
    pub median: f64,
    pub p99: f64,
    pub min: f64,
    pub max: f64,
    /// samples_per_run / mean, samples per second.
    pub throughput: f64,
}

/// Serializable headline numbers of a [`TimingReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingSummary {
    pub trials: usize,
    pub samples_per_run: usize,
    pub mean_s: f64,
    pub median_s: f64,
    pub p99_s: f64,
    pub min_s: f64,
    pub max_s: f64,
    pub throughput_sps: f64,
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    // Nearest rank.
    let rank = (q * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

fn median_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

impl TimingReport {
    pub fn from_durations(durations: Vec<f64>, samples_per_run: usize) -> Result<Self> {
        if durations.is_empty() {
            return Err(Error::invalid("trials", "need at least one trial"));
        }
        if durations.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::invalid("durations", "all durations must be positive"));
        }
        let mut sorted = durations.clone();
        sorted.sort_by(f64::total_cmp);
        let mean = durations.iter().sum::<f64>() / durations.len() as f64;
        // Keep the mean inside [min, max] despite summation round-off.
        let mean = mean.clamp(sorted[0], sorted[sorted.len() - 1]);
        Ok(Self {
            trials: durations.len(),
            samples_per_run,
            mean,
            median: median_sorted(&sorted),
            p99: quantile_sorted(&sorted, 0.99),
            min: sorted[0],
            max: sorted[sorted.len() - 1],
            throughput: samples_per_run as f64 / mean,
            durations,
        })
    }

    pub fn summary(&self) -> TimingSummary {
        TimingSummary {
            trials: self.trials,
            samples_per_run: self.samples_per_run,
            mean_s: self.mean,
            median_s: self.median,
            p99_s: self.p99,
            min_s: self.min,
            max_s: self.max,
            throughput_sps: self.throughput,
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["trial", "duration_ns"])?;
        for (i, d) in self.durations.iter().enumerate() {
            out.write_record([i.to_string(), format!("{:.0}", d * 1e9)])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_summary_json<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut w, &self.summary())?;
        w.write_all(b"\n")?;
        Ok(())
    }
}

fn elapsed_seconds(start: Instant) -> f64 {
    // A zero reading only means the clock is coarser than the operation.
    start.elapsed().as_secs_f64().max(1e-9)
}

/// Runs `warmup` unmeasured and `trials` measured calls of `op`, each on a
/// fresh input from `prepare`.
pub fn time_operation<I, O>(
    trials: usize,
    warmup: usize,
    samples_per_run: usize,
    mut prepare: impl FnMut() -> Result<I>,
    mut op: impl FnMut(I) -> Result<O>,
) -> Result<TimingReport> {
    if trials == 0 {
        return Err(Error::invalid("trials", "must be at least 1"));
    }
    for _ in 0..warmup {
        let input = prepare()?;
        black_box(op(input)?);
    }
    let mut durations = Vec::with_capacity(trials);
    for _ in 0..trials {
        let input = prepare()?;
        let start = Instant::now();
        let out = op(black_box(input))?;
        durations.push(elapsed_seconds(start));
        drop(black_box(out));
    }
    TimingReport::from_durations(durations, samples_per_run)
}

/// Operations the harness knows how to set up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchOperation {
    /// Buffer copy, the memory-traffic floor.
    Copy,
    /// FFT, phase screen, inverse FFT.
    IonosphereCorrect,
    /// Phase-screen multiply on a precomputed spectrum only.
    IonospherePhase,
    /// Pulse compression with the correction fused in.
    IonosphereCompress,
    SincWindowed,
    FftPq,
    Linear,
    FrequencyConversion,
}

impl BenchOperation {
    pub const ALL: &'static [BenchOperation] = &[
        BenchOperation::Copy,
        BenchOperation::IonosphereCorrect,
        BenchOperation::IonospherePhase,
        BenchOperation::IonosphereCompress,
        BenchOperation::SincWindowed,
        BenchOperation::FftPq,
        BenchOperation::Linear,
        BenchOperation::FrequencyConversion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BenchOperation::Copy => "copy",
            BenchOperation::IonosphereCorrect => "iono_correct",
            BenchOperation::IonospherePhase => "iono_phase",
            BenchOperation::IonosphereCompress => "iono_compress",
            BenchOperation::SincWindowed => "sinc_windowed",
            BenchOperation::FftPq => "fft_pq",
            BenchOperation::Linear => "linear",
            BenchOperation::FrequencyConversion => "frequency_conversion",
        }
    }
}

impl fmt::Display for BenchOperation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchOperation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BenchOperation::ALL
            .iter()
            .copied()
            .find(|op| op.name() == s)
            .ok_or_else(|| Error::invalid("operation", format!("unknown operation `{s}`")))
    }
}

/// Fixed inputs shared by every operation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub model: IonosphereModel,
    pub propagation: Propagation,
    /// Dilation applied by the resampling operations.
    pub alpha: f64,
    /// Absolute frequency for tone-based resamplers.
    pub center_frequency: f64,
    pub execution: Execution,
    pub window_size: usize,
    pub lut_density: usize,
}

/// Times `op` on `signal` under `config`.
pub fn bench_operation(
    op: BenchOperation,
    signal: &SampledSignal,
    config: &BenchConfig,
    trials: usize,
    warmup: usize,
) -> Result<TimingReport> {
    signal.require_non_empty()?;
    let n = signal.len();
    match op {
        BenchOperation::Copy => time_operation(
            trials,
            warmup,
            n,
            || Ok(signal.samples()),
            |x| Ok(x.to_vec()),
        ),
        BenchOperation::IonosphereCorrect => time_operation(
            trials,
            warmup,
            n,
            || Ok(signal),
            |s| correct_ionosphere(s, &config.model, config.propagation),
        ),
        BenchOperation::IonospherePhase => {
            let mut spectrum = signal.samples().to_vec();
            fft::forward(&mut spectrum);
            let screen = phase_screen(
                n,
                signal.sample_rate(),
                signal.carrier_frequency(),
                &config.model,
                config.propagation,
            );
            time_operation(
                trials,
                warmup,
                n,
                || Ok(spectrum.clone()),
                |mut x: Vec<Complex64>| {
                    for (v, p) in x.iter_mut().zip(&screen) {
                        *v *= p.conj();
                    }
                    Ok(x)
                },
            )
        }
        BenchOperation::IonosphereCompress => time_operation(
            trials,
            warmup,
            n,
            || Ok(signal),
            |s| matched_filter_with_ionosphere_correction(s, s, &config.model, config.propagation),
        ),
        BenchOperation::SincWindowed => {
            let strategy = ResampleStrategy::new(
                ResampleMethod::SincWindowed,
                config.execution,
                config.window_size,
            )?;
            let lut = if config.execution.uses_lut() {
                Some(SincLut::for_window(config.lut_density, config.window_size)?)
            } else {
                None
            };
            time_operation(
                trials,
                warmup,
                n,
                || Ok(signal),
                |s| resample_sinc(s, config.alpha, &strategy, lut.as_ref()),
            )
        }
        BenchOperation::FftPq => time_operation(
            trials,
            warmup,
            n,
            || Ok(signal),
            |s| resample_fft_pq(s, config.alpha, false, config.center_frequency),
        ),
        BenchOperation::Linear => time_operation(
            trials,
            warmup,
            n,
            || Ok(signal),
            |s| resample_linear(s, config.alpha),
        ),
        BenchOperation::FrequencyConversion => time_operation(
            trials,
            warmup,
            n,
            || Ok(signal),
            |s| frequency_convert(s, config.center_frequency * (config.alpha - 1.0)),
        ),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub mean_s: f64,
    pub median_s: f64,
    pub min_s: f64,
}

/// Times `op` at each size, with `make_signal` building the input outside
/// the timed region.
pub fn scaling_check(
    op: BenchOperation,
    sizes: &[usize],
    config: &BenchConfig,
    trials: usize,
    warmup: usize,
    mut make_signal: impl FnMut(usize) -> Result<SampledSignal>,
) -> Result<Vec<ScalingPoint>> {
    if sizes.len() < 3 {
        return Err(Error::invalid("sizes", "need at least three sizes"));
    }
    let lo = *sizes.iter().min().unwrap_or(&0);
    let hi = *sizes.iter().max().unwrap_or(&0);
    if lo == 0 || hi < 8 * lo {
        return Err(Error::invalid("sizes", "sizes must span at least a factor of 8"));
    }
    sizes
        .iter()
        .map(|&n| {
            let signal = make_signal(n)?;
            let r = bench_operation(op, &signal, config, trials, warmup)?;
            Ok(ScalingPoint {
                n,
                mean_s: r.mean,
                median_s: r.median,
                min_s: r.min,
            })
        })
        .collect()
}

pub fn write_scaling_csv<W: Write>(w: W, points: &[ScalingPoint]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["n", "mean_s", "median_s", "min_s"])?;
    for p in points {
        out.write_record([
            p.n.to_string(),
            p.mean_s.to_string(),
            p.median_s.to_string(),
            p.min_s.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::invalid("points", "need two or more positive points"));
    }
    let k = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / k, sy / k);
    let (num, den) = points.iter().fold((0.0, 0.0), |(n, d), &(x, y)| {
        let dx = x.ln() - mx;
        (n + dx * (y.ln() - my), d + dx * dx)
    });
    if den == 0.0 {
        return Err(Error::invalid("points", "all sizes are equal"));
    }
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FftPqTrial {
    pub velocity_mps: f64,
    /// Samples added to the echo by the correction.
    pub samples_changed: i64,
    pub duration_s: f64,
}

/// Times one FFT P/Q Doppler correction of `signal` per velocity.
///
/// Each distinct transform size is run once before timing so plan
/// construction is excluded, as it would be in a steady-state pipeline.
pub fn time_fft_pq_velocities(signal: &SampledSignal, velocities: &[f64]) -> Result<Vec<FftPqTrial>> {
    signal.require_non_empty()?;
    let n = signal.len();
    let mut alphas = Vec::with_capacity(velocities.len());
    let mut warmed = BTreeMap::new();
    for &v in velocities {
        let undo = 1.0 / alpha_from_velocity(v)?;
        let change = fft_pq_sample_change(n, undo);
        if let std::collections::btree_map::Entry::Vacant(e) = warmed.entry(change) {
            black_box(resample_fft_pq(signal, undo, false, 0.0)?);
            e.insert(());
        }
        alphas.push((v, undo, change));
    }
    alphas
        .into_iter()
        .map(|(v, undo, change)| {
            let start = Instant::now();
            let out = resample_fft_pq(black_box(signal), undo, false, 0.0)?;
            let d = elapsed_seconds(start);
            drop(black_box(out));
            Ok(FftPqTrial {
                velocity_mps: v,
                samples_changed: change,
                duration_s: d,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub samples_changed: i64,
    pub count: usize,
    pub median_s: f64,
    pub mean_s: f64,
}

pub fn cluster_by_change(trials: &[FftPqTrial]) -> Vec<ClusterSummary> {
    let mut groups: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
    for t in trials {
        groups.entry(t.samples_changed).or_default().push(t.duration_s);
    }
    groups
        .into_iter()
        .map(|(k, mut v)| {
            v.sort_by(f64::total_cmp);
            ClusterSummary {
                samples_changed: k,
                count: v.len(),
                median_s: median_sorted(&v),
                mean_s: v.iter().sum::<f64>() / v.len() as f64,
            }
        })
        .collect()
}

/// Fraction of the variance of log-duration explained by the
/// samples-changed grouping.
pub fn cluster_eta_squared(trials: &[FftPqTrial]) -> f64 {
    if trials.is_empty() {
        return 0.0;
    }
    let logs: Vec<(i64, f64)> = trials
        .iter()
        .map(|t| (t.samples_changed, t.duration_s.ln()))
        .collect();
    let grand = logs.iter().map(|p| p.1).sum::<f64>() / logs.len() as f64;
    let total: f64 = logs.iter().map(|p| (p.1 - grand).powi(2)).sum();
    let mut groups: BTreeMap<i64, (f64, usize)> = BTreeMap::new();
    for &(k, y) in &logs {
        let e = groups.entry(k).or_default();
        e.0 += y;
        e.1 += 1;
    }
    let between: f64 = groups
        .values()
        .map(|&(s, c)| c as f64 * (s / c as f64 - grand).powi(2))
        .sum();
    if total == 0.0 {
        1.0
    } else {
        between / total
    }
}

pub fn write_fft_pq_csv<W: Write>(w: W, trials: &[FftPqTrial]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["trial", "velocity_mps", "samples_changed", "duration_ns"])?;
    for (i, t) in trials.iter().enumerate() {
        out.write_record([
            i.to_string(),
            t.velocity_mps.to_string(),
            t.samples_changed.to_string(),
            format!("{:.0}", t.duration_s * 1e9),
        ])?;
    }
    out.flush()?;
    Ok(())
}
