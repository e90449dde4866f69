//! `dispcorr` command-line front end.
//!
//! Every command parses and validates its whole flag set, including output
//! overwrite checks, before any file is read or written. Usage errors exit
//! with status 2, numeric failures with status 1, each as one line on stderr.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dispcorr::analysis::{
    chebyshev_residual_sweep, matched_filter, matched_filter_against,
    matched_filter_with_ionosphere_correction, predistortion_loss_vs_cubic, write_doppler_csv,
    write_residual_csv, DopplerSweep, IonosphereComparison, TRACE_LABELS,
};
use dispcorr::bench::{
    bench_operation, cluster_by_change, cluster_eta_squared, loglog_slope, scaling_check,
    time_fft_pq_velocities, write_fft_pq_csv, write_scaling_csv, BenchConfig, BenchOperation,
};
use dispcorr::doppler::{
    alpha_from_velocity, resample, Execution, ResampleMethod, ResampleStrategy, SincLut,
    DEFAULT_LUT_DENSITY,
};
use dispcorr::ionosphere::{
    apply_ionosphere, correct_ionosphere, predistort_lfm, IonosphereModel, PredistortionMethod,
    Propagation,
};
use dispcorr::iqfile::{read_signal, sidecar_path, write_signal};
use dispcorr::{generate_lfm, generate_lfm_baseband, LfmParams, SampledSignal};
use serde_json::json;

const IONO_CHIRP: (f64, f64, f64) = (413e6, 18e6, 100e-6);
const DOPPLER_CHIRP: (f64, f64, f64) = (411e6, 18e6, 500e-6);
const CHEBYSHEV_CHIRP: (f64, f64, f64) = (390e6, 20e6, 100e-6);
const TIMING_CHIRP: (f64, f64, f64) = (420e6, 18e6, 500e-6);
const DEFAULT_TEC: f64 = 1e18;

#[derive(Parser)]
#[command(name = "dispcorr", version, about = "Ionospheric and Doppler dispersion correction toolkit")]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overwrite existing output files.
    #[arg(long, global = true)]
    force: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a chirp (or tone when the bandwidth is 0) signal file.
    Gen(GenArgs),
    /// Apply ionospheric dispersion to a signal file.
    Distort(IonoFileArgs),
    /// Remove ionospheric dispersion from a signal file.
    Correct(IonoFileArgs),
    /// Time-dilate a signal file for a target range rate.
    Resample(ResampleArgs),
    /// Pulse-compress a signal file against a reference.
    #[command(alias = "matched-filter")]
    Compress(CompressArgs),
    /// Loss of Doppler correction methods over a velocity range (CSV).
    SweepDoppler(SweepDopplerArgs),
    /// Pseudo-Chebyshev frequency residuals against the cubic solution (CSV).
    SweepChebyshev(SweepChebyshevArgs),
    /// FFT correction against predistortion methods, four traces (CSV).
    CompareIono(CompareIonoArgs),
    /// Timing harness.
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Args)]
struct ChirpArgs {
    /// Start frequency, Hz.
    #[arg(long, allow_negative_numbers = true)]
    f0: Option<f64>,
    /// Swept bandwidth, Hz (negative for a down-chirp).
    #[arg(long, allow_negative_numbers = true)]
    bandwidth: Option<f64>,
    /// Pulse width, s.
    #[arg(long, allow_negative_numbers = true)]
    pulse_width: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TecUnits {
    /// Electrons per square metre.
    Si,
    /// TEC units of 1e16 electrons per square metre.
    Tecu,
}

#[derive(Args)]
struct TecArgs {
    /// Total electron content.
    #[arg(long, allow_negative_numbers = true)]
    tec: Option<f64>,
    #[arg(long, value_enum, default_value = "si")]
    tec_units: TecUnits,
    /// Passes through the ionosphere (2 for a radar echo).
    #[arg(long, default_value_t = 2)]
    passes: u32,
}

#[derive(Clone, Copy, ValueEnum)]
enum Predistortion {
    None,
    Cubic,
    Chebyshev,
    ChebyshevOriginal,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    chirp: ChirpArgs,
    /// Sample rate, Hz.
    #[arg(long)]
    fs: f64,
    /// Carrier the samples are referenced to, Hz.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    carrier: f64,
    /// Transmit predistortion for the ionosphere given by --tec.
    #[arg(long, value_enum, default_value = "none")]
    predistort: Predistortion,
    #[command(flatten)]
    tec: TecArgs,
    /// Embed the pulse in a zero window of this many samples.
    #[arg(long)]
    window_len: Option<usize>,
    /// Pulse start inside the window, samples.
    #[arg(long, default_value_t = 0)]
    offset: usize,
    #[arg(long, default_value = "")]
    description: String,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct IonoFileArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    #[command(flatten)]
    tec: TecArgs,
}

#[derive(Args)]
struct MethodArgs {
    #[arg(long, value_parser = parse_named::<ResampleMethod>, default_value = "sinc_windowed")]
    method: ResampleMethod,
    #[arg(long, value_parser = parse_named::<Execution>, default_value = "parallel_lut")]
    execution: Execution,
    /// Windowed-sinc taps (odd).
    #[arg(long, default_value_t = 25)]
    window: usize,
    /// Table entries per sample for lookup-table executions.
    #[arg(long, default_value_t = DEFAULT_LUT_DENSITY)]
    lut_density: usize,
}

#[derive(Args)]
struct ResampleArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Range rate, m/s or with a `km/s` suffix; positive closes range.
    #[arg(long, value_parser = parse_velocity, allow_hyphen_values = true)]
    velocity: f64,
    /// Undo the dilation instead of applying it.
    #[arg(long)]
    undo: bool,
    #[command(flatten)]
    method: MethodArgs,
    /// Absolute frequency for tone-based methods, Hz (default: carrier).
    #[arg(long, allow_negative_numbers = true)]
    center_frequency: Option<f64>,
}

#[derive(Args)]
struct CompressArgs {
    /// Received signal file.
    #[arg(short, long)]
    input: PathBuf,
    /// Reference (transmitted) signal file.
    #[arg(short, long)]
    reference: PathBuf,
    /// Fold an ionospheric correction for this TEC into the filter.
    #[command(flatten)]
    tec: TecArgs,
    /// Ideal peak for the loss (default: reference energy).
    #[arg(long)]
    reference_peak: Option<f64>,
    /// Correlation CSV around the peak.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 256)]
    half_span: i64,
}

#[derive(Args)]
struct SweepDopplerArgs {
    #[command(flatten)]
    chirp: ChirpArgs,
    #[arg(long, default_value_t = 200e6)]
    fs: f64,
    #[arg(long, default_value_t = 420e6)]
    carrier: f64,
    #[arg(long, value_parser = parse_velocity, default_value = "0", allow_hyphen_values = true)]
    v_min: f64,
    #[arg(long, value_parser = parse_velocity, default_value = "5km/s", allow_hyphen_values = true)]
    v_max: f64,
    #[arg(long, default_value_t = 51)]
    points: usize,
    #[arg(
        long,
        value_delimiter = ',',
        value_parser = parse_named::<ResampleMethod>,
        default_value = "sinc_windowed,fft_pq,fft_pq_with_tone,frequency_conversion,linear,analytic_lfm"
    )]
    methods: Vec<ResampleMethod>,
    #[arg(long, value_parser = parse_named::<Execution>, default_value = "parallel_lut")]
    execution: Execution,
    #[arg(long, default_value_t = 25)]
    window: usize,
    #[arg(long, default_value_t = DEFAULT_LUT_DENSITY)]
    lut_density: usize,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct SweepChebyshevArgs {
    #[command(flatten)]
    chirp: ChirpArgs,
    #[command(flatten)]
    tec: TecArgs,
    #[arg(long, default_value_t = 1001)]
    points: usize,
    /// Sample rate for the predistortion loss, Hz.
    #[arg(long, default_value_t = 2.048e9)]
    fs: f64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct CompareIonoArgs {
    #[command(flatten)]
    chirp: ChirpArgs,
    #[arg(long, default_value_t = 2.048e9)]
    fs: f64,
    #[command(flatten)]
    tec: TecArgs,
    #[arg(long, default_value_t = 1 << 19)]
    window_len: usize,
    #[arg(long, default_value_t = 1 << 13)]
    offset: usize,
    /// Lags written on each side of zero.
    #[arg(long, default_value_t = 2048)]
    half_span: i64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Repeated trials of one operation.
    Run(BenchRunArgs),
    /// One operation over several input sizes, with a log-log slope fit.
    Scaling(BenchScalingArgs),
    /// FFT P/Q Doppler correction timed per velocity.
    FftPq(BenchFftPqArgs),
}

#[derive(Args)]
struct BenchOpArgs {
    #[arg(long, value_parser = parse_named::<BenchOperation>)]
    op: BenchOperation,
    #[arg(long, default_value_t = 2.048e9)]
    fs: f64,
    #[command(flatten)]
    tec: TecArgs,
    /// Range rate whose dilation the resampling operations undo.
    #[arg(long, value_parser = parse_velocity, default_value = "3km/s", allow_hyphen_values = true)]
    velocity: f64,
    #[arg(long, value_parser = parse_named::<Execution>, default_value = "parallel_lut")]
    execution: Execution,
    #[arg(long, default_value_t = 25)]
    window: usize,
    #[arg(long, default_value_t = DEFAULT_LUT_DENSITY)]
    lut_density: usize,
    #[arg(long, default_value_t = 10)]
    warmup: usize,
}

#[derive(Args)]
struct BenchRunArgs {
    #[command(flatten)]
    op: BenchOpArgs,
    /// Input signal file (default: synthetic 413 MHz chirp of --samples).
    #[arg(short, long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 1 << 19)]
    samples: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    /// Per-trial CSV (`trial,duration_ns`).
    #[arg(short, long)]
    output: PathBuf,
    /// Summary JSON path (default: stdout).
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct BenchScalingArgs {
    #[command(flatten)]
    op: BenchOpArgs,
    #[arg(long, value_delimiter = ',', default_value = "16384,65536,262144")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct BenchFftPqArgs {
    #[arg(long, default_value_t = 1_048_576_000.0)]
    fs: f64,
    /// Velocities, evenly spread over [0, --v-max].
    #[arg(long, default_value_t = 200)]
    velocities: usize,
    #[arg(long, value_parser = parse_velocity, default_value = "5km/s")]
    v_max: f64,
    #[arg(short, long)]
    output: PathBuf,
}

enum CliError {
    Usage(String),
    Run(dispcorr::Error),
}

impl From<dispcorr::Error> for CliError {
    fn from(e: dispcorr::Error) -> Self {
        CliError::Run(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(e.into())
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Validation-stage failures are flag problems.
fn flag<T>(r: dispcorr::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError::Usage(e.to_string()))
}

fn parse_named<T: FromStr<Err = dispcorr::Error>>(s: &str) -> Result<T, String> {
    s.replace('-', "_").parse().map_err(|e: dispcorr::Error| e.to_string())
}

fn parse_velocity(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let (num, scale) = if let Some(v) = t.strip_suffix("km/s") {
        (v, 1e3)
    } else if let Some(v) = t.strip_suffix("m/s") {
        (v, 1.0)
    } else {
        (t, 1.0)
    };
    let v: f64 = num
        .trim()
        .parse()
        .map_err(|_| format!("`{s}` is not a velocity (m/s, or with a km/s suffix)"))?;
    if !v.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(v * scale)
}

fn chirp(args: &ChirpArgs, default: (f64, f64, f64)) -> CliResult<LfmParams> {
    flag(LfmParams::new(
        args.f0.unwrap_or(default.0),
        args.bandwidth.unwrap_or(default.1),
        args.pulse_width.unwrap_or(default.2),
    ))
}

impl TecArgs {
    fn model_or(&self, default_si: Option<f64>) -> CliResult<Option<IonosphereModel>> {
        let Some(value) = self.tec else {
            return Ok(default_si.map(IonosphereModel::from_tec).transpose().map_err(|e| usage(e.to_string()))?);
        };
        let m = match self.tec_units {
            TecUnits::Si => IonosphereModel::from_tec(value),
            TecUnits::Tecu => IonosphereModel::from_tecu(value),
        };
        flag(m).map(Some)
    }

    fn required(&self) -> CliResult<IonosphereModel> {
        self.model_or(None)?.ok_or_else(|| usage("--tec is required"))
    }

    fn propagation(&self) -> CliResult<Propagation> {
        flag(Propagation::from_passes(self.passes))
    }
}

fn check_positive(name: &str, v: f64) -> CliResult<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(usage(format!("--{name} must be positive, got {v}")))
    }
}

/// Refuses to clobber `path` (and its sidecar for signal files) without
/// `--force`.
struct Outputs {
    force: bool,
}

impl Outputs {
    fn check(&self, path: &Path) -> CliResult<()> {
        if !self.force && path.exists() {
            return Err(usage(format!("{} exists; pass --force to overwrite", path.display())));
        }
        Ok(())
    }

    fn check_signal(&self, path: &Path) -> CliResult<()> {
        self.check(path)?;
        self.check(&sidecar_path(path))
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn print_json(v: &serde_json::Value) {
    println!("{v}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("error: usage: {}", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: usage: {}", one_line(&msg));
            ExitCode::from(2)
        }
        Err(CliError::Run(e)) => {
            eprintln!("error: {}: {}", e.kind(), one_line(&e.to_string()));
            ExitCode::from(1)
        }
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| usage(e.to_string()))?;
    }
    let out = Outputs { force: cli.force };
    match cli.command {
        Command::Gen(a) => gen(a, &out),
        Command::Distort(a) => iono_file(a, &out, false),
        Command::Correct(a) => iono_file(a, &out, true),
        Command::Resample(a) => resample_file(a, &out),
        Command::Compress(a) => compress(a, &out),
        Command::SweepDoppler(a) => sweep_doppler(a, &out),
        Command::SweepChebyshev(a) => sweep_chebyshev(a, &out),
        Command::CompareIono(a) => compare_iono(a, &out),
        Command::Bench(BenchCommand::Run(a)) => bench_run(a, &out),
        Command::Bench(BenchCommand::Scaling(a)) => bench_scaling(a, &out),
        Command::Bench(BenchCommand::FftPq(a)) => bench_fft_pq(a, &out),
    }
}

fn gen(a: GenArgs, out: &Outputs) -> CliResult<()> {
    let (Some(f0), Some(b), Some(t)) = (a.chirp.f0, a.chirp.bandwidth, a.chirp.pulse_width) else {
        return Err(usage("gen needs --f0, --bandwidth and --pulse-width"));
    };
    let p = flag(LfmParams::new(f0, b, t))?;
    check_positive("fs", a.fs)?;
    let method = match a.predistort {
        Predistortion::None => None,
        Predistortion::Cubic => Some(PredistortionMethod::CubicTrapezoid),
        Predistortion::Chebyshev => Some(PredistortionMethod::ChebyshevCorrected),
        Predistortion::ChebyshevOriginal => Some(PredistortionMethod::ChebyshevOriginal),
    };
    let model = match method {
        Some(_) => Some(a.tec.required()?),
        None if a.tec.tec.is_some() => return Err(usage("--tec given without --predistort")),
        None => None,
    };
    if method.is_some() && a.carrier != 0.0 {
        return Err(usage("predistorted chirps are generated at a 0 Hz carrier"));
    }
    let n = p.sample_count(a.fs);
    if let Some(len) = a.window_len {
        if a.offset + n > len {
            return Err(usage(format!("a {n}-sample pulse at offset {} does not fit in {len}", a.offset)));
        }
    } else if a.offset != 0 {
        return Err(usage("--offset needs --window-len"));
    }
    out.check_signal(&a.output)?;

    let mut signal = match (method, model) {
        (Some(m), Some(model)) => predistort_lfm(&p, &model, a.fs, m)?,
        _ if a.carrier == 0.0 => generate_lfm(&p, a.fs)?,
        _ => generate_lfm_baseband(&p, a.fs, a.carrier)?,
    };
    if let Some(len) = a.window_len {
        signal = signal.embed(len, a.offset)?;
    }
    write_signal(&a.output, &signal, &a.description)?;
    print_json(&json!({ "samples": signal.len(), "pulse_samples": n, "output": a.output }));
    Ok(())
}

fn iono_file(a: IonoFileArgs, out: &Outputs, correct: bool) -> CliResult<()> {
    let model = a.tec.required()?;
    let prop = a.tec.propagation()?;
    out.check_signal(&a.output)?;
    let (signal, meta) = read_signal(&a.input)?;
    let result = if correct {
        correct_ionosphere(&signal, &model, prop)?
    } else {
        apply_ionosphere(&signal, &model, prop)?
    };
    write_signal(&a.output, &result, &meta.description)?;
    Ok(())
}

fn strategy(m: &MethodArgs) -> CliResult<(ResampleStrategy, Option<SincLut>)> {
    let s = ResampleStrategy {
        method: m.method,
        execution: m.execution,
        window_size: m.window,
    };
    flag(s.validate())?;
    let lut = if s.method == ResampleMethod::SincWindowed && s.execution.uses_lut() {
        Some(flag(SincLut::for_window(m.lut_density, m.window))?)
    } else {
        None
    };
    Ok((s, lut))
}

fn resample_file(a: ResampleArgs, out: &Outputs) -> CliResult<()> {
    if a.method.method == ResampleMethod::AnalyticLfm {
        return Err(usage("analytic_lfm regenerates a chirp from its parameters; use sweep-doppler"));
    }
    let (strategy, lut) = strategy(&a.method)?;
    let alpha = flag(alpha_from_velocity(a.velocity))?;
    let alpha = if a.undo { 1.0 / alpha } else { alpha };
    out.check_signal(&a.output)?;
    let (signal, meta) = read_signal(&a.input)?;
    let center = a.center_frequency.unwrap_or(signal.carrier_frequency());
    let result = resample(&signal, alpha, &strategy, lut.as_ref(), center)?;
    write_signal(&a.output, &result, &meta.description)?;
    Ok(())
}

fn compress(a: CompressArgs, out: &Outputs) -> CliResult<()> {
    let model = a.tec.model_or(None)?;
    let prop = a.tec.propagation()?;
    if let Some(p) = a.reference_peak {
        check_positive("reference-peak", p)?;
        if model.is_some() {
            return Err(usage("--reference-peak cannot be combined with --tec"));
        }
    }
    if a.half_span < 0 {
        return Err(usage("--half-span must be non-negative"));
    }
    if let Some(o) = &a.output {
        out.check(o)?;
    }
    let (rx, _) = read_signal(&a.input)?;
    let (reference, _) = read_signal(&a.reference)?;
    let r = match (model, a.reference_peak) {
        (Some(m), _) => matched_filter_with_ionosphere_correction(&rx, &reference, &m, prop)?,
        (None, Some(p)) => matched_filter_against(&rx, &reference, p)?,
        (None, None) => matched_filter(&rx, &reference)?,
    };
    if let Some(o) = &a.output {
        let mut w = create(o)?;
        r.write_csv(&mut w, a.half_span)?;
        w.flush()?;
    }
    print_json(&json!({
        "peak_index": r.peak_index,
        "peak_lag": r.peak_lag,
        "peak_time_s": r.peak_lag as f64 / rx.sample_rate(),
        "peak_magnitude": r.peak_magnitude,
        "snr_loss_db": r.snr_loss_db,
    }));
    Ok(())
}

fn sweep_doppler(a: SweepDopplerArgs, out: &Outputs) -> CliResult<()> {
    let p = chirp(&a.chirp, DOPPLER_CHIRP)?;
    check_positive("fs", a.fs)?;
    if a.points < 2 || a.v_max <= a.v_min {
        return Err(usage("need --points >= 2 and --v-max > --v-min"));
    }
    if a.methods.is_empty() {
        return Err(usage("--methods is empty"));
    }
    let strategies: Vec<ResampleStrategy> = a
        .methods
        .iter()
        .map(|&m| {
            let s = if m == ResampleMethod::SincWindowed {
                ResampleStrategy { method: m, execution: a.execution, window_size: a.window }
            } else {
                ResampleStrategy::simple(m)
            };
            flag(s.validate()).map(|_| s)
        })
        .collect::<CliResult<_>>()?;
    if a.execution.uses_lut() {
        flag(SincLut::for_window(a.lut_density, a.window))?;
    }
    let velocities: Vec<f64> = (0..a.points)
        .map(|k| a.v_min + (a.v_max - a.v_min) * k as f64 / (a.points - 1) as f64)
        .collect();
    for &v in &[a.v_min, a.v_max] {
        flag(alpha_from_velocity(v))?;
    }
    out.check(&a.output)?;
    let sweep = DopplerSweep {
        params: p,
        sample_rate: a.fs,
        carrier_frequency: a.carrier,
        lut_density: a.lut_density,
    };
    let rows = sweep.run(&velocities, &strategies)?;
    let mut w = create(&a.output)?;
    write_doppler_csv(&mut w, &rows)?;
    w.flush()?;
    let worst: serde_json::Map<String, serde_json::Value> = a
        .methods
        .iter()
        .map(|m| {
            let max = rows
                .iter()
                .filter(|r| r.method == *m)
                .map(|r| r.loss_db)
                .fold(f64::NEG_INFINITY, f64::max);
            (m.name().to_owned(), json!(max))
        })
        .collect();
    print_json(&json!({ "rows": rows.len(), "max_loss_db": worst }));
    Ok(())
}

fn sweep_chebyshev(a: SweepChebyshevArgs, out: &Outputs) -> CliResult<()> {
    let p = chirp(&a.chirp, CHEBYSHEV_CHIRP)?;
    let model = a.tec.model_or(Some(DEFAULT_TEC))?.expect("defaulted");
    check_positive("fs", a.fs)?;
    if a.points < 2 {
        return Err(usage("--points must be at least 2"));
    }
    out.check(&a.output)?;
    let times: Vec<f64> = (0..a.points)
        .map(|k| p.pulse_width * k as f64 / (a.points - 1) as f64)
        .collect();
    let rows = chebyshev_residual_sweep(&p, &model, &times)?;
    let mut w = create(&a.output)?;
    write_residual_csv(&mut w, &rows)?;
    w.flush()?;
    let cor = rows.iter().map(|r| r.residual_corrected_hz).fold(0.0, f64::max);
    let ori = rows.iter().map(|r| r.residual_original_hz).fold(0.0, f64::max);
    let loss_cor = predistortion_loss_vs_cubic(&p, &model, a.fs, PredistortionMethod::ChebyshevCorrected)?;
    let loss_ori = predistortion_loss_vs_cubic(&p, &model, a.fs, PredistortionMethod::ChebyshevOriginal)?;
    print_json(&json!({
        "max_residual_corrected_hz": cor,
        "max_residual_original_hz": ori,
        "residual_ratio": ori / cor,
        "loss_corrected_db": loss_cor,
        "loss_original_db": loss_ori,
    }));
    Ok(())
}

fn compare_iono(a: CompareIonoArgs, out: &Outputs) -> CliResult<()> {
    let params = chirp(&a.chirp, IONO_CHIRP)?;
    check_positive("fs", a.fs)?;
    let model = a.tec.model_or(Some(DEFAULT_TEC))?.expect("defaulted");
    let propagation = a.tec.propagation()?;
    let n = params.sample_count(a.fs);
    if a.offset + n > a.window_len {
        return Err(usage(format!("a {n}-sample pulse at offset {} does not fit in {}", a.offset, a.window_len)));
    }
    if a.half_span < 0 {
        return Err(usage("--half-span must be non-negative"));
    }
    out.check(&a.output)?;
    let cmp = IonosphereComparison {
        params,
        sample_rate: a.fs,
        model,
        propagation,
        window_len: a.window_len,
        offset: a.offset,
    };
    let res = cmp.run()?;
    let mut w = create(&a.output)?;
    res.write_traces_csv(&mut w, a.half_span, a.fs)?;
    w.flush()?;
    let losses: serde_json::Map<String, serde_json::Value> = TRACE_LABELS
        .iter()
        .zip(res.trace_losses_db)
        .map(|(l, v)| (l.to_string(), json!(v)))
        .collect();
    let received: serde_json::Map<String, serde_json::Value> = TRACE_LABELS
        .iter()
        .zip(res.received_losses_db)
        .map(|(l, v)| (l.to_string(), json!(v)))
        .collect();
    print_json(&json!({
        "loss_vs_cubic_db": losses,
        "received_loss_db": received,
        "fft_round_trip_db": res.fft_round_trip_db,
    }));
    Ok(())
}

impl BenchOpArgs {
    fn config(&self) -> CliResult<BenchConfig> {
        check_positive("fs", self.fs)?;
        let model = self.tec.model_or(Some(DEFAULT_TEC))?.expect("defaulted");
        let alpha = 1.0 / flag(alpha_from_velocity(self.velocity))?;
        let s = ResampleStrategy {
            method: ResampleMethod::SincWindowed,
            execution: self.execution,
            window_size: self.window,
        };
        flag(s.validate())?;
        if self.execution.uses_lut() {
            flag(SincLut::for_window(self.lut_density, self.window))?;
        }
        Ok(BenchConfig {
            model,
            propagation: self.tec.propagation()?,
            alpha,
            center_frequency: IONO_CHIRP.0 + 0.5 * IONO_CHIRP.1,
            execution: self.execution,
            window_size: self.window,
            lut_density: self.lut_density,
        })
    }
}

/// Unit chirp at 413 MHz spanning `n` samples.
fn synthetic(n: usize, fs: f64) -> dispcorr::Result<SampledSignal> {
    let p = LfmParams::new(IONO_CHIRP.0, IONO_CHIRP.1, n as f64 / fs)?;
    generate_lfm(&p, fs)
}

fn bench_run(a: BenchRunArgs, out: &Outputs) -> CliResult<()> {
    let config = a.op.config()?;
    if a.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    if a.input.is_none() && a.samples < 2 {
        return Err(usage("--samples must be at least 2"));
    }
    out.check(&a.output)?;
    if let Some(s) = &a.summary {
        out.check(s)?;
    }
    let signal = match &a.input {
        Some(p) => read_signal(p)?.0,
        None => synthetic(a.samples, a.op.fs)?,
    };
    let report = bench_operation(a.op.op, &signal, &config, a.trials, a.op.warmup)?;
    let mut w = create(&a.output)?;
    report.write_csv(&mut w)?;
    w.flush()?;
    match &a.summary {
        Some(p) => {
            let mut w = create(p)?;
            report.write_summary_json(&mut w)?;
            w.flush()?;
        }
        None => print_json(&serde_json::to_value(report.summary()).map_err(dispcorr::Error::from)?),
    }
    Ok(())
}

fn bench_scaling(a: BenchScalingArgs, out: &Outputs) -> CliResult<()> {
    let config = a.op.config()?;
    if a.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let lo = a.sizes.iter().copied().min().unwrap_or(0);
    let hi = a.sizes.iter().copied().max().unwrap_or(0);
    if a.sizes.len() < 3 || lo < 2 || hi < 8 * lo {
        return Err(usage("--sizes needs at least three sizes spanning a factor of 8"));
    }
    out.check(&a.output)?;
    let fs = a.op.fs;
    let points = scaling_check(a.op.op, &a.sizes, &config, a.trials, a.op.warmup, |n| synthetic(n, fs))?;
    let mut w = create(&a.output)?;
    write_scaling_csv(&mut w, &points)?;
    w.flush()?;
    let fit = |f: fn(&dispcorr::bench::ScalingPoint) -> f64| {
        loglog_slope(&points.iter().map(|p| (p.n as f64, f(p))).collect::<Vec<_>>())
    };
    print_json(&json!({
        "slope_min": fit(|p| p.min_s)?,
        "slope_median": fit(|p| p.median_s)?,
        "slope_mean": fit(|p| p.mean_s)?,
    }));
    Ok(())
}

fn bench_fft_pq(a: BenchFftPqArgs, out: &Outputs) -> CliResult<()> {
    check_positive("fs", a.fs)?;
    check_positive("v-max", a.v_max)?;
    flag(alpha_from_velocity(a.v_max))?;
    if a.velocities == 0 {
        return Err(usage("--velocities must be at least 1"));
    }
    let p = flag(LfmParams::new(TIMING_CHIRP.0, TIMING_CHIRP.1, TIMING_CHIRP.2))?;
    out.check(&a.output)?;
    // Stratified over [0, v_max]: one draw per equal-width cell, centred.
    let velocities: Vec<f64> = (0..a.velocities)
        .map(|k| a.v_max * (k as f64 + 0.5) / a.velocities as f64)
        .collect();
    let signal = generate_lfm(&p, a.fs)?;
    let trials = time_fft_pq_velocities(&signal, &velocities)?;
    let mut w = create(&a.output)?;
    write_fft_pq_csv(&mut w, &trials)?;
    w.flush()?;
    print_json(&json!({
        "samples": signal.len(),
        "eta_squared": cluster_eta_squared(&trials),
        "clusters": cluster_by_change(&trials),
    }));
    Ok(())
}
