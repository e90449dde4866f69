use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn dispcorr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dispcorr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = dispcorr(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap_or(Value::Null)
}

fn ok(args: &[&str]) {
    ok_json(args);
}

fn stderr_line(out: &Output) -> String {
    let text = String::from_utf8_lossy(&out.stderr).into_owned();
    assert_eq!(text.trim_end().lines().count(), 1, "not one line: {text}");
    text.trim_end().to_owned()
}

fn path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const IONO_PULSE: [&str; 8] = [
    "--f0", "413e6", "--bandwidth", "18e6", "--pulse-width", "100e-6", "--fs", "2.048e9",
];

#[test]
fn generate_distort_correct_compress_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let pulse = path(dir.path(), "pulse.iq");
    let window = path(dir.path(), "window.iq");
    let bent = path(dir.path(), "bent.iq");
    let fixed = path(dir.path(), "fixed.iq");

    let mut args = vec!["gen"];
    args.extend(IONO_PULSE);
    args.extend(["-o", s(&pulse)]);
    let v = ok_json(&args);
    assert_eq!(v["samples"], 204800);
    assert_eq!(std::fs::metadata(&pulse).unwrap().len(), 204800 * 8);
    let side: Value = serde_json::from_slice(&std::fs::read(dir.path().join("pulse.iq.json")).unwrap()).unwrap();
    assert_eq!(side["sample_rate_hz"], 2.048e9);
    assert_eq!(side["carrier_frequency_hz"], 0.0);

    let mut args = vec!["gen"];
    args.extend(IONO_PULSE);
    args.extend(["--window-len", "524288", "--offset", "8192", "-o", s(&window)]);
    ok(&args);
    let tec = ["--tec", "100", "--tec-units", "tecu"];
    let mut args = vec!["distort", "-i", s(&window), "-o", s(&bent)];
    args.extend(tec);
    ok(&args);
    let mut args = vec!["correct", "-i", s(&bent), "-o", s(&fixed)];
    args.extend(tec);
    ok(&args);

    let clean = ok_json(&["compress", "-i", s(&fixed), "-r", s(&pulse)]);
    let loss = clean["snr_loss_db"].as_f64().unwrap();
    assert!(loss.abs() < 0.01, "corrected loss {loss}");
    assert_eq!(clean["peak_lag"], 8192);

    let dirty = ok_json(&["matched-filter", "-i", s(&bent), "-r", s(&pulse)]);
    assert!(dirty["snr_loss_db"].as_f64().unwrap() > 0.5);
    assert!(dirty["peak_lag"].as_i64().unwrap() > 8192);

    let csv = path(dir.path(), "mf.csv");
    let mut args = vec!["compress", "-i", s(&bent), "-r", s(&pulse), "-o", s(&csv), "--half-span", "4"];
    args.extend(tec);
    let fused = ok_json(&args);
    assert!(fused["snr_loss_db"].as_f64().unwrap().abs() < 0.01);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("lag,time_s,magnitude,relative_db"));
    assert_eq!(text.lines().count(), 10);
}

#[test]
fn zero_velocity_resample_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let x = path(dir.path(), "x.iq");
    ok(&["gen", "--f0", "411e6", "--bandwidth", "18e6", "--pulse-width", "20e-6", "--fs", "200e6", "--carrier", "420e6", "-o", s(&x)]);
    for method in ["sinc_windowed", "sinc_exact", "fft_pq", "fft-pq-with-tone", "frequency_conversion", "linear"] {
        let y = path(dir.path(), &format!("{method}.iq"));
        ok(&["resample", "--method", method, "--velocity", "0", "-i", s(&x), "-o", s(&y)]);
        assert_eq!(std::fs::read(&x).unwrap(), std::fs::read(&y).unwrap(), "{method}");
    }
    let y = path(dir.path(), "moved.iq");
    ok(&["resample", "--velocity", "-3km/s", "--execution", "parallel_tiled", "-i", s(&x), "-o", s(&y)]);
    assert_ne!(std::fs::read(&x).unwrap(), std::fs::read(&y).unwrap());
}

#[test]
fn existing_outputs_need_force() {
    let dir = tempfile::tempdir().unwrap();
    let x = path(dir.path(), "x.iq");
    let gen = ["gen", "--f0", "1e6", "--bandwidth", "0", "--pulse-width", "1e-5", "--fs", "1e7", "-o", s(&x)];
    ok(&gen);
    let before = std::fs::read(&x).unwrap();
    let out = dispcorr(&gen);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_line(&out).starts_with("error: usage: "));

    // A leftover sidecar alone also blocks the write.
    let y = path(dir.path(), "y.iq");
    std::fs::write(dir.path().join("y.iq.json"), "{}").unwrap();
    let out = dispcorr(&["distort", "-i", s(&x), "-o", s(&y), "--tec", "1e16"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!y.exists());

    let mut forced = gen.to_vec();
    forced[2] = "2e6";
    forced.push("--force");
    ok(&forced);
    assert_ne!(std::fs::read(&x).unwrap(), before);
}

#[test]
fn errors_are_single_lines_with_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let x = path(dir.path(), "x.iq");
    let y = path(dir.path(), "y.iq");

    let out = dispcorr(&["gen", "--f0", "1e6", "--bandwidth", "0", "--pulse-width", "1e-5", "--fs", "1e7"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_line(&out).starts_with("error: usage: "));

    let out = dispcorr(&["gen", "--f0", "-5", "--bandwidth", "0", "--pulse-width", "1e-5", "--fs", "1e7", "-o", s(&x)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!x.exists());

    let out = dispcorr(&["gen", "--f0", "6e6", "--bandwidth", "0", "--pulse-width", "1e-5", "--fs", "1e7", "-o", s(&x)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_line(&out).starts_with("error: nyquist: "));
    assert!(!x.exists());

    ok(&["gen", "--f0", "1e6", "--bandwidth", "0", "--pulse-width", "1e-5", "--fs", "1e7", "-o", s(&x)]);
    // Bad flags are caught before the input is read or the output created.
    for bad in [
        vec!["distort", "-i", "missing.iq", "-o", s(&y), "--tec", "1", "--passes", "3"],
        vec!["resample", "-i", "missing.iq", "-o", s(&y), "--velocity", "1", "--window", "4"],
        vec!["resample", "-i", "missing.iq", "-o", s(&y), "--velocity", "fast"],
        vec!["resample", "-i", "missing.iq", "-o", s(&y), "--velocity", "1", "--method", "analytic_lfm"],
        vec!["resample", "-i", "missing.iq", "-o", s(&y), "--velocity", "4e8"],
    ] {
        let out = dispcorr(&bad);
        assert_eq!(out.status.code(), Some(2), "{bad:?}");
        assert!(stderr_line(&out).starts_with("error: usage: "));
        assert!(!y.exists());
    }

    let out = dispcorr(&["distort", "-i", s(&dir.path().join("missing.iq")), "-o", s(&y), "--tec", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_line(&out).starts_with("error: "));
    assert!(!y.exists());

    // Lowering the recorded carrier puts the tone at -1 MHz, which cannot be dispersed.
    let neg = path(dir.path(), "neg.iq");
    ok(&["gen", "--f0", "1e6", "--bandwidth", "0", "--pulse-width", "1e-5", "--fs", "1e7", "--carrier", "3e6", "-o", s(&neg)]);
    let side = dir.path().join("neg.iq.json");
    let mut meta: Value = serde_json::from_slice(&std::fs::read(&side).unwrap()).unwrap();
    meta["carrier_frequency_hz"] = 1e6.into();
    std::fs::write(&side, serde_json::to_vec(&meta).unwrap()).unwrap();
    let out = dispcorr(&["distort", "-i", s(&neg), "-o", s(&y), "--tec", "1e16"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_line(&out).starts_with("error: non-positive-frequency: "));
}

#[test]
fn ionosphere_comparison_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = path(dir.path(), "traces.csv");
    let v = ok_json(&["compare-iono", "--tec", "100", "--tec-units", "tecu", "--half-span", "100", "-o", s(&csv)]);
    let fft = v["loss_vs_cubic_db"]["FFT"].as_f64().unwrap();
    assert!(fft < 0.01, "{v}");
    assert!(v["fft_round_trip_db"].as_f64().unwrap().abs() < 0.01);
    assert!(v["loss_vs_cubic_db"]["LFM"].as_f64().unwrap() > 0.5);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("lag,time_s,lfm_db,poly_db,fft_db,cubic_db"));
    assert_eq!(text.lines().count(), 202);
}

#[test]
fn sweeps_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = path(dir.path(), "doppler.csv");
    let v = ok_json(&[
        "--threads", "1", "sweep-doppler", "--pulse-width", "50e-6", "--points", "3",
        "--methods", "fft_pq,analytic_lfm,sinc_windowed", "-o", s(&csv),
    ]);
    assert_eq!(v["rows"], 9);
    assert!(v["max_loss_db"]["analytic_lfm"].as_f64().unwrap() < 1e-3);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("velocity_mps,method,execution,loss_db"));
    assert_eq!(text.lines().count(), 10);

    let csv = path(dir.path(), "cheb.csv");
    let v = ok_json(&["sweep-chebyshev", "--tec", "100", "--tec-units", "tecu", "--points", "101", "-o", s(&csv)]);
    assert!(v["residual_ratio"].as_f64().unwrap() > 10.0, "{v}");
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 102);
}

#[test]
fn bench_commands() {
    let dir = tempfile::tempdir().unwrap();
    let csv = path(dir.path(), "t.csv");
    let summary = path(dir.path(), "t.json");
    ok(&[
        "bench", "run", "--op", "iono_correct", "--samples", "4096", "--trials", "5", "--warmup", "1",
        "-o", s(&csv), "--summary", s(&summary),
    ]);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("trial,duration_ns"));
    assert_eq!(text.lines().count(), 6);
    let sum: Value = serde_json::from_slice(&std::fs::read(&summary).unwrap()).unwrap();
    assert_eq!(sum["trials"], 5);
    assert!(sum["throughput_sps"].as_f64().unwrap() > 0.0);

    let csv = path(dir.path(), "s.csv");
    let v = ok_json(&[
        "bench", "scaling", "--op", "sinc_windowed", "--sizes", "1024,4096,16384", "--trials", "3",
        "--warmup", "1", "-o", s(&csv),
    ]);
    assert!(v["slope_min"].as_f64().unwrap().is_finite());
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 4);

    let csv = path(dir.path(), "pq.csv");
    let v = ok_json(&["bench", "fft-pq", "--velocities", "4", "-o", s(&csv)]);
    assert_eq!(v["samples"], 524288);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("trial,velocity_mps,samples_changed,duration_ns"));
    assert_eq!(text.lines().count(), 5);

    let out = dispcorr(&["bench", "scaling", "--op", "copy", "--sizes", "1024,2048,4096", "-o", s(&csv)]);
    assert_eq!(out.status.code(), Some(2));
}
