//! Signal file format.
//!
//! Samples are stored as contiguous little-endian `f32` pairs (I then Q),
//! i.e. numpy's `complex64`. Sample rate, carrier and a free-form
//! description live in a JSON sidecar next to the data file, named by
//! appending `.json` to the data path.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::waveform::SampledSignal;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalMetadata {
    pub sample_rate_hz: f64,
    pub carrier_frequency_hz: f64,
    #[serde(default)]
    pub description: String,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn write_samples<W: Write>(mut w: W, samples: &[Complex64]) -> Result<()> {
    let mut buf = Vec::with_capacity(8 * samples.len());
    for s in samples {
        buf.extend_from_slice(&(s.re as f32).to_le_bytes());
        buf.extend_from_slice(&(s.im as f32).to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_samples<R: Read>(mut r: R) -> Result<Vec<Complex64>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Format(format!(
            "{} bytes is not a whole number of complex64 samples",
            bytes.len()
        )));
    }
    let samples = bytes
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            Complex64::new(re as f64, im as f64)
        })
        .collect();
    Ok(samples)
}

/// Writes the sample file and its sidecar.
pub fn write_signal(path: &Path, signal: &SampledSignal, description: &str) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_samples(&mut w, signal.samples())?;
    w.flush()?;
    let meta = SignalMetadata {
        sample_rate_hz: signal.sample_rate(),
        carrier_frequency_hz: signal.carrier_frequency(),
        description: description.to_owned(),
    };
    let mut side = BufWriter::new(File::create(sidecar_path(path))?);
    serde_json::to_writer_pretty(&mut side, &meta)?;
    side.write_all(b"\n")?;
    side.flush()?;
    Ok(())
}

pub fn read_metadata(path: &Path) -> Result<SignalMetadata> {
    let side = sidecar_path(path);
    let f = File::open(&side).map_err(|e| {
        Error::Format(format!("cannot open sidecar {}: {e}", side.display()))
    })?;
    Ok(serde_json::from_reader(BufReader::new(f))?)
}

pub fn read_signal(path: &Path) -> Result<(SampledSignal, SignalMetadata)> {
    let meta = read_metadata(path)?;
    let samples = read_samples(BufReader::new(File::open(path)?))?;
    let signal = SampledSignal::new(samples, meta.sample_rate_hz, meta.carrier_frequency_hz)?;
    Ok((signal, meta))
}
