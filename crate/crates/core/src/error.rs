use std::fmt;

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A spectral bin that violated the positive-frequency precondition of the
/// dispersive phase screen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffendingBin {
    pub index: usize,
    pub frequency_hz: f64,
    pub level_db: f64,
}

impl fmt::Display for OffendingBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "bin {} ({:.6e} Hz, {:.1} dB)",
            self.index, self.frequency_hz, self.level_db
        )
    }
}

fn preview(bins: &[OffendingBin]) -> String {
    let shown: Vec<String> = bins.iter().take(4).map(ToString::to_string).collect();
    if bins.len() > 4 {
        format!("{}, ...", shown.join(", "))
    } else {
        shown.join(", ")
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("nyquist violation: {0}")]
    Nyquist(String),

    #[error("signal has no samples")]
    EmptySignal,

    #[error("sample rates differ: {received} Hz vs {reference} Hz")]
    SampleRateMismatch { received: f64, reference: f64 },

    #[error(
        "energy at or below 0 Hz is {level_db:.1} dB of total, above {threshold_db} dB; strongest bins: {}",
        preview(bins)
    )]
    NonPositiveFrequencyEnergy {
        threshold_db: f64,
        /// Energy in `f ≤ 0` bins relative to the total.
        level_db: f64,
        /// Strongest offending bins, levels relative to the total.
        bins: Vec<OffendingBin>,
    },

    #[error("degenerate pseudo-Chebyshev nodes: {0}")]
    DegenerateCoefficients(String),

    #[error("no real root of the predistortion cubic at t = {t} s (smallest |Im| = {imag} Hz)")]
    NoRealRoot { t: f64, imag: f64 },

    #[error("malformed signal file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Short stable identifier for the error class, used by the CLI's
    /// machine-readable error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid-parameter",
            Error::Nyquist(_) => "nyquist",
            Error::EmptySignal => "empty-signal",
            Error::SampleRateMismatch { .. } => "sample-rate-mismatch",
            Error::NonPositiveFrequencyEnergy { .. } => "non-positive-frequency",
            Error::DegenerateCoefficients(_) => "degenerate-coefficients",
            Error::NoRealRoot { .. } => "no-real-root",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
