//! Zero-phase band-pass filtering and instantaneous phase.
//!
//! Phase is extracted from the whole continuous band-limited record and
//! segmented afterwards. Extracting it per epoch would put the transform's
//! edge effects into every short window.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::edf::{Condition, Recording};

pub mod filter;
pub mod hilbert;

pub use filter::{design_bandpass, zero_phase_filter, Biquad, FilterSpec, DEFAULT_ORDER};
pub use hilbert::{analytic_phase, analytic_signal};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DspError {
    #[error("band {low_hz}-{high_hz} Hz is not inside (0, {nyquist}) Hz")]
    InvalidBand {
        low_hz: f64,
        high_hz: f64,
        nyquist: f64,
    },
    #[error("filter order must be positive, got {0}")]
    InvalidOrder(usize),
    #[error("signal of {len} samples is too short (need at least {min})")]
    SignalTooShort { len: usize, min: usize },
    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },
    #[error("channel {channel}: {source}")]
    Channel {
        channel: String,
        #[source]
        source: Box<DspError>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Band {
    HighBeta,
    Gamma,
}

impl Band {
    pub const ALL: [Band; 2] = [Band::HighBeta, Band::Gamma];

    pub fn definition(self) -> BandDefinition {
        match self {
            Band::HighBeta => BandDefinition {
                name: Some(self),
                low_hz: 20.0,
                high_hz: 30.0,
            },
            Band::Gamma => BandDefinition {
                name: Some(self),
                low_hz: 30.0,
                high_hz: 45.0,
            },
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Band::HighBeta => "high_beta",
            Band::Gamma => "gamma",
        }
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl std::str::FromStr for Band {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "high_beta" | "highbeta" | "beta" => Ok(Band::HighBeta),
            "gamma" => Ok(Band::Gamma),
            other => Err(format!(
                "unknown band {other:?} (expected high_beta or gamma)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandDefinition {
    pub name: Option<Band>,
    pub low_hz: f64,
    pub high_hz: f64,
}

impl BandDefinition {
    pub fn custom(low_hz: f64, high_hz: f64) -> Self {
        BandDefinition {
            name: None,
            low_hz,
            high_hz,
        }
    }

    pub fn check(&self, sample_rate: f64) -> Result<(), DspError> {
        let nyquist = sample_rate / 2.0;
        if !(self.low_hz > 0.0 && self.low_hz < self.high_hz && self.high_hz < nyquist) {
            return Err(DspError::InvalidBand {
                low_hz: self.low_hz,
                high_hz: self.high_hz,
                nyquist,
            });
        }
        Ok(())
    }

    /// Geometric band centre.
    pub fn center_hz(&self) -> f64 {
        (self.low_hz * self.high_hz).sqrt()
    }
}

/// Wraps an angle into (−π, π].
pub fn wrap_phase(x: f64) -> f64 {
    if x > -PI && x <= PI {
        return x;
    }
    let y = x - 2.0 * PI * (x / (2.0 * PI)).round();
    if y <= -PI {
        y + 2.0 * PI
    } else if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Removes 2π jumps between consecutive samples.
pub fn unwrap_phase(phases: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phases.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for &p in phases {
        if let Some(q) = prev {
            let d = p - q;
            if d > PI {
                offset -= 2.0 * PI;
            } else if d < -PI {
                offset += 2.0 * PI;
            }
        }
        out.push(p + offset);
        prev = Some(p);
    }
    out
}

/// Per-channel instantaneous phase of a band-limited recording.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSeries {
    pub subject_id: String,
    pub condition: Condition,
    pub band: BandDefinition,
    pub sample_rate: f64,
    pub channel_labels: Vec<String>,
    /// channels x samples, radians in (−π, π]
    pub phases: Vec<Vec<f64>>,
    /// Channels whose source signal is constant; their phase carries no information.
    pub degenerate: Vec<usize>,
}

impl PhaseSeries {
    pub fn n_channels(&self) -> usize {
        self.phases.len()
    }

    pub fn n_samples(&self) -> usize {
        self.phases.first().map_or(0, Vec::len)
    }
}

/// Band-pass filters each channel forward-backward, then takes its analytic phase.
pub fn band_phase(recording: &Recording, band: &BandDefinition) -> Result<PhaseSeries, DspError> {
    band_phase_with_order(recording, band, DEFAULT_ORDER)
}

pub fn band_phase_with_order(
    recording: &Recording,
    band: &BandDefinition,
    order: usize,
) -> Result<PhaseSeries, DspError> {
    let spec = design_bandpass(band, recording.sample_rate, order)?;
    let phases = recording
        .data
        .par_iter()
        .zip(recording.channel_labels.par_iter())
        .map(|(signal, label)| {
            zero_phase_filter(signal, &spec)
                .and_then(|filtered| analytic_phase(&filtered))
                .map_err(|e| DspError::Channel {
                    channel: label.clone(),
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let degenerate = recording
        .data
        .iter()
        .enumerate()
        .filter(|(_, s)| s.iter().all(|&v| v == s[0]))
        .map(|(i, _)| i)
        .collect();
    Ok(PhaseSeries {
        subject_id: recording.subject_id.clone(),
        condition: recording.condition,
        band: band.clone(),
        sample_rate: recording.sample_rate,
        channel_labels: recording.channel_labels.clone(),
        phases,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_is_half_open() {
        assert_eq!(wrap_phase(PI), PI);
        assert_eq!(wrap_phase(-PI), PI);
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_phase(0.5 + 4.0 * PI) - 0.5).abs() < 1e-12);
        assert_eq!(wrap_phase(-1.0), -1.0);
    }

    #[test]
    fn band_definitions() {
        assert_eq!(Band::HighBeta.definition().low_hz, 20.0);
        assert_eq!(Band::Gamma.definition().high_hz, 45.0);
        assert!(Band::Gamma.definition().check(160.0).is_ok());
        assert!(BandDefinition::custom(30.0, 80.0).check(160.0).is_err());
        assert_eq!("beta".parse::<Band>().unwrap(), Band::HighBeta);
    }

    #[test]
    fn all_zero_recording_is_flagged() {
        let rec = Recording {
            subject_id: "S001".into(),
            condition: Condition::EyesOpen,
            sample_rate: 160.0,
            channel_labels: vec!["a".into(), "b".into()],
            data: vec![
                vec![0.0; 400],
                (0..400).map(|i| (i as f64 * 0.9).sin()).collect(),
            ],
        };
        let ps = band_phase(&rec, &Band::HighBeta.definition()).unwrap();
        assert_eq!(ps.degenerate, vec![0]);
        assert_eq!(ps.n_samples(), 400);
        assert!(ps.phases[0].iter().all(|&p| p == 0.0));
    }
}
