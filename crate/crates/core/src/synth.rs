//! Seeded synthetic signals and phases with known coupling, used as
//! ground truth for the DSP, connectivity and scoring checks.
//!
//! The random stream is SplitMix64, written out here so that any other
//! implementation can reproduce it bit for bit:
//!
//! ```text
//! state  = state + 0x9E3779B97F4A7C15            (wrapping)
//! z      = state
//! z      = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9  (wrapping)
//! z      = (z ^ (z >> 27)) * 0x94D049BB133111EB  (wrapping)
//! output = z ^ (z >> 31)
//! ```
//!
//! * uniform in [0, 1): `(output >> 11) * 2^-53`
//! * integer below `n`: high 64 bits of the 128-bit product `output * n`
//! * phase in (−π, π]: `π − 2π·u` for a uniform `u`
//! * standard normal: Box–Muller on two uniforms, `u1' = 1 − u1`,
//!   `sqrt(−2 ln u1') · cos(2π u2)`; one normal per two draws.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::dsp::wrap_phase;
use crate::edf::{write_edf, EdfError, EdfHeader, SignalSpec, ANNOTATION_LABEL};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("frequency {freq_hz} Hz is not below Nyquist ({nyquist} Hz)")]
    AboveNyquist { freq_hz: f64, nyquist: f64 },
    #[error("lag {0} is outside (-pi, pi]")]
    LagOutOfRange(f64),
    #[error("noise std must be non-negative, got {0}")]
    NegativeNoise(f64),
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error(transparent)]
    Edf(#[from] EdfError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        ((u128::from(self.next_u64()) * u128::from(n)) >> 64) as u64
    }

    pub fn phase(&mut self) -> f64 {
        PI - 2.0 * PI * self.next_f64()
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    }
}

fn check_tone(freq_hz: f64, rate: f64) -> Result<(), SynthError> {
    if !(freq_hz >= 0.0 && freq_hz < rate / 2.0) {
        return Err(SynthError::AboveNyquist {
            freq_hz,
            nyquist: rate / 2.0,
        });
    }
    Ok(())
}

fn check_lag(lag: f64) -> Result<(), SynthError> {
    if !(lag > -PI && lag <= PI) {
        return Err(SynthError::LagOutOfRange(lag));
    }
    Ok(())
}

#[inline]
fn carrier(freq_hz: f64, i: usize, rate: f64) -> f64 {
    2.0 * PI * freq_hz * i as f64 / rate
}

/// `cos(2πft)` and `cos(2πft − lag)`.
pub fn gen_constant_lag_pair(
    freq_hz: f64,
    lag: f64,
    n: usize,
    rate: f64,
) -> Result<[Vec<f64>; 2], SynthError> {
    check_tone(freq_hz, rate)?;
    check_lag(lag)?;
    let a = (0..n).map(|i| carrier(freq_hz, i, rate).cos()).collect();
    let b = (0..n)
        .map(|i| (carrier(freq_hz, i, rate) - lag).cos())
        .collect();
    Ok([a, b])
}

/// Two independent i.i.d. uniform phase sequences: the first `n` draws, then the next `n`.
pub fn gen_uniform_phase_pair(n: usize, seed: u64) -> [Vec<f64>; 2] {
    let mut rng = SplitMix64::new(seed);
    let a = (0..n).map(|_| rng.phase()).collect();
    let b = (0..n).map(|_| rng.phase()).collect();
    [a, b]
}

/// Wrapped phases of the noisy coupled pair: channel 1 follows channel 0
/// with lag `lag` plus i.i.d. Gaussian jitter of std `noise_std` radians.
pub fn noisy_coupled_phases(
    freq_hz: f64,
    lag: f64,
    noise_std: f64,
    n: usize,
    rate: f64,
    seed: u64,
) -> Result<[Vec<f64>; 2], SynthError> {
    let raw = noisy_coupled_raw(freq_hz, lag, noise_std, n, rate, seed)?;
    let [a, b] = raw;
    Ok([
        a.into_iter().map(wrap_phase).collect(),
        b.into_iter().map(wrap_phase).collect(),
    ])
}

fn noisy_coupled_raw(
    freq_hz: f64,
    lag: f64,
    noise_std: f64,
    n: usize,
    rate: f64,
    seed: u64,
) -> Result<[Vec<f64>; 2], SynthError> {
    check_tone(freq_hz, rate)?;
    check_lag(lag)?;
    if noise_std.is_nan() || noise_std < 0.0 {
        return Err(SynthError::NegativeNoise(noise_std));
    }
    let mut rng = SplitMix64::new(seed);
    let a: Vec<f64> = (0..n).map(|i| carrier(freq_hz, i, rate)).collect();
    let b = a
        .iter()
        .map(|&p| {
            let jitter = if noise_std > 0.0 {
                noise_std * rng.normal()
            } else {
                0.0
            };
            p - lag + jitter
        })
        .collect();
    Ok([a, b])
}

/// Signals `cos` of the noisy coupled phases. With `noise_std == 0` this
/// equals [`gen_constant_lag_pair`] exactly.
pub fn gen_noisy_coupled_pair(
    freq_hz: f64,
    lag: f64,
    noise_std: f64,
    n: usize,
    rate: f64,
    seed: u64,
) -> Result<[Vec<f64>; 2], SynthError> {
    let [a, b] = noisy_coupled_raw(freq_hz, lag, noise_std, n, rate, seed)?;
    Ok([
        a.into_iter().map(f64::cos).collect(),
        b.into_iter().map(f64::cos).collect(),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SynthKind {
    ConstantLagPair,
    UniformRandomPhases,
    SinusoidChannel,
    NoisyCoupledPair,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub kind: SynthKind,
    pub freq_hz: f64,
    pub lag: f64,
    pub noise_std: f64,
    pub n_samples: usize,
    pub sample_rate: f64,
    pub seed: u64,
}

impl SynthSpec {
    /// Channels (signals, or phases for `UniformRandomPhases`).
    pub fn generate(&self) -> Result<Vec<Vec<f64>>, SynthError> {
        let out = match self.kind {
            SynthKind::ConstantLagPair => {
                gen_constant_lag_pair(self.freq_hz, self.lag, self.n_samples, self.sample_rate)?
                    .to_vec()
            }
            SynthKind::UniformRandomPhases => {
                gen_uniform_phase_pair(self.n_samples, self.seed).to_vec()
            }
            SynthKind::SinusoidChannel => {
                check_tone(self.freq_hz, self.sample_rate)?;
                check_lag(self.lag)?;
                vec![(0..self.n_samples)
                    .map(|i| (carrier(self.freq_hz, i, self.sample_rate) - self.lag).cos())
                    .collect()]
            }
            SynthKind::NoisyCoupledPair => gen_noisy_coupled_pair(
                self.freq_hz,
                self.lag,
                self.noise_std,
                self.n_samples,
                self.sample_rate,
                self.seed,
            )?
            .to_vec(),
        };
        Ok(out)
    }
}

/// Encodes physical-unit channels as a 16-bit EDF image with 1 s records,
/// optionally followed by an (empty) annotation stream.
pub fn encode_edf(
    labels: &[String],
    data: &[Vec<f64>],
    sample_rate: usize,
    with_annotations: bool,
) -> Result<Vec<u8>, SynthError> {
    if labels.len() != data.len() || data.is_empty() || sample_rate == 0 {
        return Err(SynthError::Invalid("labels/data/sample rate".into()));
    }
    let n = data[0].len();
    if n == 0 || !n.is_multiple_of(sample_rate) || data.iter().any(|c| c.len() != n) {
        return Err(SynthError::Invalid(format!(
            "channel lengths must be equal whole seconds at {sample_rate} Hz"
        )));
    }
    let peak = data
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0)
        .ceil();
    let (dmin, dmax) = (-32768i32, 32767i32);
    let mut specs = Vec::new();
    let mut digital = Vec::new();
    for (label, ch) in labels.iter().zip(data) {
        let spec = SignalSpec {
            label: label.clone(),
            transducer: String::new(),
            physical_dimension: "uV".into(),
            physical_min: -peak,
            physical_max: peak,
            digital_min: dmin,
            digital_max: dmax,
            prefiltering: String::new(),
            samples_per_record: sample_rate,
            reserved: String::new(),
        };
        let span = f64::from(dmax - dmin);
        digital.push(
            ch.iter()
                .map(|&x| {
                    let d = (x + peak) / (2.0 * peak) * span + f64::from(dmin);
                    d.round().clamp(f64::from(dmin), f64::from(dmax)) as i16
                })
                .collect(),
        );
        specs.push(spec);
    }
    let n_records = n / sample_rate;
    if with_annotations {
        specs.push(SignalSpec {
            label: ANNOTATION_LABEL.into(),
            transducer: String::new(),
            physical_dimension: String::new(),
            physical_min: -1.0,
            physical_max: 1.0,
            digital_min: dmin,
            digital_max: dmax,
            prefiltering: String::new(),
            samples_per_record: 8,
            reserved: String::new(),
        });
        digital.push(vec![0; 8 * n_records]);
    }
    let header = EdfHeader {
        version: "0".into(),
        patient_id: "X".into(),
        recording_id: "synthetic".into(),
        start_date: "01.01.09".into(),
        start_time: "00.00.00".into(),
        header_bytes: 0,
        reserved: if with_annotations {
            "EDF+C".into()
        } else {
            String::new()
        },
        n_data_records: n_records,
        record_duration_s: 1.0,
        n_signals: specs.len(),
    };
    Ok(write_edf(&header, &specs, &digital)?)
}

/// A cohort of synthetic subjects whose channels carry a subject-specific
/// coupling pattern: channel `c` of subject `s` is
/// `A cos(2πft − lag[s][c] + jitter)` with i.i.d. Gaussian phase jitter of
/// std `jitter[s][c]` radians, plus white noise of std `noise_std`. Lags and
/// jitter stds follow a pattern shared by the cohort, offset per subject by
/// N(0, individuality²).
/// Each recording draws fresh noise; the pattern is fixed per subject.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCohort {
    pub n_subjects: usize,
    pub n_channels: usize,
    pub duration_s: usize,
    pub sample_rate: usize,
    pub freq_hz: f64,
    pub amplitude: f64,
    pub jitter_range: (f64, f64),
    /// Spread of the subject-specific lag offsets around the shared pattern (rad).
    pub individuality: f64,
    pub noise_std: f64,
    pub seed: u64,
}

impl Default for SyntheticCohort {
    fn default() -> Self {
        SyntheticCohort {
            n_subjects: 6,
            n_channels: 64,
            duration_s: 60,
            sample_rate: 160,
            freq_hz: 37.0,
            amplitude: 1.0,
            jitter_range: (0.2, 1.6),
            individuality: 0.1,
            noise_std: 1.0,
            seed: 2024,
        }
    }
}

impl SyntheticCohort {
    pub fn subject_id(k: usize) -> String {
        format!("S{:03}", k + 1)
    }

    fn pattern(&self, subject: usize) -> (Vec<f64>, Vec<f64>) {
        let mut shared = SplitMix64::new(self.seed);
        let mut rng = SplitMix64::new(self.seed ^ (0xA5A5_0000 + subject as u64));
        let (lo, hi) = self.jitter_range;
        let lags = (0..self.n_channels)
            .map(|_| shared.phase() + self.individuality * rng.normal())
            .collect();
        let jitter = (0..self.n_channels)
            .map(|_| {
                (lo + (hi - lo) * shared.next_f64() + self.individuality * rng.normal()).max(0.0)
            })
            .collect();
        (lags, jitter)
    }

    /// Channels x samples for one recording (`run` selects the noise stream).
    pub fn recording(&self, subject: usize, run: u32) -> Vec<Vec<f64>> {
        let (lags, jitter) = self.pattern(subject);
        let n = self.duration_s * self.sample_rate;
        let rate = self.sample_rate as f64;
        let mut rng = SplitMix64::new(
            self.seed
                .wrapping_mul(0x1000_0000_01B3)
                .wrapping_add(((subject as u64) << 8) + u64::from(run)),
        );
        (0..self.n_channels)
            .map(|c| {
                (0..n)
                    .map(|i| {
                        let phase =
                            carrier(self.freq_hz, i, rate) - lags[c] + jitter[c] * rng.normal();
                        self.amplitude * phase.cos() + self.noise_std * rng.normal()
                    })
                    .collect()
            })
            .collect()
    }

    /// Writes `<root>/S###/S###R01.edf` and `S###R02.edf` for every subject.
    pub fn write_dataset(&self, root: &Path) -> Result<(), SynthError> {
        let labels: Vec<String> = (0..self.n_channels).map(|c| format!("Ch{c}.")).collect();
        for s in 0..self.n_subjects {
            let id = Self::subject_id(s);
            let dir = root.join(&id);
            fs::create_dir_all(&dir)?;
            for run in [1u32, 2] {
                let data = self.recording(s, run);
                let bytes = encode_edf(&labels, &data, self.sample_rate, true)?;
                fs::write(dir.join(format!("{id}R{run:02}.edf")), bytes)?;
            }
        }
        Ok(())
    }
}
