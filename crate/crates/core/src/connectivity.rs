//! Epoch segmentation and phase-synchronization connectivity (PLI, PLV).

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::dsp::{BandDefinition, PhaseSeries};
use crate::edf::Condition;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConnectivityError {
    #[error("phase sequences differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {min} samples, got {len}")]
    TooFewSamples { len: usize, min: usize },
    #[error("window {window_s} s is not a whole number of samples at {sample_rate} Hz")]
    FractionalWindow { window_s: f64, sample_rate: f64 },
    #[error("window of {window} samples exceeds record of {available}")]
    WindowTooLong { window: usize, available: usize },
    #[error("window of {window} samples is not a multiple of the {block}-sample block")]
    BlockMisaligned { window: usize, block: usize },
    #[error("invalid window grid: {0}")]
    InvalidGrid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Pli,
    Plv,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Pli, Method::Plv];

    pub fn key(self) -> &'static str {
        match self {
            Method::Pli => "PLI",
            Method::Plv => "PLV",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "PLI" => Ok(Method::Pli),
            "PLV" => Ok(Method::Plv),
            other => Err(format!("unknown method {other:?} (expected PLI or PLV)")),
        }
    }
}

/// Epoch lengths in seconds, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowGrid {
    pub lengths_s: Vec<f64>,
}

impl Default for WindowGrid {
    /// 0.5 s to 12 s in steps of 0.5 s.
    fn default() -> Self {
        WindowGrid {
            lengths_s: (1..=24).map(|k| k as f64 * 0.5).collect(),
        }
    }
}

impl WindowGrid {
    pub fn new(lengths_s: Vec<f64>) -> Result<Self, ConnectivityError> {
        if lengths_s.is_empty() {
            return Err(ConnectivityError::InvalidGrid("empty".into()));
        }
        if lengths_s.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ConnectivityError::InvalidGrid(
                "lengths must be strictly ascending".into(),
            ));
        }
        if lengths_s.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(ConnectivityError::InvalidGrid(
                "lengths must be positive".into(),
            ));
        }
        Ok(WindowGrid { lengths_s })
    }

    pub fn validate(&self, sample_rate: f64) -> Result<Vec<usize>, ConnectivityError> {
        self.lengths_s
            .iter()
            .map(|&w| window_samples(w, sample_rate))
            .collect()
    }
}

/// Whole number of samples covered by `window_s`; at least 2.
pub fn window_samples(window_s: f64, sample_rate: f64) -> Result<usize, ConnectivityError> {
    let exact = window_s * sample_rate;
    let n = exact.round();
    if !(exact.is_finite()) || (exact - n).abs() > 1e-9 * exact.abs().max(1.0) {
        return Err(ConnectivityError::FractionalWindow {
            window_s,
            sample_rate,
        });
    }
    let n = n as usize;
    if n < 2 {
        return Err(ConnectivityError::TooFewSamples { len: n, min: 2 });
    }
    Ok(n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub subject_id: String,
    pub condition: Condition,
    pub band: BandDefinition,
}

impl Provenance {
    fn of(series: &PhaseSeries) -> Self {
        Provenance {
            subject_id: series.subject_id.clone(),
            condition: series.condition,
            band: series.band.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseEpoch {
    /// channels x window samples
    pub phases: Vec<Vec<f64>>,
    pub epoch_index: usize,
    pub window_s: f64,
    pub provenance: Provenance,
}

/// Non-overlapping epochs contiguous from sample 0; the trailing remainder is dropped.
pub fn segment_epochs(
    series: &PhaseSeries,
    window_s: f64,
) -> Result<Vec<PhaseEpoch>, ConnectivityError> {
    let w = window_samples(window_s, series.sample_rate)?;
    let n = series.n_samples();
    if w > n {
        return Err(ConnectivityError::WindowTooLong {
            window: w,
            available: n,
        });
    }
    let provenance = Provenance::of(series);
    Ok((0..n / w)
        .map(|e| PhaseEpoch {
            phases: series
                .phases
                .iter()
                .map(|ch| ch[e * w..(e + 1) * w].to_vec())
                .collect(),
            epoch_index: e,
            window_s,
            provenance: provenance.clone(),
        })
        .collect())
}

fn check_pair(a: &[f64], b: &[f64]) -> Result<(), ConnectivityError> {
    if a.len() != b.len() {
        return Err(ConnectivityError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(ConnectivityError::TooFewSamples { len: 0, min: 1 });
    }
    Ok(())
}

#[inline]
fn lag_sign(a: f64, b: f64) -> i32 {
    let s = (a - b).sin();
    if s > 0.0 {
        1
    } else if s < 0.0 {
        -1
    } else {
        0
    }
}

/// Phase lag index `|mean(sign(sin(a - b)))|`, with sign(0) = 0.
pub fn pli(a: &[f64], b: &[f64]) -> Result<f64, ConnectivityError> {
    check_pair(a, b)?;
    let total: i64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| i64::from(lag_sign(x, y)))
        .sum();
    Ok(total.unsigned_abs() as f64 / a.len() as f64)
}

/// Phase locking value `|mean(exp(i(a - b)))|`.
pub fn plv(a: &[f64], b: &[f64]) -> Result<f64, ConnectivityError> {
    check_pair(a, b)?;
    let (mut re, mut im) = (0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (s, c) = (x - y).sin_cos();
        re += c;
        im += s;
    }
    let n = a.len() as f64;
    Ok((re.hypot(im) / n).min(1.0))
}

pub fn pair_value(method: Method, a: &[f64], b: &[f64]) -> Result<f64, ConnectivityError> {
    match method {
        Method::Pli => pli(a, b),
        Method::Plv => plv(a, b),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectivityMatrix {
    pub n_channels: usize,
    /// Row-major, symmetric.
    pub values: Vec<f64>,
    pub method: Method,
    pub window_s: f64,
    pub epoch_index: usize,
    pub provenance: Provenance,
    /// Channels whose phase is constant across the epoch.
    pub degenerate: Vec<usize>,
}

impl ConnectivityMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_channels + j]
    }
}

pub fn connectivity_matrix(
    epoch: &PhaseEpoch,
    method: Method,
) -> Result<ConnectivityMatrix, ConnectivityError> {
    let c = epoch.phases.len();
    let len = epoch.phases.first().map_or(0, Vec::len);
    if len < 2 {
        return Err(ConnectivityError::TooFewSamples { len, min: 2 });
    }
    let pairs: Vec<(usize, usize)> = upper_pairs(c).collect();
    let upper = pairs
        .par_iter()
        .map(|&(i, j)| pair_value(method, &epoch.phases[i], &epoch.phases[j]))
        .collect::<Result<Vec<f64>, _>>()?;

    let diagonal = match method {
        Method::Pli => 0.0,
        Method::Plv => 1.0,
    };
    let mut values = vec![0.0; c * c];
    for i in 0..c {
        values[i * c + i] = diagonal;
    }
    for (&(i, j), &v) in pairs.iter().zip(&upper) {
        values[i * c + j] = v;
        values[j * c + i] = v;
    }
    let degenerate = epoch
        .phases
        .iter()
        .enumerate()
        .filter(|(_, ch)| ch.iter().all(|&p| p == ch[0]))
        .map(|(i, _)| i)
        .collect();
    Ok(ConnectivityMatrix {
        n_channels: c,
        values,
        method,
        window_s: epoch.window_s,
        epoch_index: epoch.epoch_index,
        provenance: epoch.provenance.clone(),
        degenerate,
    })
}

/// Strictly-upper-triangle index pairs in row-major order.
pub fn upper_pairs(n_channels: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n_channels).flat_map(move |i| (i + 1..n_channels).map(move |j| (i, j)))
}

pub fn n_features(n_channels: usize) -> usize {
    n_channels * n_channels.saturating_sub(1) / 2
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub method: Method,
    pub window_s: f64,
    pub epoch_index: usize,
    pub provenance: Provenance,
}

/// Row-major strictly-upper triangle: (0,1), (0,2), ..., (1,2), ...
pub fn upper_triangle(matrix: &ConnectivityMatrix) -> FeatureVector {
    FeatureVector {
        values: upper_pairs(matrix.n_channels)
            .map(|(i, j)| matrix.get(i, j))
            .collect(),
        method: matrix.method,
        window_s: matrix.window_s,
        epoch_index: matrix.epoch_index,
        provenance: matrix.provenance.clone(),
    }
}

/// Per-pair partial sums over fixed blocks of samples.
///
/// Every epoch whose length is a multiple of the block length is a run of
/// consecutive blocks, so a whole window grid is served from one pass over
/// the phase data. PLI sums are integers and reproduce [`pli`] exactly;
/// PLV sums agree with [`plv`] up to summation order.
#[derive(Debug, Clone)]
pub struct BlockSums {
    pub block_len: usize,
    pub n_blocks: usize,
    pub n_channels: usize,
    pub sample_rate: f64,
    pub provenance: Provenance,
    /// [pair][block]
    sign_sums: Vec<Vec<i32>>,
    /// [pair][block] as (Σcos Δφ, Σsin Δφ)
    phasor_sums: Vec<Vec<(f64, f64)>>,
}

impl BlockSums {
    pub fn new(series: &PhaseSeries, block_len: usize) -> Result<Self, ConnectivityError> {
        let n = series.n_samples();
        if block_len == 0 || block_len > n {
            return Err(ConnectivityError::WindowTooLong {
                window: block_len,
                available: n,
            });
        }
        let n_blocks = n / block_len;
        let pairs: Vec<(usize, usize)> = upper_pairs(series.n_channels()).collect();
        let (sign_sums, phasor_sums): (Vec<_>, Vec<_>) = pairs
            .par_iter()
            .map(|&(i, j)| {
                let a = &series.phases[i];
                let b = &series.phases[j];
                let mut signs = Vec::with_capacity(n_blocks);
                let mut phasors = Vec::with_capacity(n_blocks);
                for k in 0..n_blocks {
                    let range = k * block_len..(k + 1) * block_len;
                    let (mut s, mut re, mut im) = (0i32, 0.0, 0.0);
                    for (&x, &y) in a[range.clone()].iter().zip(&b[range]) {
                        s += lag_sign(x, y);
                        let (si, co) = (x - y).sin_cos();
                        re += co;
                        im += si;
                    }
                    signs.push(s);
                    phasors.push((re, im));
                }
                (signs, phasors)
            })
            .unzip();
        Ok(BlockSums {
            block_len,
            n_blocks,
            n_channels: series.n_channels(),
            sample_rate: series.sample_rate,
            provenance: Provenance::of(series),
            sign_sums,
            phasor_sums,
        })
    }

    /// Feature rows (one per epoch) for a window of `window_s` seconds.
    pub fn features(
        &self,
        method: Method,
        window_s: f64,
    ) -> Result<Vec<Vec<f64>>, ConnectivityError> {
        let w = window_samples(window_s, self.sample_rate)?;
        if w % self.block_len != 0 {
            return Err(ConnectivityError::BlockMisaligned {
                window: w,
                block: self.block_len,
            });
        }
        let k = w / self.block_len;
        if k > self.n_blocks {
            return Err(ConnectivityError::WindowTooLong {
                window: w,
                available: self.n_blocks * self.block_len,
            });
        }
        let n_epochs = self.n_blocks / k;
        let n = w as f64;
        Ok((0..n_epochs)
            .map(|e| {
                let blocks = e * k..(e + 1) * k;
                match method {
                    Method::Pli => self
                        .sign_sums
                        .iter()
                        .map(|s| {
                            let total: i64 = s[blocks.clone()].iter().map(|&v| i64::from(v)).sum();
                            total.unsigned_abs() as f64 / n
                        })
                        .collect(),
                    Method::Plv => self
                        .phasor_sums
                        .iter()
                        .map(|s| {
                            let (re, im) = s[blocks.clone()]
                                .iter()
                                .fold((0.0, 0.0), |(r, i), &(a, b)| (r + a, i + b));
                            (re.hypot(im) / n).min(1.0)
                        })
                        .collect(),
                }
            })
            .collect())
    }
}

/// Largest block length that divides every window of the grid.
pub fn common_block_len(window_samples: &[usize]) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    window_samples.iter().copied().fold(0, gcd)
}
