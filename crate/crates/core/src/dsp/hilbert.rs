//! Analytic signal by frequency-domain Hilbert transform.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::{wrap_phase, DspError};

/// Analytic signal of a real sequence: forward FFT, zero the negative
/// frequencies, double the strictly positive ones (DC and, for even
/// lengths, Nyquist stay unscaled), inverse FFT.
pub fn analytic_signal(signal: &[f64]) -> Result<Vec<Complex64>, DspError> {
    let n = signal.len();
    if n < 4 {
        return Err(DspError::SignalTooShort { len: n, min: 4 });
    }
    if let Some(i) = signal.iter().position(|v| !v.is_finite()) {
        return Err(DspError::NonFinite { index: i });
    }

    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);

    let mut buf: Vec<Complex64> = signal.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    forward.process(&mut buf);

    let positive_end = n.div_ceil(2); // exclusive; excludes Nyquist for even n
    for c in &mut buf[1..positive_end] {
        *c *= 2.0;
    }
    let negative_start = n / 2 + 1;
    for c in &mut buf[negative_start..] {
        *c = Complex64::new(0.0, 0.0);
    }

    inverse.process(&mut buf);
    let scale = 1.0 / n as f64;
    for c in &mut buf {
        *c *= scale;
    }
    Ok(buf)
}

/// Instantaneous phase in (−π, π].
pub fn analytic_phase(signal: &[f64]) -> Result<Vec<f64>, DspError> {
    Ok(analytic_signal(signal)?
        .iter()
        .map(|c| wrap_phase(c.im.atan2(c.re)))
        .collect())
}
