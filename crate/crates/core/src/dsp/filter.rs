//! Butterworth band-pass design (bilinear transform with pre-warping) and
//! forward-backward filtering in cascaded second-order sections.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use super::{BandDefinition, DspError};

/// Per-pass Butterworth prototype order.
pub const DEFAULT_ORDER: usize = 4;

/// Second-order section, `a[0] == 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        let num = self.b[0] + z_inv * self.b[1] + z2 * self.b[2];
        let den = self.a[0] + z_inv * self.a[1] + z2 * self.a[2];
        num / den
    }

    fn dc_gain(&self) -> f64 {
        self.b.iter().sum::<f64>() / self.a.iter().sum::<f64>()
    }

    /// Transposed direct-form II state for a unit step in steady state.
    fn step_state(&self) -> [f64; 2] {
        let y = self.dc_gain();
        let z2 = self.b[2] - self.a[2] * y;
        let z1 = self.b[1] - self.a[1] * y + z2;
        [z1, z2]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterSpec {
    pub band: BandDefinition,
    pub order: usize,
    pub sample_rate: f64,
    pub sections: Vec<Biquad>,
    /// Digital poles, `2 * order` of them.
    pub poles: Vec<Complex64>,
}

impl FilterSpec {
    /// Complex frequency response at `freq_hz`.
    pub fn response(&self, freq_hz: f64) -> Complex64 {
        let w = 2.0 * PI * freq_hz / self.sample_rate;
        let z_inv = Complex64::from_polar(1.0, -w);
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(z_inv))
    }

    pub fn magnitude(&self, freq_hz: f64) -> f64 {
        self.response(freq_hz).norm()
    }

    pub fn is_stable(&self) -> bool {
        self.poles.iter().all(|p| p.norm() < 1.0)
    }

    /// Expanded numerator polynomial in `z^-1`.
    pub fn numerator(&self) -> Vec<f64> {
        self.sections
            .iter()
            .fold(vec![1.0], |acc, s| poly_mul(&acc, &s.b))
    }

    /// Expanded denominator polynomial in `z^-1`, leading coefficient 1.
    pub fn denominator(&self) -> Vec<f64> {
        self.sections
            .iter()
            .fold(vec![1.0], |acc, s| poly_mul(&acc, &s.a))
    }

    /// Edge padding used by [`zero_phase_filter`].
    pub fn pad_len(&self) -> usize {
        3 * 3 * self.order
    }

    /// Causal single pass with zero initial state.
    pub fn filter(&self, signal: &[f64]) -> Vec<f64> {
        let mut out = signal.to_vec();
        for s in &self.sections {
            run_section(s, &mut out, [0.0, 0.0]);
        }
        out
    }

    fn filter_from_steady_state(&self, signal: &mut [f64]) {
        let Some(&x0) = signal.first() else { return };
        let mut scale = x0;
        for s in &self.sections {
            let zi = s.step_state();
            run_section(s, signal, [zi[0] * scale, zi[1] * scale]);
            scale *= s.dc_gain();
        }
    }
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn run_section(s: &Biquad, data: &mut [f64], state: [f64; 2]) {
    let [b0, b1, b2] = s.b;
    let [_, a1, a2] = s.a;
    let [mut z1, mut z2] = state;
    for x in data.iter_mut() {
        let input = *x;
        let y = b0 * input + z1;
        z1 = b1 * input - a1 * y + z2;
        z2 = b2 * input - a2 * y;
        *x = y;
    }
}

/// Butterworth band-pass of prototype order `order` (so `2 * order` poles),
/// mapped to the z-plane by the bilinear transform with both edges pre-warped.
pub fn design_bandpass(
    band: &BandDefinition,
    sample_rate: f64,
    order: usize,
) -> Result<FilterSpec, DspError> {
    band.check(sample_rate)?;
    if order == 0 {
        return Err(DspError::InvalidOrder(order));
    }
    let fs2 = 2.0 * sample_rate;
    let warp = |f: f64| fs2 * (PI * f / sample_rate).tan();
    let lo = warp(band.low_hz);
    let hi = warp(band.high_hz);
    let bw = hi - lo;
    let center_sq = lo * hi;

    let mut analog = Vec::with_capacity(2 * order);
    for k in 0..order {
        let theta = PI * (2 * k + 1) as f64 / (2 * order) as f64;
        let proto = Complex64::new(-theta.sin(), theta.cos());
        let half = proto * (bw / 2.0);
        let disc = (half * half - center_sq).sqrt();
        analog.push(half + disc);
        analog.push(half - disc);
    }

    // order zeros at s = 0 map to z = 1, order zeros at infinity map to z = -1
    let mut gain = Complex64::new(bw.powi(order as i32) * fs2.powi(order as i32), 0.0);
    let mut poles = Vec::with_capacity(analog.len());
    for s in &analog {
        gain /= fs2 - s;
        poles.push((fs2 + s) / (fs2 - s));
    }
    let gain = gain.re;

    let mut upper: Vec<Complex64> = poles.iter().copied().filter(|p| p.im > 1e-12).collect();
    let mut real: Vec<f64> = poles
        .iter()
        .filter(|p| p.im.abs() <= 1e-12)
        .map(|p| p.re)
        .collect();
    upper.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
    real.sort_by(f64::total_cmp);

    let mut sections: Vec<Biquad> = upper
        .iter()
        .map(|p| Biquad {
            b: [1.0, 0.0, -1.0],
            a: [1.0, -2.0 * p.re, p.norm_sqr()],
        })
        .collect();
    for pair in real.chunks(2) {
        let (r1, r2) = (pair[0], pair.get(1).copied().unwrap_or(0.0));
        sections.push(Biquad {
            b: [1.0, 0.0, -1.0],
            a: [1.0, -(r1 + r2), r1 * r2],
        });
    }
    for c in sections[0].b.iter_mut() {
        *c *= gain;
    }

    Ok(FilterSpec {
        band: band.clone(),
        order,
        sample_rate,
        sections,
        poles,
    })
}

/// Forward-backward filtering. Both ends are extended by odd reflection of
/// `pad_len()` samples and each pass starts from the steady state for its
/// first input sample; the padding is trimmed afterwards.
pub fn zero_phase_filter(signal: &[f64], spec: &FilterSpec) -> Result<Vec<f64>, DspError> {
    let pad = spec.pad_len();
    let n = signal.len();
    if n <= pad {
        return Err(DspError::SignalTooShort {
            len: n,
            min: pad + 1,
        });
    }
    if let Some(i) = signal.iter().position(|v| !v.is_finite()) {
        return Err(DspError::NonFinite { index: i });
    }

    let first = signal[0];
    let last = signal[n - 1];
    let mut ext = Vec::with_capacity(n + 2 * pad);
    ext.extend((1..=pad).rev().map(|i| 2.0 * first - signal[i]));
    ext.extend_from_slice(signal);
    ext.extend((1..=pad).map(|i| 2.0 * last - signal[n - 1 - i]));

    spec.filter_from_steady_state(&mut ext);
    ext.reverse();
    spec.filter_from_steady_state(&mut ext);
    ext.reverse();

    Ok(ext[pad..pad + n].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::Band;

    #[test]
    fn rejects_band_above_nyquist() {
        let band = BandDefinition::custom(30.0, 90.0);
        assert!(matches!(
            design_bandpass(&band, 160.0, 4),
            Err(DspError::InvalidBand { .. })
        ));
    }

    #[test]
    fn sections_and_poles() {
        let f = design_bandpass(&Band::HighBeta.definition(), 160.0, 4).unwrap();
        assert_eq!(f.sections.len(), 4);
        assert_eq!(f.poles.len(), 8);
        assert!(f.is_stable());
        assert_eq!(f.numerator().len(), 9);
        assert_eq!(f.denominator()[0], 1.0);
    }

    #[test]
    fn too_short_signal() {
        let f = design_bandpass(&Band::Gamma.definition(), 160.0, 4).unwrap();
        assert_eq!(f.pad_len(), 36);
        assert!(matches!(
            zero_phase_filter(&[0.0; 36], &f),
            Err(DspError::SignalTooShort { len: 36, min: 37 })
        ));
        assert!(zero_phase_filter(&[0.0; 37], &f).is_ok());
    }

    #[test]
    fn steady_state_of_step() {
        // Starting from the step state, a constant input stays at the DC gain.
        let s = Biquad {
            b: [0.2, 0.3, 0.1],
            a: [1.0, -0.5, 0.2],
        };
        let mut x = vec![1.0; 16];
        run_section(&s, &mut x, s.step_state());
        for v in x {
            assert!((v - s.dc_gain()).abs() < 1e-14);
        }
    }
}
