//! Zero-phase Butterworth low-pass filtering.
//!
//! The detector needs two low-pass stages (gravity estimation at 0.25 Hz and
//! yaw-rate smoothing at the configured cutoff), both free of group delay so
//! that turn boundaries are not biased in time. This module provides a
//! 4th-order Butterworth realised as a cascade of two biquad sections,
//! applied forward and backward ([`filtfilt`]).
//!
//! Edge handling: the input is extended by odd reflection about the end
//! points and each biquad starts from its constant-input steady state, so a
//! constant signal passes through bit-exactly and step-like edges produce no
//! start-up transient.

/// One second-order IIR section in transposed direct form II.
///
/// Coefficients are normalised (a0 = 1).
#[derive(Debug, Clone, Copy)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Biquad {
    /// Low-pass section with the bilinear-transform mapping of an analog
    /// resonator at `cutoff_hz` with quality factor `q`.
    pub fn lowpass(cutoff_hz: f64, sample_rate_hz: f64, q: f64) -> Self {
        let w0 = 2.0 * std::f64::consts::PI * cutoff_hz / sample_rate_hz;
        let (sin, cos) = w0.sin_cos();
        let alpha = sin / (2.0 * q);
        let a0 = 1.0 + alpha;
        Biquad {
            b0: (1.0 - cos) / 2.0 / a0,
            b1: (1.0 - cos) / a0,
            b2: (1.0 - cos) / 2.0 / a0,
            a1: -2.0 * cos / a0,
            a2: (1.0 - alpha) / a0,
        }
    }

    /// DC gain of the section.
    fn dc_gain(&self) -> f64 {
        (self.b0 + self.b1 + self.b2) / (1.0 + self.a1 + self.a2)
    }

    /// Runs the section over `x` in place, starting from the steady state
    /// for a constant input equal to the first sample.
    fn run(&self, x: &mut [f64]) {
        if x.is_empty() {
            return;
        }
        // Steady state for constant x0: y = x0·H(1), then solve the DF2T
        // state equations for s1, s2.
        let x0 = x[0];
        let y0 = x0 * self.dc_gain();
        let mut s2 = self.b2 * x0 - self.a2 * y0;
        let mut s1 = self.b1 * x0 - self.a1 * y0 + s2;
        for v in x.iter_mut() {
            let xn = *v;
            let yn = self.b0 * xn + s1;
            s1 = self.b1 * xn - self.a1 * yn + s2;
            s2 = self.b2 * xn - self.a2 * yn;
            *v = yn;
        }
    }
}

/// Quality factors of the two sections of a 4th-order Butterworth low-pass
/// (poles at 22.5° and 67.5° off the imaginary axis).
const BUTTER4_Q: [f64; 2] = [0.541196100146197, 1.3065629648763764];

/// Cascade of two biquads forming a 4th-order Butterworth low-pass.
pub fn butterworth4_lowpass(cutoff_hz: f64, sample_rate_hz: f64) -> [Biquad; 2] {
    [
        Biquad::lowpass(cutoff_hz, sample_rate_hz, BUTTER4_Q[0]),
        Biquad::lowpass(cutoff_hz, sample_rate_hz, BUTTER4_Q[1]),
    ]
}

/// Zero-phase filtering: run the cascade forward, then backward.
///
/// The signal is padded at both ends with its odd reflection (length
/// `3·(2·n_sections+1)`, clamped to `n−1`) before filtering; the pad is
/// stripped from the result. Squares the magnitude response and cancels the
/// phase response, so features keep their position in time.
pub fn filtfilt(sections: &[Biquad], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return x.to_vec();
    }
    let pad = (3 * (2 * sections.len() + 1)).min(n - 1);

    let mut ext = Vec::with_capacity(n + 2 * pad);
    for i in (1..=pad).rev() {
        ext.push(2.0 * x[0] - x[i]);
    }
    ext.extend_from_slice(x);
    for i in (n - 1 - pad..n - 1).rev() {
        ext.push(2.0 * x[n - 1] - x[i]);
    }

    for s in sections {
        s.run(&mut ext);
    }
    ext.reverse();
    for s in sections {
        s.run(&mut ext);
    }
    ext.reverse();

    ext[pad..pad + n].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine(freq: f64, rate: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| (2.0 * PI * freq * i as f64 / rate).sin()).collect()
    }

    fn rms(x: &[f64]) -> f64 {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }

    #[test]
    fn constant_signal_is_unchanged() {
        let sections = butterworth4_lowpass(1.5, 50.0);
        let x = vec![3.25; 400];
        let y = filtfilt(&sections, &x);
        for v in y {
            assert!((v - 3.25).abs() < 1e-9, "constant drifted: {v}");
        }
    }

    #[test]
    fn passband_sine_preserved() {
        let sections = butterworth4_lowpass(1.5, 50.0);
        let x = sine(0.2, 50.0, 2000);
        let y = filtfilt(&sections, &x);
        // interior, away from edges
        let ratio = rms(&y[250..1750]) / rms(&x[250..1750]);
        assert!((ratio - 1.0).abs() < 0.01, "passband gain {ratio}");
    }

    #[test]
    fn stopband_sine_attenuated() {
        let sections = butterworth4_lowpass(1.5, 50.0);
        let x = sine(6.0, 50.0, 2000);
        let y = filtfilt(&sections, &x);
        let ratio = rms(&y[250..1750]) / rms(&x[250..1750]);
        // two passes of a 4th-order filter at 4x cutoff: well below 1%
        assert!(ratio < 0.01, "stopband leak {ratio}");
    }

    #[test]
    fn zero_phase_keeps_peak_position() {
        let sections = butterworth4_lowpass(1.5, 50.0);
        // symmetric bump centred at sample 500
        let x: Vec<f64> = (0..1000)
            .map(|i| (-((i as f64 - 500.0) / 40.0).powi(2)).exp())
            .collect();
        let y = filtfilt(&sections, &x);
        let peak = y
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap();
        assert!((peak as i64 - 500).abs() <= 1, "peak moved to {peak}");
    }

    #[test]
    fn linearity() {
        let sections = butterworth4_lowpass(1.5, 50.0);
        let x = sine(0.7, 50.0, 600);
        let y1 = filtfilt(&sections, &x);
        let x2: Vec<f64> = x.iter().map(|v| 2.5 * v).collect();
        let y2 = filtfilt(&sections, &x2);
        for (a, b) in y1.iter().zip(&y2) {
            assert!((2.5 * a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn short_inputs_do_not_panic() {
        let sections = butterworth4_lowpass(1.5, 50.0);
        for n in 0..6 {
            let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
            let y = filtfilt(&sections, &x);
            assert_eq!(y.len(), n);
        }
    }
}
