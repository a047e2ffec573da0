use rustfft::FftPlanner;

use super::Complex64;
use crate::error::{Error, Result};

/// Single-sided amplitude spectrum. Bin `k` holds the cosine-referenced phasor of
/// the component at `k * sample_rate / len` Hz: a unit sinusoid gives magnitude 1.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub sample_rate: f64,
    pub len: usize,
    pub bins: Vec<Complex64>,
}

impl Spectrum {
    pub fn frequency(&self, bin: usize) -> f64 {
        bin as f64 * self.sample_rate / self.len as f64
    }

    pub fn amplitude(&self, bin: usize) -> f64 {
        self.bins[bin].norm()
    }

    pub fn phase_deg(&self, bin: usize) -> f64 {
        self.bins[bin].arg().to_degrees()
    }

    /// Time samples whose spectrum is `self`.
    pub fn reconstruct(&self) -> Vec<f64> {
        let n = self.len;
        let nf = n as f64;
        let mut full = vec![Complex64::new(0.0, 0.0); n];
        for (k, &c) in self.bins.iter().enumerate() {
            let edge = k == 0 || (n.is_multiple_of(2) && k == n / 2);
            if edge {
                full[k] = c * nf;
            } else {
                full[k] = c * nf / 2.0;
                full[n - k] = (c * nf / 2.0).conj();
            }
        }
        FftPlanner::new().plan_fft_inverse(n).process(&mut full);
        full.iter().map(|v| v.re / nf).collect()
    }
}

pub fn fft_spectrum(samples: &[f64], sample_rate: f64) -> Result<Spectrum> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::InvalidParameter(format!("spectrum needs at least 2 samples, got {n}")));
    }
    if !(sample_rate > 0.0) {
        return Err(Error::InvalidParameter(format!("sample rate must be positive, got {sample_rate}")));
    }
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let nf = n as f64;
    let bins = (0..=n / 2)
        .map(|k| {
            let edge = k == 0 || (n.is_multiple_of(2) && k == n / 2);
            if edge {
                buf[k] / nf
            } else {
                buf[k] * 2.0 / nf
            }
        })
        .collect();
    Ok(Spectrum { sample_rate, len: n, bins })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_sine_is_minus_ninety() {
        let fs = 1000.0;
        let x: Vec<f64> = (0..1000).map(|i| (2.0 * PI * 10.0 * i as f64 / fs).sin()).collect();
        let s = fft_spectrum(&x, fs).unwrap();
        assert!((s.frequency(10) - 10.0).abs() < 1e-12);
        assert!((s.amplitude(10) - 1.0).abs() < 1e-12);
        assert!((s.phase_deg(10) + 90.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn reconstruction_round_trip(x in proptest::collection::vec(-10.0f64..10.0, 2..300)) {
            let s = fft_spectrum(&x, 1.0).unwrap();
            let y = s.reconstruct();
            let scale = x.iter().map(|v| v.abs()).fold(1.0, f64::max);
            for (a, b) in x.iter().zip(&y) {
                prop_assert!((a - b).abs() <= 1e-10 * scale);
            }
        }
    }
}
