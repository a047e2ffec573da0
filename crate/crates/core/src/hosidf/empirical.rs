use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::{fft_spectrum, Complex64, J};
use crate::reset::{Chain, Excitation, LoopMode, ResetPath, SimConfig, Simulator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalOptions {
    /// Periods simulated and discarded before the analysis window.
    pub settle_periods: usize,
    /// Minimum settling time in units of the slowest time constant of the path.
    pub settle_time_constants: f64,
    /// Periods in the analysis window (rounded up to a power of two).
    pub window_periods: usize,
    /// Minimum samples per period (rounded up to a power of two).
    pub min_samples_per_period: usize,
    /// Largest tolerated RMS change between the last two periods, relative to the signal RMS.
    pub drift_tol: f64,
}

impl Default for EmpiricalOptions {
    fn default() -> Self {
        Self { settle_periods: 10, settle_time_constants: 15.0, window_periods: 4, min_samples_per_period: 4096, drift_tol: 1e-4 }
    }
}

/// Harmonics `1..=n_max` of a reset path measured from a simulated steady-state
/// response to `sin(ωt)`. Entry `n - 1` is the `n`-th harmonic, sine-referenced.
pub fn hosidf_empirical(path: &ResetPath, omega: f64, n_max: usize, opts: &EmpiricalOptions) -> Result<Vec<Complex64>> {
    if opts.settle_periods < 10 {
        return Err(Error::InvalidParameter("at least 10 settling periods are required".into()));
    }
    let chain = Chain::from_path(path)?;
    let omega_max = chain.max_corner();
    let mut per_period = opts.min_samples_per_period.max(2 * n_max + 2).next_power_of_two();
    if omega_max > 0.0 {
        let needed = (2.0 * PI / omega / SimConfig::for_corner(omega_max, 1.0).step).ceil() as usize;
        per_period = per_period.max(needed.next_power_of_two());
    }
    let window = opts.window_periods.max(1).next_power_of_two();
    let step = 2.0 * PI / omega / per_period as f64;
    let slowest = chain.min_corner();
    let mut settle = opts.settle_periods;
    if slowest.is_finite() {
        settle = settle.max((opts.settle_time_constants / slowest * omega / (2.0 * PI)).ceil() as usize);
    }
    let periods = settle + window;
    // Half-step phase offset keeps zero crossings off the sample grid.
    let cfg = SimConfig::with_step(step, periods as f64 * 2.0 * PI / omega);
    let trace = Simulator::new(&chain, LoopMode::Open, Excitation::Sine { amplitude: 1.0, omega, phase: 0.5 * omega * step }, cfg)?.run()?;

    let len = window * per_period;
    let start = trace.len() - 1 - len;
    let output = &trace.u[start..start + len];
    let input = &trace.e[start..start + len];

    let last = &output[len - per_period..];
    let prev = &output[len - 2 * per_period..len - per_period];
    let rms = |v: &[f64]| (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt();
    let diff: Vec<f64> = last.iter().zip(prev).map(|(a, b)| a - b).collect();
    let drift = rms(&diff) / rms(last).max(f64::MIN_POSITIVE);
    if drift > opts.drift_tol {
        return Err(Error::Transient { drift });
    }

    let fs = 1.0 / step;
    let sx = fft_spectrum(input, fs)?;
    let sy = fft_spectrum(output, fs)?;
    // Convert cosine-referenced bins to sine references, measured against the input phase.
    let xin = sx.bins[window] * J;
    let unit = xin / xin.norm();
    Ok((1..=n_max)
        .map(|n| {
            let bin = n * window;
            if bin >= sy.bins.len() {
                return Complex64::new(f64::NAN, f64::NAN);
            }
            sy.bins[bin] * J / xin.norm() * unit.powi(-(n as i32))
        })
        .collect())
}
