use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;

use super::LoopConfig;
use crate::error::Result;
use crate::reset::{Excitation, LoopMode, SimConfig, Simulator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityOptions {
    pub amplitude: f64,
    /// Periods per evaluation window; the first window is always discarded.
    pub window_periods: usize,
    /// Consecutive windows must agree to this relative tolerance.
    pub settle_tol: f64,
    /// Upper bound on simulated periods per frequency.
    pub max_periods: usize,
    pub min_samples_per_period: usize,
}

impl Default for SensitivityOptions {
    fn default() -> Self {
        Self { amplitude: 1.0, window_periods: 10, settle_tol: 1e-3, max_periods: 400, min_samples_per_period: 200 }
    }
}

#[derive(Debug, Clone)]
pub struct SensitivityCurve {
    pub omegas: Vec<f64>,
    /// `‖e‖₂ / ‖r‖₂` over the last evaluation window.
    pub values: Vec<f64>,
    /// False where consecutive windows never agreed within the tolerance.
    pub settled: Vec<bool>,
}

impl SensitivityCurve {
    pub fn peak(&self) -> (f64, f64) {
        self.omegas.iter().zip(&self.values).fold((f64::NAN, f64::NEG_INFINITY), |b, (&w, &v)| if v > b.1 { (w, v) } else { b })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["omega", "ratio", "ratio_db", "settled"])?;
        for i in 0..self.omegas.len() {
            w.write_record([
                format!("{:.9e}", self.omegas[i]),
                format!("{:.9e}", self.values[i]),
                format!("{:.6}", crate::numerics::db(self.values[i])),
                self.settled[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn one_frequency(config: &LoopConfig, omega: f64, opts: &SensitivityOptions) -> Result<(f64, bool)> {
    let base = config.sim_config(1.0)?;
    let period = 2.0 * PI / omega;
    // Refine by an integer factor so a plant delay stays a whole number of steps.
    let refine = (base.step * opts.min_samples_per_period as f64 / period).ceil().max(1.0);
    let step = base.step / refine;
    let samples = (opts.window_periods as f64 * period / step).round() as usize;
    let cfg = SimConfig { duration: opts.max_periods as f64 * period, ..SimConfig::with_step(step, 1.0) };
    let excitation = Excitation::sine(opts.amplitude, omega);
    let mut sim = Simulator::new(&config.chain()?, LoopMode::UnityFeedback, excitation.clone(), cfg)?
        .with_divergence_limit(1e3 * opts.amplitude);

    let max_windows = (opts.max_periods / opts.window_periods).max(2);
    let mut previous: Option<f64> = None;
    let mut last = f64::NAN;
    for window in 0..max_windows {
        let (mut ee, mut rr) = (0.0, 0.0);
        for _ in 0..samples {
            sim.step()?;
            let s = sim.sample();
            let r = excitation.at(s.t);
            ee += s.e * s.e;
            rr += r * r;
        }
        last = (ee / rr).sqrt();
        if window >= 2 {
            if let Some(p) = previous {
                if (last - p).abs() <= opts.settle_tol * last {
                    return Ok((last, true));
                }
            }
        }
        previous = Some(last);
    }
    Ok((last, false))
}

/// Closed-loop error-to-reference ratio from simulated sinusoidal responses,
/// evaluated in parallel over frequencies.
pub fn sensitivity_scan(config: &LoopConfig, omegas: &[f64], opts: &SensitivityOptions) -> Result<SensitivityCurve> {
    config.validate()?;
    let results: Vec<(f64, bool)> = omegas.par_iter().map(|&w| one_frequency(config, w, opts)).collect::<Result<_>>()?;
    Ok(SensitivityCurve {
        omegas: omegas.to_vec(),
        values: results.iter().map(|r| r.0).collect(),
        settled: results.iter().map(|r| r.1).collect(),
    })
}
