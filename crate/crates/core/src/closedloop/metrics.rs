use super::LoopConfig;
use crate::error::Result;
use crate::reset::{Excitation, LoopMode, SimTrace, Simulator};

/// Settling band as a fraction of the step amplitude.
pub const SETTLING_BAND: f64 = 0.04;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepMetrics {
    /// `max(y)/amplitude - 1`, clamped at zero.
    pub overshoot: f64,
    pub peak_time: f64,
    /// Last exit from the settling band; `None` if the response ends outside it.
    pub settling_time: Option<f64>,
    /// Relative error at the final sample.
    pub final_error: f64,
}

pub fn step_metrics(t: &[f64], y: &[f64], amplitude: f64, band: f64) -> StepMetrics {
    let (peak_index, peak) = y.iter().copied().enumerate().fold((0, f64::NEG_INFINITY), |b, (i, v)| if v > b.1 { (i, v) } else { b });
    let overshoot = (peak / amplitude - 1.0).max(0.0);
    let outside = |v: f64| ((v - amplitude) / amplitude).abs() > band;
    let settling_time = match y.iter().rposition(|&v| outside(v)) {
        None => Some(0.0),
        Some(i) if i + 1 < y.len() => Some(t[i + 1]),
        Some(_) => None,
    };
    let final_error = y.last().map_or(f64::NAN, |v| (v - amplitude).abs() / amplitude.abs());
    StepMetrics { overshoot, peak_time: t[peak_index], settling_time, final_error }
}

#[derive(Debug, Clone)]
pub struct StepResponse {
    pub trace: SimTrace,
    pub metrics: StepMetrics,
}

/// Closed-loop step response. Outputs beyond 100 times the amplitude abort the run.
pub fn step_response(config: &LoopConfig, amplitude: f64, duration: f64) -> Result<StepResponse> {
    config.validate()?;
    let cfg = config.sim_config(duration)?;
    step_response_with(config, amplitude, cfg)
}

pub fn step_response_with(config: &LoopConfig, amplitude: f64, cfg: crate::reset::SimConfig) -> Result<StepResponse> {
    let trace = Simulator::new(&config.chain()?, LoopMode::UnityFeedback, Excitation::Step { amplitude }, cfg)?
        .with_divergence_limit(100.0 * amplitude.abs())
        .run()?;
    let metrics = step_metrics(&trace.t, &trace.y, amplitude, SETTLING_BAND);
    Ok(StepResponse { trace, metrics })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metrics_of_known_response() {
        let t: Vec<f64> = (0..1000).map(|i| i as f64 * 0.01).collect();
        // Underdamped second-order step response, ζ = 0.2, ω_n = 2.
        let (z, wn) = (0.2f64, 2.0f64);
        let wd = wn * (1.0 - z * z).sqrt();
        let y: Vec<f64> = t
            .iter()
            .map(|&t| 1.0 - (-z * wn * t).exp() * ((wd * t).cos() + z / (1.0 - z * z).sqrt() * (wd * t).sin()))
            .collect();
        let m = step_metrics(&t, &y, 1.0, 0.02);
        let expected_os = (-z * std::f64::consts::PI / (1.0 - z * z).sqrt()).exp();
        assert!((m.overshoot - expected_os).abs() < 1e-3);
        assert!((m.peak_time - std::f64::consts::PI / wd).abs() < 0.011);
        let ts = m.settling_time.unwrap();
        assert!(ts > 7.0 && ts < 10.0);
    }

    #[test]
    fn unsettled_response_reported() {
        let t = [0.0, 1.0, 2.0];
        let y = [0.0, 0.5, 0.7];
        assert_eq!(step_metrics(&t, &y, 1.0, 0.04).settling_time, None);
        assert_eq!(step_metrics(&t, &y, 1.0, 0.04).overshoot, 0.0);
    }
}
