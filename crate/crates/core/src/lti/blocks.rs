use super::TransferFunction;
use crate::error::{Error, Result};
use crate::numerics::Complex64;

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

/// `1 / (s/ω + 1)`.
pub fn first_order_lowpass(omega: f64) -> Result<TransferFunction> {
    positive("low-pass corner", omega)?;
    TransferFunction::new(vec![1.0], vec![1.0, 1.0 / omega])
}

/// `(s/ω_zero + 1) / (s/ω_pole + 1)`.
pub fn lead_lag(omega_zero: f64, omega_pole: f64) -> Result<TransferFunction> {
    positive("zero corner", omega_zero)?;
    positive("pole corner", omega_pole)?;
    TransferFunction::new(vec![1.0, 1.0 / omega_zero], vec![1.0, 1.0 / omega_pole])
}

pub fn integrator() -> TransferFunction {
    TransferFunction::new(vec![1.0], vec![0.0, 1.0]).expect("valid integrator")
}

/// Unit mass, `1/s^2`.
pub fn mass_plant() -> TransferFunction {
    TransferFunction::new(vec![1.0], vec![0.0, 0.0, 1.0]).expect("valid double integrator")
}

/// Identified flexure-guided positioning stage with 100 µs transport delay.
pub fn precision_stage() -> TransferFunction {
    TransferFunction::new(vec![9836.0], vec![7376.0, 8.737, 1.0])
        .and_then(|g| g.with_delay(1e-4))
        .expect("valid stage model")
}

/// Pre-filter ahead of the reset element in a constant-in-gain lead-in-phase arrangement.
pub fn cr_prefilter(omega_l: f64, omega_h: f64) -> Result<TransferFunction> {
    lead_lag(omega_l, omega_h)
}

/// Post-filter that restores unity DC gain after the pre-filter.
pub fn cr_postfilter(omega_l: f64) -> Result<TransferFunction> {
    first_order_lowpass(omega_l)
}

/// Lead filter following a first-order reset element: zero at `α ω_r`, pole at `ω_f`.
pub fn cglp_lead(omega_r: f64, alpha: f64, omega_f: f64) -> Result<TransferFunction> {
    positive("alpha", alpha)?;
    lead_lag(alpha * omega_r, omega_f)
}

/// Tamed PID `k_p (1 + ω_i/s) (s/ω_d + 1) / (s/ω_t + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidParams {
    pub kp: f64,
    pub omega_i: f64,
    pub omega_d: f64,
    pub omega_t: f64,
}

impl PidParams {
    /// Weak-derivative tuning around a crossover: integral corner a decade below,
    /// derivative and tamed corners a factor `lead_ratio` either side of `ω_c`.
    pub fn with_lead_ratio(omega_c: f64, lead_ratio: f64) -> Self {
        Self { kp: 1.0, omega_i: omega_c / 10.0, omega_d: omega_c / lead_ratio, omega_t: lead_ratio * omega_c }
    }

    /// Lead ratio 1.2.
    pub fn weak_derivative(omega_c: f64) -> Self {
        Self::with_lead_ratio(omega_c, 1.2)
    }

    pub fn validate(&self, omega_c: f64) -> Result<()> {
        positive("k_p", self.kp)?;
        positive("integral corner", self.omega_i)?;
        positive("derivative corner", self.omega_d)?;
        positive("tamed-derivative corner", self.omega_t)?;
        if self.omega_t <= omega_c {
            return Err(Error::InvalidParameter(format!(
                "tamed-derivative corner {} must lie above the crossover {omega_c}",
                self.omega_t
            )));
        }
        Ok(())
    }

    pub fn tf(&self) -> Result<TransferFunction> {
        positive("integral corner", self.omega_i)?;
        positive("derivative corner", self.omega_d)?;
        positive("tamed-derivative corner", self.omega_t)?;
        let num = [self.omega_i, 1.0 + self.omega_i / self.omega_d, 1.0 / self.omega_d];
        TransferFunction::new(num.iter().map(|v| v * self.kp).collect(), vec![0.0, 1.0, 1.0 / self.omega_t])
    }
}

/// Gain that makes `|Π blocks(jω_c) · Π describing| = 1`.
pub fn normalize_gain(blocks: &[TransferFunction], describing: &[Complex64], omega_c: f64) -> Result<f64> {
    let mut value = Complex64::new(1.0, 0.0);
    for b in blocks {
        value *= b.freq_response(omega_c)?;
    }
    for d in describing {
        value *= d;
    }
    let mag = value.norm();
    if !(mag > 0.0) || !mag.is_finite() {
        return Err(Error::InvalidParameter(format!("open-loop magnitude at crossover is {mag}")));
    }
    Ok(1.0 / mag)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pid_matches_factored_form() {
        let p = PidParams { kp: 2.0, ..PidParams::weak_derivative(100.0) };
        let tf = p.tf().unwrap();
        for &w in &[1.0, 50.0, 100.0, 1e3] {
            let s = Complex64::new(0.0, w);
            let expected = p.kp * (1.0 + p.omega_i / s) * (s / p.omega_d + 1.0) / (s / p.omega_t + 1.0);
            assert!((tf.freq_response(w).unwrap() - expected).norm() < 1e-12 * expected.norm());
        }
        assert_eq!(tf.origin_poles(), 1);
    }

    #[test]
    fn cr_filters_have_unit_dc_gain() {
        let lr = cr_prefilter(45.0, 2000.0).unwrap().series(&cr_postfilter(45.0).unwrap());
        assert!((lr.freq_response(1e-9).unwrap().norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn normalized_gain_gives_unit_magnitude() {
        let blocks = [PidParams::weak_derivative(100.0).tf().unwrap(), mass_plant()];
        let k = normalize_gain(&blocks, &[], 100.0).unwrap();
        let l = blocks[0].series(&blocks[1]).scaled(k);
        assert!((l.freq_response(100.0).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stage_resonance() {
        let p = precision_stage();
        let peak = p.freq_response(7376f64.sqrt()).unwrap().norm();
        assert!(peak > 5.0 * p.freq_response(1.0).unwrap().norm());
    }
}
