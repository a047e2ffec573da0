use crate::error::{Error, Result};
use crate::numerics::{solve_real, MatrixR};

/// Overshoot plane `OS = c_log · log10(ω_l/ω_c) + c_pm · PM + c_0` from the design guideline.
pub const REFERENCE_PLANE: (f64, f64, f64) = (0.95, -0.04, 1.25);

/// Least-squares plane through overshoot samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneFit {
    pub c_log: f64,
    pub c_pm: f64,
    pub c_0: f64,
    pub rms: f64,
    pub samples: usize,
}

impl PlaneFit {
    pub fn predict(&self, wl_ratio: f64, pm: f64) -> f64 {
        self.c_log * wl_ratio.log10() + self.c_pm * pm + self.c_0
    }
}

/// Overshoot predicted by the reference plane, clamped at zero.
pub fn overshoot_estimate(wl_ratio: f64, pm: f64) -> f64 {
    let (a, b, c) = REFERENCE_PLANE;
    (a * wl_ratio.log10() + b * pm + c).max(0.0)
}

/// Fits the plane to `(ω_l/ω_c, PM, OS)` samples. Samples with zero overshoot lie
/// in the clamp zone and are excluded.
pub fn fit_overshoot_plane(samples: &[(f64, f64, f64)]) -> Result<PlaneFit> {
    let used: Vec<&(f64, f64, f64)> = samples.iter().filter(|s| s.2 > 0.0 && s.0 > 0.0).collect();
    if used.len() < 3 {
        return Err(Error::InvalidParameter(format!("plane fit needs at least 3 samples with positive overshoot, got {}", used.len())));
    }
    let mut ata = MatrixR::zeros(3, 3);
    let mut atb = MatrixR::zeros(3, 1);
    for &&(wl, pm, os) in &used {
        let row = [wl.log10(), pm, 1.0];
        for i in 0..3 {
            for j in 0..3 {
                ata[(i, j)] += row[i] * row[j];
            }
            atb[(i, 0)] += row[i] * os;
        }
    }
    let c = solve_real(&ata, &atb)?;
    let mut fit = PlaneFit { c_log: c[(0, 0)], c_pm: c[(1, 0)], c_0: c[(2, 0)], rms: 0.0, samples: used.len() };
    fit.rms = (used.iter().map(|s| (fit.predict(s.0, s.1) - s.2).powi(2)).sum::<f64>() / used.len() as f64).sqrt();
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_plane() {
        let mut samples = Vec::new();
        for &wl in &[0.1, 0.3, 1.0] {
            for &pm in &[10.0, 15.0, 20.0] {
                samples.push((wl, pm, overshoot_estimate(wl, pm)));
            }
        }
        let f = fit_overshoot_plane(&samples).unwrap();
        assert!((f.c_log - 0.95).abs() < 1e-9 && (f.c_pm + 0.04).abs() < 1e-9 && (f.c_0 - 1.25).abs() < 1e-9);
        assert!(f.rms < 1e-12);
    }

    #[test]
    fn clamp_zone_excluded() {
        let samples = [(0.1, 22.0, 0.0), (1.0, 10.0, 0.85), (0.5, 12.0, 0.5), (0.3, 14.0, 0.1)];
        assert_eq!(fit_overshoot_plane(&samples).unwrap().samples, 3);
    }
}
