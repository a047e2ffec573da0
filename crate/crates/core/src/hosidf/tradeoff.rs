use super::{path_hosidf, phase_advantage};
use crate::error::Result;
use crate::numerics::{linspace, logspace};
use crate::reset::ResetPath;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicTradeoff {
    pub omega_r_ratio: f64,
    /// Trapezoidal integral of |H_3| over frequencies up to the crossover.
    pub third_harmonic_integral: f64,
    /// Phase advantage at the crossover for the requested reset factor, degrees.
    pub phase_advantage: f64,
    /// Largest phase advantage at the crossover over reset factors in [-1, 1], degrees.
    pub max_phase_advantage: f64,
}

/// Third-harmonic content below the crossover versus phase advantage at the
/// crossover, for a first-order reset element at `ω_r = ratio · ω_c` with its
/// lead filter (`α = 1`, pole at `omega_f_ratio · ω_c`).
pub fn third_harmonic_integral(omega_c: f64, omega_r_ratio: f64, gamma: f64, omega_f_ratio: f64) -> Result<HarmonicTradeoff> {
    let omega_r = omega_r_ratio * omega_c;
    let omega_f = omega_f_ratio * omega_c;
    let path = ResetPath::cglp(omega_r, gamma, 1.0, omega_f)?;
    let grid = logspace(omega_c * 1e-3, omega_c, 600);
    let mags: Vec<f64> = grid.iter().map(|&w| path_hosidf(&path, w, 3).map(|h| h.norm())).collect::<Result<_>>()?;
    let integral = grid.windows(2).zip(mags.windows(2)).map(|(w, m)| 0.5 * (w[1] - w[0]) * (m[0] + m[1])).sum();

    let mut best = f64::NEG_INFINITY;
    for g in linspace(-1.0, 1.0, 201) {
        let p = ResetPath::cglp(omega_r, g, 1.0, omega_f)?;
        if let Ok(pa) = phase_advantage(&p, omega_c) {
            best = best.max(pa);
        }
    }
    Ok(HarmonicTradeoff {
        omega_r_ratio,
        third_harmonic_integral: integral,
        phase_advantage: phase_advantage(&path, omega_c)?,
        max_phase_advantage: best,
    })
}
