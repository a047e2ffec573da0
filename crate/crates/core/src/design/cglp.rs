use crate::closedloop::{CglpParams, CrParams, LoopConfig};
use crate::error::{Error, Result};
use crate::hosidf::{path_hosidf, phase_advantage};
use crate::numerics::{db, find_root, linspace, logspace, wrap_deg};
use crate::reset::{CrElement, ResetElement, ResetPath};
use crate::lti::blocks::cglp_lead;

/// How the lead-filter zero `α ω_r` is placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaRule {
    /// `α = 1`: the zero cancels the reset element's pole.
    Unity,
    /// `α` chosen so the first harmonic has unit gain at the crossover.
    UnitGainAtCrossover,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CglpDesignOptions {
    pub omega_r_ratio: f64,
    pub omega_f_ratio: f64,
    pub alpha: AlphaRule,
    pub cr: Option<CrParams>,
}

impl Default for CglpDesignOptions {
    fn default() -> Self {
        Self { omega_r_ratio: 1.2, omega_f_ratio: 20.0, alpha: AlphaRule::Unity, cr: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CglpDesign {
    pub omega_c: f64,
    pub target_phase_advantage: f64,
    pub gamma: f64,
    pub omega_r: f64,
    pub alpha: f64,
    pub omega_f: f64,
    pub cr: Option<CrParams>,
    /// Achieved phase advantage at the crossover, degrees.
    pub phase_advantage: f64,
    /// Largest deviation of the first-harmonic gain from its crossover value over
    /// `[ω_c/2, 2ω_c]`, dB.
    pub gain_flatness_db: f64,
}

impl CglpDesign {
    /// Frequency of the lead-filter zero.
    pub fn omega_ra(&self) -> f64 {
        self.alpha * self.omega_r
    }

    pub fn params(&self) -> CglpParams {
        CglpParams { omega_r: self.omega_r, gamma: self.gamma, alpha: self.alpha, omega_f: self.omega_f }
    }

    pub fn path(&self) -> Result<ResetPath> {
        build_path(self.omega_r, self.gamma, self.alpha, self.omega_f, self.cr)
    }
}

fn build_path(omega_r: f64, gamma: f64, alpha: f64, omega_f: f64, cr: Option<CrParams>) -> Result<ResetPath> {
    let element = ResetElement::fore(omega_r, gamma)?;
    let lead = cglp_lead(omega_r, alpha, omega_f)?;
    match cr {
        None => Ok(ResetPath { pre: Vec::new(), element, post: vec![lead] }),
        Some(c) => CrElement::new(element, c.omega_l, c.omega_h)?.with_shaping(lead).path(),
    }
}

/// Reset factor and lead-filter zero giving phase advantage `target_pa` (degrees)
/// at `omega_c`.
pub fn design_cglp(omega_c: f64, target_pa: f64, opts: &CglpDesignOptions) -> Result<CglpDesign> {
    if !(target_pa > 0.0 && target_pa <= 50.0) {
        return Err(Error::InvalidParameter(format!("phase advantage must lie in (0, 50] degrees, got {target_pa}")));
    }
    let omega_r = opts.omega_r_ratio * omega_c;
    let omega_f = opts.omega_f_ratio * omega_c;
    let pa = |g: f64| build_path(omega_r, g, 1.0, omega_f, opts.cr).and_then(|p| phase_advantage(&p, omega_c));
    // Full reversal can be singular at very low ω_r/ω; back off slightly.
    let lowest = if pa(-1.0).is_ok() { -1.0 } else { -1.0 + 1e-9 };
    let max = pa(lowest)?;
    if target_pa > max {
        return Err(Error::PhaseAdvantage { requested: target_pa, max });
    }
    let gamma = find_root(|g| pa(g).unwrap_or(f64::NAN) - target_pa, lowest, 1.0, 1e-12)?;

    let alpha = match opts.alpha {
        AlphaRule::Unity => 1.0,
        AlphaRule::UnitGainAtCrossover => {
            let gain = |a: f64| -> f64 {
                build_path(omega_r, gamma, a, omega_f, opts.cr)
                    .and_then(|p| path_hosidf(&p, omega_c, 1))
                    .map(|h| h.norm().ln())
                    .unwrap_or(f64::NAN)
            };
            find_root(gain, 1e-3, 1e3, 1e-12)?
        }
    };
    let path = build_path(omega_r, gamma, alpha, omega_f, opts.cr)?;
    let at_c = path_hosidf(&path, omega_c, 1)?.norm();
    let mut flatness: f64 = 0.0;
    for w in logspace(omega_c / 2.0, 2.0 * omega_c, 81) {
        flatness = flatness.max(db(path_hosidf(&path, w, 1)?.norm() / at_c).abs());
    }
    Ok(CglpDesign {
        omega_c,
        target_phase_advantage: target_pa,
        gamma,
        omega_r,
        alpha,
        omega_f,
        cr: opts.cr,
        phase_advantage: phase_advantage(&path, omega_c)?,
        gain_flatness_db: flatness,
    })
}

/// Reset factor in `[-1, 1]` giving the loop a describing-function phase margin of
/// `target_pm` degrees at `ω_c`. Of several solutions the one closest to 1 is returned.
pub fn solve_gamma_for_pm(config: &LoopConfig, target_pm: f64) -> Result<f64> {
    if config.cglp.is_none() {
        return Err(Error::InvalidParameter("loop has no reset element".into()));
    }
    let pm = |g: f64| -> f64 {
        config.clone().with_gamma(g).df_at(config.omega_c).map(|v| wrap_deg(180.0 + v.arg().to_degrees()) - target_pm).unwrap_or(f64::NAN)
    };
    let grid = linspace(1.0, -1.0, 201);
    let vals: Vec<f64> = grid.iter().map(|&g| pm(g)).collect();
    for i in 0..grid.len() - 1 {
        let (a, b) = (vals[i], vals[i + 1]);
        if a.is_finite() && b.is_finite() && a * b <= 0.0 && (a - b).abs() < 90.0 {
            return find_root(pm, grid[i + 1], grid[i], 1e-12);
        }
    }
    let best = vals.iter().copied().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    Err(Error::Config(format!(
        "phase margin {target_pm:.2} deg is not reachable with reset factors in [-1, 1] (largest is {:.2} deg)",
        best + target_pm
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_advantage_approaches_linear_limit() {
        let d = design_cglp(100.0, 1e-3, &CglpDesignOptions { alpha: AlphaRule::UnitGainAtCrossover, ..Default::default() }).unwrap();
        assert!((d.gamma - 1.0).abs() < 1e-3);
        assert!((d.alpha - 1.0).abs() < 0.01);
    }

    #[test]
    fn unreachable_advantage_reports_maximum() {
        match design_cglp(100.0, 45.0, &CglpDesignOptions::default()) {
            Err(Error::PhaseAdvantage { max, .. }) => assert!(max > 20.0 && max < 45.0),
            other => panic!("expected a design error, got {other:?}"),
        }
    }

    #[test]
    fn achieved_advantage_matches_target() {
        let d = design_cglp(100.0, 20.0, &CglpDesignOptions::default()).unwrap();
        assert!((d.phase_advantage - 20.0).abs() < 1e-6);
    }
}
