use std::f64::consts::PI;

use super::solve_gamma_for_pm;
use crate::closedloop::{CglpParams, CrParams, LoopConfig};
use crate::error::{Error, Result};
use crate::lti::blocks::precision_stage;
use crate::lti::{PidParams, TransferFunction};
use crate::numerics::{find_root, wrap_deg};

/// PID lead ratio `β` (`ω_d = ω_c/β`, `ω_t = β ω_c`) giving the loop with resets
/// disabled a phase margin of `target_pm` degrees at `ω_c`.
pub fn lead_ratio_for_pm(template: &LoopConfig, target_pm: f64) -> Result<f64> {
    let wc = template.omega_c;
    let pm = |beta: f64| -> f64 {
        let mut l = template.clone().with_gamma(1.0);
        let kp = l.pid.kp;
        l.pid = PidParams { kp, ..PidParams::with_lead_ratio(wc, beta) };
        l.df_at(wc).map(|v| wrap_deg(180.0 + v.arg().to_degrees()) - target_pm).unwrap_or(f64::NAN)
    };
    find_root(pm, 1.0 + 1e-6, 20.0, 1e-12)
}

/// Mid-band tuning of a CR-CgLp loop: `ω_r = 1.2ω_c`, `ω_l = 0.45ω_c`,
/// `ω_h = ω_f = 20ω_c`, describing-function phase margin 20°. The PID lead ratio is
/// chosen so the loop with resets disabled has 5° phase margin.
pub fn guideline_preset(omega_c: f64, plant: TransferFunction) -> Result<LoopConfig> {
    if !(omega_c > 0.0) {
        return Err(Error::InvalidParameter(format!("crossover must be positive, got {omega_c}")));
    }
    let template = LoopConfig::linear(omega_c, PidParams::weak_derivative(omega_c), None, plant)
        .with_cglp(CglpParams { omega_r: 1.2 * omega_c, gamma: 1.0, alpha: 1.0, omega_f: 20.0 * omega_c })
        .with_cr(CrParams { omega_l: 0.45 * omega_c, omega_h: 20.0 * omega_c });
    let beta = lead_ratio_for_pm(&template, 5.0)?;
    let mut l = template;
    l.pid = PidParams::with_lead_ratio(omega_c, beta);
    let gamma = solve_gamma_for_pm(&l, 20.0)?;
    l.with_gamma(gamma).normalized()
}

/// Controllers of the positioning-stage study (crossover 400 Hz).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PracticalController {
    /// Lead ratio 2.5.
    Pid1,
    /// Lead ratio 5.
    Pid2,
    /// `Pid1` with a first-order reset element and lead filter.
    Cglp,
    /// `Pid1` with a CR-CgLp stage.
    CrCglp,
}

impl PracticalController {
    pub const ALL: [PracticalController; 4] = [Self::Pid1, Self::Pid2, Self::Cglp, Self::CrCglp];

    pub fn label(&self) -> &'static str {
        match self {
            Self::Pid1 => "pid1",
            Self::Pid2 => "pid2",
            Self::Cglp => "cglp",
            Self::CrCglp => "cr_cglp",
        }
    }
}

/// Loop around the identified stage; reset stages get 25° phase margin.
pub fn practical_loop(controller: PracticalController) -> Result<LoopConfig> {
    let wc = 2.0 * PI * 400.0;
    let beta = if controller == PracticalController::Pid2 { 5.0 } else { 2.5 };
    let base = LoopConfig::linear(wc, PidParams::with_lead_ratio(wc, beta), Some(5.0 * wc), precision_stage());
    let reset = CglpParams { omega_r: wc, gamma: 1.0, alpha: 1.0, omega_f: 20.0 * wc };
    let l = match controller {
        PracticalController::Pid1 | PracticalController::Pid2 => base,
        PracticalController::Cglp => base.with_cglp(reset),
        PracticalController::CrCglp => base.with_cglp(reset).with_cr(CrParams { omega_l: wc / 8.0, omega_h: 5.0 * wc }),
    };
    let l = if l.cglp.is_some() {
        let g = solve_gamma_for_pm(&l, 25.0)?;
        l.with_gamma(g)
    } else {
        l
    };
    l.normalized()
}

/// Crossover and phase margin before and after a loop-gain change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainVariation {
    pub delta_db: f64,
    pub crossover_before: f64,
    pub crossover_after: f64,
    pub pm_before: f64,
    pub pm_after: f64,
    /// Slope of the open-loop phase at the original crossover, degrees per decade.
    pub phase_slope: f64,
}

pub fn gain_variation_experiment(config: &LoopConfig, delta_db: f64) -> Result<GainVariation> {
    let before = config.crossover()?;
    let pm_before = config.phase_margin()?;
    let mut scaled = config.clone();
    scaled.pid.kp *= 10f64.powf(delta_db / 20.0);
    let after = scaled.crossover()?;
    let pm_after = scaled.phase_margin()?;
    let step = 10f64.powf(0.01);
    let up = config.df_at(before * step)?.arg().to_degrees();
    let down = config.df_at(before / step)?.arg().to_degrees();
    Ok(GainVariation {
        delta_db,
        crossover_before: before,
        crossover_after: after,
        pm_before,
        pm_after,
        phase_slope: wrap_deg(up - down) / 0.02,
    })
}

/// Loops of the gain-variation study at a 100 Hz crossover, without a noise filter:
/// a PID with 45° phase margin, and the same PID with a CR-CgLp stage tuned to 55°
/// (`ω_r = 1.5ω_c`, `ω_l = 0.45ω_c`, `ω_h = ω_f = 20ω_c`).
pub fn gain_study_loops() -> Result<(LoopConfig, LoopConfig)> {
    let wc = 2.0 * PI * 100.0;
    let template = LoopConfig::linear(wc, PidParams::weak_derivative(wc), None, precision_stage());
    let beta = lead_ratio_for_pm(&template, 45.0)?;
    let mut pid = template;
    pid.pid = PidParams::with_lead_ratio(wc, beta);
    let pid = pid.normalized()?;
    let cr = pid
        .clone()
        .with_cglp(CglpParams { omega_r: 1.5 * wc, gamma: 1.0, alpha: 1.0, omega_f: 20.0 * wc })
        .with_cr(CrParams { omega_l: 0.45 * wc, omega_h: 20.0 * wc });
    let g = solve_gamma_for_pm(&cr, 55.0)?;
    Ok((pid, cr.with_gamma(g).normalized()?))
}
