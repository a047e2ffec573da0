use std::io::Write;

use rayon::prelude::*;

use super::{fit_overshoot_plane, solve_gamma_for_pm, PlaneFit};
use crate::closedloop::{step_response, CglpParams, CrParams, LoopConfig, StepMetrics};
use crate::error::Result;
use crate::hosidf::{third_harmonic_integral, HarmonicTradeoff};
use crate::lti::blocks::mass_plant;
use crate::lti::{PidParams, TransferFunction};

/// Loop family scanned by the transient sweep: PID, plant and a CR-CgLp stage
/// whose reset factor is solved per cell for the requested phase margin.
#[derive(Debug, Clone)]
pub struct TransientPreset {
    pub omega_c: f64,
    pub plant: TransferFunction,
    pub pid_lead_ratio: f64,
    pub lowpass_ratio: Option<f64>,
    pub omega_r_ratio: f64,
    pub omega_f_ratio: f64,
    pub omega_h_ratio: f64,
    pub alpha: f64,
    pub duration: f64,
}

impl TransientPreset {
    /// Unit mass with the weak-derivative PID; filter corners at 20 ω_c.
    pub fn mass(omega_c: f64) -> Self {
        Self {
            omega_c,
            plant: mass_plant(),
            pid_lead_ratio: 1.2,
            lowpass_ratio: None,
            omega_r_ratio: 1.2,
            omega_f_ratio: 20.0,
            omega_h_ratio: 20.0,
            alpha: 1.0,
            duration: 3.0,
        }
    }

    /// PID and plant without the reset stage, gain normalized at `ω_c`.
    pub fn linear_loop(&self) -> Result<LoopConfig> {
        let lp = self.lowpass_ratio.map(|r| r * self.omega_c);
        LoopConfig::linear(self.omega_c, PidParams::with_lead_ratio(self.omega_c, self.pid_lead_ratio), lp, self.plant.clone()).normalized()
    }

    /// Loop for one sweep cell, reset factor solved for `pm` degrees.
    pub fn cell_loop(&self, pm: f64, wl_ratio: f64) -> Result<LoopConfig> {
        let wc = self.omega_c;
        let template = self
            .linear_loop()?
            .with_cglp(CglpParams { omega_r: self.omega_r_ratio * wc, gamma: 1.0, alpha: self.alpha, omega_f: self.omega_f_ratio * wc })
            .with_cr(CrParams { omega_l: wl_ratio * wc, omega_h: self.omega_h_ratio * wc });
        let gamma = solve_gamma_for_pm(&template, pm)?;
        template.with_gamma(gamma).normalized()
    }
}

#[derive(Debug, Clone)]
pub struct SweepCell {
    pub pm: f64,
    pub wl_ratio: f64,
    pub gamma: Option<f64>,
    pub metrics: Option<StepMetrics>,
    pub error: Option<String>,
}

impl SweepCell {
    pub fn failed(&self) -> bool {
        self.metrics.is_none()
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub cells: Vec<SweepCell>,
    /// Step metrics of the loop without the reset stage.
    pub linear: Option<StepMetrics>,
    pub fit: Option<PlaneFit>,
}

impl SweepResult {
    pub fn cell(&self, pm: f64, wl_ratio: f64) -> Option<&SweepCell> {
        self.cells.iter().find(|c| c.pm == pm && c.wl_ratio == wl_ratio)
    }

    /// Cell with the shortest settling time.
    pub fn fastest_settling(&self) -> Option<&SweepCell> {
        self.cells
            .iter()
            .filter_map(|c| c.metrics.and_then(|m| m.settling_time).map(|t| (c, t)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(c, _)| c)
    }

    /// Long-format CSV `axis1,axis2,overshoot,settling_s,failed` with PM and ω_l/ω_c as axes.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["axis1", "axis2", "overshoot", "settling_s", "failed"])?;
        for c in &self.cells {
            let (os, ts) = match c.metrics {
                Some(m) => (format!("{:.9}", m.overshoot), m.settling_time.map_or("nan".to_string(), |t| format!("{t:.9}"))),
                None => ("nan".to_string(), "nan".to_string()),
            };
            w.write_record([format!("{}", c.pm), format!("{}", c.wl_ratio), os, ts, c.failed().to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn run_cell(preset: &TransientPreset, pm: f64, wl_ratio: f64) -> SweepCell {
    let mut cell = SweepCell { pm, wl_ratio, gamma: None, metrics: None, error: None };
    let outcome = preset.cell_loop(pm, wl_ratio).and_then(|l| {
        cell.gamma = l.cglp.map(|c| c.gamma);
        step_response(&l, 1.0, preset.duration)
    });
    match outcome {
        Ok(r) => cell.metrics = Some(r.metrics),
        Err(e) => cell.error = Some(e.to_string()),
    }
    cell
}

/// Step-response metrics over a grid of phase margins and `ω_l/ω_c` ratios, with
/// the overshoot plane fitted to the cells that overshoot.
pub fn sweep_transient(preset: &TransientPreset, pms: &[f64], wl_ratios: &[f64]) -> Result<SweepResult> {
    let grid: Vec<(f64, f64)> = pms.iter().flat_map(|&p| wl_ratios.iter().map(move |&w| (p, w))).collect();
    let cells: Vec<SweepCell> = grid.par_iter().map(|&(p, w)| run_cell(preset, p, w)).collect();
    let linear = step_response(&preset.linear_loop()?, 1.0, preset.duration).ok().map(|r| r.metrics);
    let samples: Vec<(f64, f64, f64)> = cells.iter().filter_map(|c| c.metrics.map(|m| (c.wl_ratio, c.pm, m.overshoot))).collect();
    let fit = fit_overshoot_plane(&samples).ok();
    Ok(SweepResult { cells, linear, fit })
}

/// Third-harmonic integral and phase advantage across `ω_r/ω_c` ratios.
pub fn sweep_harmonics(gamma: f64, ratios: &[f64], omega_c: f64) -> Result<Vec<HarmonicTradeoff>> {
    ratios.par_iter().map(|&r| third_harmonic_integral(omega_c, r, gamma, 20.0)).collect()
}
