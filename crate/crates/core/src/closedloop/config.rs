use std::io::Write;

use crate::error::{Error, Result};
use crate::hosidf::path_hosidf;
use crate::lti::blocks::{cglp_lead, cr_postfilter, cr_prefilter, first_order_lowpass};
use crate::lti::{PidParams, TransferFunction};
use crate::numerics::{find_root, logspace, Complex64};
use crate::reset::{Chain, ChainBlock, CrElement, ResetElement, ResetPath, SimConfig};
use crate::stability::{hbeta_check, phase_margin_at, HbetaReport};

/// First-order reset element with its lead filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CglpParams {
    pub omega_r: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub omega_f: f64,
}

/// Corners of the pre- and post-filters around the reset element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrParams {
    pub omega_l: f64,
    pub omega_h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    /// PID and plant only.
    Linear,
    Cglp,
    CrCglp,
}

/// Loop `reset stage → PID → low-pass → plant` under unity feedback.
#[derive(Debug, Clone)]
pub struct LoopConfig {
    pub omega_c: f64,
    pub pid: PidParams,
    pub lowpass: Option<f64>,
    pub plant: TransferFunction,
    pub cglp: Option<CglpParams>,
    pub cr: Option<CrParams>,
}

/// Describing-function open loop on a grid.
#[derive(Debug, Clone)]
pub struct DfOpenLoop {
    pub omegas: Vec<f64>,
    pub values: Vec<Complex64>,
    pub crossover: f64,
    pub phase_margin: f64,
}

impl DfOpenLoop {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["omega", "mag_db", "phase_deg"])?;
        for (o, v) in self.omegas.iter().zip(&self.values) {
            w.write_record([format!("{o:.9e}"), format!("{:.9}", crate::numerics::db(v.norm())), format!("{:.9}", v.arg().to_degrees())])?;
        }
        w.flush()?;
        Ok(())
    }
}

impl LoopConfig {
    pub fn linear(omega_c: f64, pid: PidParams, lowpass: Option<f64>, plant: TransferFunction) -> Self {
        Self { omega_c, pid, lowpass, plant, cglp: None, cr: None }
    }

    pub fn with_cglp(mut self, cglp: CglpParams) -> Self {
        self.cglp = Some(cglp);
        self
    }

    pub fn with_cr(mut self, cr: CrParams) -> Self {
        self.cr = Some(cr);
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        if let Some(c) = self.cglp.as_mut() {
            c.gamma = gamma;
        }
        self
    }

    /// Same loop with the reset stage removed.
    pub fn without_reset(&self) -> Self {
        Self { cglp: None, cr: None, ..self.clone() }
    }

    pub fn topology(&self) -> Topology {
        match (self.cglp, self.cr) {
            (None, _) => Topology::Linear,
            (Some(_), None) => Topology::Cglp,
            (Some(_), Some(_)) => Topology::CrCglp,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_c > 0.0) {
            return Err(Error::InvalidParameter(format!("crossover must be positive, got {}", self.omega_c)));
        }
        self.pid.validate(self.omega_c)?;
        if let Some(z) = self.lowpass {
            if !(z > self.omega_c) {
                return Err(Error::InvalidParameter(format!("low-pass corner {z} must lie above the crossover")));
            }
        }
        if self.cr.is_some() && self.cglp.is_none() {
            return Err(Error::InvalidParameter("filter corners given without a reset element".into()));
        }
        if let Some(c) = self.cglp {
            if !(c.gamma >= -1.0 && c.gamma <= 1.0) {
                return Err(Error::InvalidParameter(format!("reset factor must lie in [-1, 1], got {}", c.gamma)));
            }
            if !(c.omega_f > self.omega_c) {
                return Err(Error::InvalidParameter(format!("lead-filter pole {} must lie above the crossover", c.omega_f)));
            }
        }
        if let Some(cr) = self.cr {
            if !(cr.omega_l > 0.0 && cr.omega_h > cr.omega_l) {
                return Err(Error::InvalidParameter(format!("need 0 < ω_l < ω_h, got {} and {}", cr.omega_l, cr.omega_h)));
            }
        }
        Ok(())
    }

    /// Advisory findings that do not prevent analysis.
    pub fn lints(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let (Some(c), Some(cr)) = (self.cglp, self.cr) {
            if cr.omega_h < 10.0 * c.omega_r.max(self.omega_c) {
                out.push(format!(
                    "ω_h = {:.4e} is less than ten times max(ω_r, ω_c); the stability test treats the filters as transparent only when it is much larger",
                    cr.omega_h
                ));
            }
        }
        out
    }

    pub fn reset_path(&self) -> Result<Option<ResetPath>> {
        let Some(c) = self.cglp else { return Ok(None) };
        let element = ResetElement::fore(c.omega_r, c.gamma)?;
        let lead = cglp_lead(c.omega_r, c.alpha, c.omega_f)?;
        Ok(Some(match self.cr {
            None => ResetPath { pre: Vec::new(), element, post: vec![lead] },
            Some(cr) => CrElement::new(element, cr.omega_l, cr.omega_h)?.with_shaping(lead).path()?,
        }))
    }

    /// PID, low-pass and plant in series order.
    pub fn linear_blocks(&self) -> Result<Vec<TransferFunction>> {
        let mut out = vec![self.pid.tf()?];
        if let Some(z) = self.lowpass {
            out.push(first_order_lowpass(z)?);
        }
        out.push(self.plant.clone());
        Ok(out)
    }

    /// Base linear system of the reset element alone.
    pub fn reset_base(&self) -> Result<Option<TransferFunction>> {
        self.cglp.map(|c| first_order_lowpass(c.omega_r)).transpose()
    }

    /// Open loop with the reset element replaced by its base linear system.
    pub fn base_open_loop(&self) -> Result<TransferFunction> {
        let mut blocks = Vec::new();
        if let Some(c) = self.cglp {
            if let Some(cr) = self.cr {
                blocks.push(cr_prefilter(cr.omega_l, cr.omega_h)?);
            }
            blocks.push(first_order_lowpass(c.omega_r)?);
            blocks.push(cglp_lead(c.omega_r, c.alpha, c.omega_f)?);
            if let Some(cr) = self.cr {
                blocks.push(cr_postfilter(cr.omega_l)?);
            }
        }
        blocks.extend(self.linear_blocks()?);
        Ok(TransferFunction::product(&blocks))
    }

    /// First-harmonic open loop `L(jω)`.
    pub fn df_at(&self, omega: f64) -> Result<Complex64> {
        let mut v = Complex64::new(1.0, 0.0);
        for b in self.linear_blocks()? {
            v *= b.freq_response(omega)?;
        }
        if let Some(path) = self.reset_path()? {
            v *= path_hosidf(&path, omega, 1)?;
        }
        Ok(v)
    }

    /// Scales `k_p` so that `|L(jω_c)| = 1`.
    pub fn normalized(mut self) -> Result<Self> {
        let m = self.df_at(self.omega_c)?.norm();
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::InvalidParameter(format!("open-loop magnitude at crossover is {m}")));
        }
        self.pid.kp /= m;
        Ok(self)
    }

    /// Frequency where `|L(jω)| = 1`, searched within two decades of `ω_c`.
    pub fn crossover(&self) -> Result<f64> {
        let f = |w: f64| self.df_at(w).map(|v| v.norm().ln()).unwrap_or(f64::NAN);
        if f(self.omega_c).abs() < 1e-12 {
            return Ok(self.omega_c);
        }
        let grid = logspace(self.omega_c / 100.0, self.omega_c * 100.0, 401);
        let vals: Vec<f64> = grid.iter().map(|&w| f(w)).collect();
        // Prefer the sign change nearest the nominal crossover.
        let mut best: Option<(f64, f64, f64)> = None;
        for i in 0..grid.len() - 1 {
            if vals[i].is_finite() && vals[i + 1].is_finite() && vals[i] * vals[i + 1] <= 0.0 {
                let dist = (grid[i] / self.omega_c).ln().abs();
                if best.is_none_or(|b| dist < b.2) {
                    best = Some((grid[i], grid[i + 1], dist));
                }
            }
        }
        let (lo, hi, _) = best.ok_or_else(|| Error::InvalidParameter("open loop does not cross unity gain near ω_c".into()))?;
        find_root(f, lo, hi, 1e-12 * hi)
    }

    /// Describing-function phase margin at the unity-gain crossover, degrees.
    pub fn phase_margin(&self) -> Result<f64> {
        let wc = self.crossover()?;
        Ok(phase_margin_at(self.df_at(wc)?))
    }

    pub fn df_open_loop(&self, grid: &[f64]) -> Result<DfOpenLoop> {
        let values = grid.iter().map(|&w| self.df_at(w)).collect::<Result<Vec<_>>>()?;
        let crossover = self.crossover()?;
        Ok(DfOpenLoop { omegas: grid.to_vec(), values, crossover, phase_margin: phase_margin_at(self.df_at(crossover)?) })
    }

    /// Simulation chain: reset stage, PID, low-pass, plant.
    pub fn chain(&self) -> Result<Chain> {
        let mut blocks = Vec::new();
        let mut group_end = None;
        if let Some(path) = self.reset_path()? {
            let c = Chain::from_path(&path)?;
            group_end = Some(c.len() - 1);
            for p in &path.pre {
                blocks.push(ChainBlock::linear(p)?);
            }
            blocks.push(ChainBlock::reset(&path.element)?);
            for p in &path.post {
                blocks.push(ChainBlock::linear(p)?);
            }
        }
        for b in self.linear_blocks()? {
            blocks.push(ChainBlock::linear(&b)?);
        }
        let chain = Chain::new(blocks)?;
        Ok(match group_end {
            Some(i) => chain.with_group_end(i),
            None => chain.with_group_end(0),
        })
    }

    /// Default simulation settings: step `2π/(200 ω_max)`.
    pub fn sim_config(&self, duration: f64) -> Result<SimConfig> {
        let mut cfg = SimConfig::for_corner(self.chain()?.max_corner(), duration);
        let delay = self.plant.delay();
        if delay > 0.0 {
            // Keep the delay an exact number of steps.
            cfg.step = delay / (delay / cfg.step).ceil();
        }
        Ok(cfg)
    }

    /// Stability test on a frequency grid. Linear loops use a unit reset base.
    pub fn hbeta(&self, grid: &[f64]) -> Result<HbetaReport> {
        let base = self.reset_base()?.unwrap_or_else(|| TransferFunction::gain(1.0));
        hbeta_check(&self.base_open_loop()?, &base, grid)
    }
}
