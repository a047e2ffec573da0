use std::io::Write;
use std::path::Path;

use super::Sample;
use crate::error::Result;

/// Recorded simulation output on a uniform time grid.
#[derive(Debug, Clone, Default)]
pub struct SimTrace {
    /// Spacing of the recorded samples.
    pub spacing: f64,
    pub t: Vec<f64>,
    /// Chain input: the loop error, or the excitation in open loop.
    pub e: Vec<f64>,
    /// Reset trigger (input of the reset element).
    pub x1: Vec<f64>,
    /// Output of the reset element.
    pub x2: Vec<f64>,
    /// Output of the reset group (element plus its filters).
    pub u: Vec<f64>,
    /// Output of the last block.
    pub y: Vec<f64>,
    /// Input of the last block.
    pub uc: Vec<f64>,
    pub resets: Vec<f64>,
    pub suppressed_resets: usize,
}

/// Recorded signal selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signal {
    E,
    X1,
    X2,
    U,
    Y,
    Uc,
}

/// Size of the sample-to-sample change across resets versus elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpStats {
    /// Largest change over a sample interval containing a reset.
    pub max_reset_jump: f64,
    /// Median change over intervals without a reset.
    pub typical_increment: f64,
}

impl SimTrace {
    pub fn with_capacity(n: usize, spacing: f64) -> Self {
        let v = || Vec::with_capacity(n);
        Self { spacing, t: v(), e: v(), x1: v(), x2: v(), u: v(), y: v(), uc: v(), resets: Vec::new(), suppressed_resets: 0 }
    }

    pub fn push(&mut self, s: Sample) {
        self.t.push(s.t);
        self.e.push(s.e);
        self.x1.push(s.x1);
        self.x2.push(s.x2);
        self.u.push(s.u);
        self.y.push(s.y);
        self.uc.push(s.uc);
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn signal(&self, which: Signal) -> &[f64] {
        match which {
            Signal::E => &self.e,
            Signal::X1 => &self.x1,
            Signal::X2 => &self.x2,
            Signal::U => &self.u,
            Signal::Y => &self.y,
            Signal::Uc => &self.uc,
        }
    }

    /// Jump statistics of a signal over the window `[from, ∞)`.
    pub fn jump_stats(&self, which: Signal, from: f64) -> JumpStats {
        let s = self.signal(which);
        let mut reset_interval = vec![false; self.len().saturating_sub(1)];
        for &tr in &self.resets {
            let k = ((tr / self.spacing).ceil() as usize).saturating_sub(1);
            if k < reset_interval.len() {
                reset_interval[k] = true;
            }
        }
        let mut quiet = Vec::new();
        let mut max_reset_jump: f64 = 0.0;
        for k in 0..reset_interval.len() {
            if self.t[k] < from {
                continue;
            }
            let d = (s[k + 1] - s[k]).abs();
            if reset_interval[k] {
                max_reset_jump = max_reset_jump.max(d);
            } else {
                quiet.push(d);
            }
        }
        quiet.sort_by(f64::total_cmp);
        let typical_increment = if quiet.is_empty() { 0.0 } else { quiet[quiet.len() / 2] };
        JumpStats { max_reset_jump, typical_increment }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "e", "x1", "x2", "u", "y", "uc"])?;
        for k in 0..self.len() {
            w.write_record(
                [self.t[k], self.e[k], self.x1[k], self.x2[k], self.u[k], self.y[k], self.uc[k]].iter().map(|v| format!("{v:.12e}")),
            )?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_resets_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t_reset"])?;
        for t in &self.resets {
            w.write_record([format!("{t:.12e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}
