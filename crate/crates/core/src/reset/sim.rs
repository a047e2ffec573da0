use std::f64::consts::PI;

use super::{ResetElement, ResetPath, SimTrace};
use crate::error::{Error, Result};
use crate::lti::{StateSpace, TransferFunction};
use crate::numerics::MatrixR;

/// One SISO stage of a simulated series chain.
#[derive(Debug, Clone)]
pub struct ChainBlock {
    model: StateSpace,
    reset: Option<MatrixR>,
    delay: f64,
    corners: Vec<f64>,
}

impl ChainBlock {
    pub fn linear(tf: &TransferFunction) -> Result<Self> {
        let rational = tf.clone().with_delay(0.0)?;
        Ok(Self { model: StateSpace::from_tf(&rational)?, reset: None, delay: tf.delay(), corners: tf.corner_frequencies()? })
    }

    pub fn reset(element: &ResetElement) -> Result<Self> {
        Ok(Self {
            model: element.base().clone(),
            reset: Some(element.reset_matrix().clone()),
            delay: 0.0,
            corners: element.corner_frequencies()?,
        })
    }

    pub fn is_reset(&self) -> bool {
        self.reset.is_some()
    }
}

/// Series connection of blocks driven by a single signal. At most one block resets;
/// its input is the reset trigger.
#[derive(Debug, Clone)]
pub struct Chain {
    blocks: Vec<ChainBlock>,
    reset_index: Option<usize>,
    group_end: Option<usize>,
}

impl Chain {
    pub fn new(blocks: Vec<ChainBlock>) -> Result<Self> {
        let resets: Vec<usize> = blocks.iter().enumerate().filter(|(_, b)| b.is_reset()).map(|(i, _)| i).collect();
        if resets.len() > 1 {
            return Err(Error::InvalidParameter(format!("chain holds {} reset blocks, at most one is supported", resets.len())));
        }
        if blocks.is_empty() {
            return Err(Error::InvalidParameter("chain is empty".into()));
        }
        Ok(Self { blocks, reset_index: resets.first().copied(), group_end: resets.first().copied() })
    }

    /// Pre-filters, element and post-filters; the group output is the last post-filter.
    pub fn from_path(path: &ResetPath) -> Result<Self> {
        let mut blocks = Vec::new();
        for p in &path.pre {
            blocks.push(ChainBlock::linear(p)?);
        }
        blocks.push(ChainBlock::reset(&path.element)?);
        for p in &path.post {
            blocks.push(ChainBlock::linear(p)?);
        }
        let end = blocks.len() - 1;
        Ok(Self::new(blocks)?.with_group_end(end))
    }

    /// Block whose output is recorded as `u`.
    pub fn with_group_end(mut self, index: usize) -> Self {
        self.group_end = Some(index.min(self.blocks.len() - 1));
        self
    }

    pub fn then(mut self, block: ChainBlock) -> Result<Self> {
        if block.is_reset() && self.reset_index.is_some() {
            return Err(Error::InvalidParameter("chain already holds a reset block".into()));
        }
        if block.is_reset() {
            self.reset_index = Some(self.blocks.len());
        }
        self.blocks.push(block);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn reset_index(&self) -> Option<usize> {
        self.reset_index
    }

    /// Slowest nonzero pole or zero.
    pub fn min_corner(&self) -> f64 {
        self.blocks.iter().flat_map(|b| b.corners.iter().copied()).fold(f64::INFINITY, f64::min)
    }

    pub fn max_corner(&self) -> f64 {
        self.blocks.iter().flat_map(|b| b.corners.iter().copied()).fold(0.0, f64::max)
    }
}

/// Reference or input signal.
#[derive(Debug, Clone)]
pub enum Excitation {
    Step { amplitude: f64 },
    Sine { amplitude: f64, omega: f64, phase: f64 },
    /// Samples at a fixed spacing, linearly interpolated and held after the end.
    Sampled { values: Vec<f64>, spacing: f64 },
}

impl Excitation {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            Excitation::Step { amplitude } => *amplitude,
            Excitation::Sine { amplitude, omega, phase } => amplitude * (omega * t + phase).sin(),
            Excitation::Sampled { values, spacing } => {
                if values.is_empty() {
                    return 0.0;
                }
                let f = (t / spacing).max(0.0);
                let k = f.floor() as usize;
                if k + 1 >= values.len() {
                    return *values.last().unwrap();
                }
                let frac = f - k as f64;
                values[k] * (1.0 - frac) + values[k + 1] * frac
            }
        }
    }
}

impl Excitation {
    pub fn sine(amplitude: f64, omega: f64) -> Self {
        Excitation::Sine { amplitude, omega, phase: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopMode {
    /// The excitation drives the chain directly.
    Open,
    /// Unity negative feedback: the chain is driven by `r - y`.
    UnityFeedback,
}

/// Fixed-step integration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub step: f64,
    pub duration: f64,
    /// Bisection stops once the bracket is narrower than this fraction of the step.
    pub bisection_tol: f64,
    /// Minimum number of steps between accepted resets.
    pub min_reset_steps: usize,
    /// Record every n-th step.
    pub record_every: usize,
}

impl SimConfig {
    /// Largest admissible step for the fastest corner `omega_max`.
    pub fn step_limit(omega_max: f64) -> f64 {
        2.0 * PI / (50.0 * omega_max)
    }

    /// Default step `2π / (200 ω_max)`.
    pub fn for_corner(omega_max: f64, duration: f64) -> Self {
        Self { step: 2.0 * PI / (200.0 * omega_max), duration, bisection_tol: 1e-3, min_reset_steps: 1, record_every: 1 }
    }

    pub fn with_step(step: f64, duration: f64) -> Self {
        Self { step, duration, bisection_tol: 1e-3, min_reset_steps: 1, record_every: 1 }
    }

    pub fn check(&self, omega_max: f64) -> Result<()> {
        if !(self.step > 0.0) || !(self.duration > 0.0) {
            return Err(Error::InvalidParameter(format!("step {} and duration {} must be positive", self.step, self.duration)));
        }
        if self.record_every == 0 || self.min_reset_steps == 0 {
            return Err(Error::InvalidParameter("record_every and min_reset_steps must be at least 1".into()));
        }
        if omega_max > 0.0 {
            let limit = Self::step_limit(omega_max);
            if self.step > limit * (1.0 + 1e-12) {
                return Err(Error::StepTooLarge { step: self.step, limit, omega_max });
            }
        }
        Ok(())
    }
}

/// Signals at one instant.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub e: f64,
    pub x1: f64,
    pub x2: f64,
    pub u: f64,
    pub y: f64,
    pub uc: f64,
}

#[derive(Debug, Clone)]
struct FlatBlock {
    n: usize,
    offset: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    d: f64,
    reset: Option<Vec<f64>>,
    delay_steps: usize,
}

#[derive(Debug, Clone, Default)]
struct Workspace {
    input: Vec<f64>,
    output: Vec<f64>,
    input_affine: Vec<(f64, f64)>,
    output_affine: Vec<(f64, f64)>,
    // Input each block would see without its delay, affine in the chain input.
    feed: Vec<(f64, f64)>,
    e: f64,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

/// Fixed-step RK4 integrator for a chain with at most one reset block, with
/// zero-crossing location by bisection of the integration sub-step.
#[derive(Debug, Clone)]
pub struct Simulator {
    blocks: Vec<FlatBlock>,
    nx: usize,
    reset_index: Option<usize>,
    group_end: usize,
    mode: LoopMode,
    excitation: Excitation,
    cfg: SimConfig,
    x: Vec<f64>,
    steps: usize,
    history: Vec<Vec<f64>>,
    last_sign: f64,
    steps_since_reset: usize,
    resets: Vec<f64>,
    suppressed: usize,
    divergence_limit: f64,
    ws: Workspace,
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl Simulator {
    pub fn new(chain: &Chain, mode: LoopMode, excitation: Excitation, cfg: SimConfig) -> Result<Self> {
        cfg.check(chain.max_corner())?;
        let mut blocks = Vec::with_capacity(chain.blocks.len());
        let mut offset = 0;
        for b in &chain.blocks {
            let n = b.model.order();
            let delay_steps = (b.delay / cfg.step).round() as usize;
            if b.delay > 0.0 && delay_steps == 0 {
                return Err(Error::InvalidParameter(format!("delay {} s is shorter than half a step {} s", b.delay, cfg.step)));
            }
            blocks.push(FlatBlock {
                n,
                offset,
                a: b.model.a.transpose().iter().copied().collect(),
                b: b.model.b.iter().copied().collect(),
                c: b.model.c.iter().copied().collect(),
                d: b.model.d[(0, 0)],
                reset: b.reset.as_ref().map(|r| r.transpose().iter().copied().collect()),
                delay_steps,
            });
            offset += n;
        }
        let nb = blocks.len();
        let ws = Workspace {
            input: vec![0.0; nb],
            output: vec![0.0; nb],
            input_affine: vec![(0.0, 0.0); nb],
            output_affine: vec![(0.0, 0.0); nb],
            feed: vec![(0.0, 0.0); nb],
            e: 0.0,
            k: [vec![0.0; offset], vec![0.0; offset], vec![0.0; offset], vec![0.0; offset]],
            tmp: vec![0.0; offset],
        };
        let mut sim = Self {
            history: vec![Vec::new(); nb],
            blocks,
            nx: offset,
            reset_index: chain.reset_index,
            group_end: chain.group_end.unwrap_or(nb - 1),
            mode,
            excitation,
            cfg,
            x: vec![0.0; offset],
            steps: 0,
            last_sign: 0.0,
            steps_since_reset: 0,
            resets: Vec::new(),
            suppressed: 0,
            divergence_limit: f64::INFINITY,
            ws,
        };
        sim.evaluate_current();
        sim.record_history();
        sim.last_sign = sign(sim.trigger_now());
        Ok(sim)
    }

    /// A chain output magnitude above `limit` aborts the run with an instability error.
    pub fn with_divergence_limit(mut self, limit: f64) -> Self {
        self.divergence_limit = limit;
        self
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.cfg.step
    }

    pub fn resets(&self) -> &[f64] {
        &self.resets
    }

    pub fn suppressed_resets(&self) -> usize {
        self.suppressed
    }

    fn delayed_input(&self, i: usize, t: f64) -> f64 {
        let blk = &self.blocks[i];
        let tau = t - blk.delay_steps as f64 * self.cfg.step;
        if tau < 0.0 {
            return 0.0;
        }
        let hist = &self.history[i];
        let f = tau / self.cfg.step;
        let k = f.floor() as usize;
        if k + 1 >= hist.len() {
            return hist.last().copied().unwrap_or(0.0);
        }
        let frac = f - k as f64;
        hist[k] * (1.0 - frac) + hist[k + 1] * frac
    }

    // Propagates signals through the chain as affine functions of the chain input,
    // then fixes the input from the loop equation.
    fn evaluate(&mut self, x: &[f64], t: f64) {
        let r = self.excitation.at(t);
        let mut alpha = 0.0;
        let mut beta = 1.0;
        for i in 0..self.blocks.len() {
            let (ia, ib) = if self.blocks[i].delay_steps > 0 { (self.delayed_input(i, t), 0.0) } else { (alpha, beta) };
            let blk = &self.blocks[i];
            let cx: f64 = blk.c.iter().zip(&x[blk.offset..blk.offset + blk.n]).map(|(c, v)| c * v).sum();
            let ws = &mut self.ws;
            ws.feed[i] = (alpha, beta);
            ws.input_affine[i] = (ia, ib);
            ws.output_affine[i] = (cx + blk.d * ia, blk.d * ib);
            (alpha, beta) = ws.output_affine[i];
        }
        let e = match self.mode {
            LoopMode::Open => r,
            LoopMode::UnityFeedback => (r - alpha) / (1.0 + beta),
        };
        let ws = &mut self.ws;
        ws.e = e;
        for i in 0..self.blocks.len() {
            ws.input[i] = ws.input_affine[i].0 + ws.input_affine[i].1 * e;
            ws.output[i] = ws.output_affine[i].0 + ws.output_affine[i].1 * e;
        }
    }

    fn derivative(&mut self, x: &[f64], t: f64, dx_slot: usize) {
        self.evaluate(x, t);
        let mut dx = std::mem::take(&mut self.ws.k[dx_slot]);
        for (i, blk) in self.blocks.iter().enumerate() {
            let u = self.ws.input[i];
            let xs = &x[blk.offset..blk.offset + blk.n];
            for r in 0..blk.n {
                let row = &blk.a[r * blk.n..(r + 1) * blk.n];
                dx[blk.offset + r] = row.iter().zip(xs).map(|(a, v)| a * v).sum::<f64>() + blk.b[r] * u;
            }
        }
        self.ws.k[dx_slot] = dx;
    }

    fn rk4(&mut self, x: &[f64], t: f64, h: f64, out: &mut [f64]) {
        let n = self.nx;
        self.derivative(x, t, 0);
        let mut tmp = std::mem::take(&mut self.ws.tmp);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * self.ws.k[0][i];
        }
        self.derivative(&tmp, t + 0.5 * h, 1);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * self.ws.k[1][i];
        }
        self.derivative(&tmp, t + 0.5 * h, 2);
        for i in 0..n {
            tmp[i] = x[i] + h * self.ws.k[2][i];
        }
        self.derivative(&tmp, t + h, 3);
        for i in 0..n {
            out[i] = x[i] + h / 6.0 * (self.ws.k[0][i] + 2.0 * self.ws.k[1][i] + 2.0 * self.ws.k[2][i] + self.ws.k[3][i]);
        }
        self.ws.tmp = tmp;
    }

    fn trigger_at(&mut self, x: &[f64], t: f64) -> f64 {
        match self.reset_index {
            Some(i) => {
                self.evaluate(x, t);
                self.ws.input[i]
            }
            None => 0.0,
        }
    }

    fn evaluate_current(&mut self) {
        let x = std::mem::take(&mut self.x);
        let t = self.time();
        self.evaluate(&x, t);
        self.x = x;
    }

    fn trigger_now(&self) -> f64 {
        self.reset_index.map_or(0.0, |i| self.ws.input[i])
    }

    fn record_history(&mut self) {
        for (i, blk) in self.blocks.iter().enumerate() {
            if blk.delay_steps > 0 {
                let (a, b) = self.ws.feed[i];
                self.history[i].push(a + b * self.ws.e);
            }
        }
    }

    fn apply_reset(&self, x: &mut [f64]) {
        if let Some(i) = self.reset_index {
            let blk = &self.blocks[i];
            if let Some(m) = &blk.reset {
                let old: Vec<f64> = x[blk.offset..blk.offset + blk.n].to_vec();
                for r in 0..blk.n {
                    x[blk.offset + r] = m[r * blk.n..(r + 1) * blk.n].iter().zip(&old).map(|(a, v)| a * v).sum();
                }
            }
        }
    }

    /// Advances one step, locating and applying at most one reset inside it.
    pub fn step(&mut self) -> Result<()> {
        let h = self.cfg.step;
        let t = self.time();
        // Same expression as `time()` after the step, so the trigger seen here and the
        // one stored at the end of the step agree bit for bit.
        let t_next = (self.steps + 1) as f64 * h;
        let x0 = self.x.clone();
        let mut next = vec![0.0; self.nx];
        self.rk4(&x0, t, h, &mut next);

        let mut crossed_to = None;
        if self.reset_index.is_some() {
            let trig = self.trigger_at(&next, t_next);
            let crossed = self.last_sign != 0.0 && trig * self.last_sign <= 0.0;
            if crossed && self.steps_since_reset + 1 < self.cfg.min_reset_steps {
                self.suppressed += 1;
                crossed_to = Some(-self.last_sign);
            } else if crossed {
                let before = self.last_sign;
                crossed_to = Some(-before);
                let (mut lo, mut hi) = (0.0, h);
                let mut probe = vec![0.0; self.nx];
                while hi - lo > self.cfg.bisection_tol * h {
                    let mid = 0.5 * (lo + hi);
                    self.rk4(&x0, t, mid, &mut probe);
                    if self.trigger_at(&probe, t + mid) * before > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let mut at_reset = vec![0.0; self.nx];
                self.rk4(&x0, t, hi, &mut at_reset);
                self.apply_reset(&mut at_reset);
                self.resets.push(t + hi);
                self.steps_since_reset = 0;
                if h - hi > 0.0 {
                    self.rk4(&at_reset, t + hi, h - hi, &mut next);
                } else {
                    next = at_reset;
                }
                let after = self.trigger_at(&next, t_next);
                if after * before > 0.0 {
                    // Crossed back within the same step: only one reset per step.
                    self.suppressed += 1;
                }
            }
        }

        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Unstable { time: t + h });
        }
        self.x = next;
        self.steps += 1;
        self.steps_since_reset += 1;
        self.evaluate_current();
        if !(self.ws.output[self.blocks.len() - 1].abs() <= self.divergence_limit) {
            return Err(Error::Unstable { time: t + h });
        }
        self.record_history();
        // A trigger sitting exactly on zero keeps the side it was last seen on, so a
        // crossing that lands on a sample instant is neither missed nor counted twice.
        let s = sign(self.trigger_now());
        if s != 0.0 {
            self.last_sign = s;
        } else if let Some(side) = crossed_to {
            self.last_sign = side;
        }
        Ok(())
    }

    pub fn sample(&self) -> Sample {
        let (x1, x2) = match self.reset_index {
            Some(i) => (self.ws.input[i], self.ws.output[i]),
            None => (0.0, 0.0),
        };
        let last = self.blocks.len() - 1;
        Sample {
            t: self.time(),
            e: self.ws.e,
            x1,
            x2,
            u: self.ws.output[self.group_end],
            y: self.ws.output[last],
            uc: self.ws.input[last],
        }
    }

    /// Runs to the configured duration and returns the recorded trace.
    pub fn run(mut self) -> Result<SimTrace> {
        let total = (self.cfg.duration / self.cfg.step).round() as usize;
        let mut trace = SimTrace::with_capacity(total / self.cfg.record_every + 1, self.cfg.step * self.cfg.record_every as f64);
        trace.push(self.sample());
        for k in 1..=total {
            self.step()?;
            if k % self.cfg.record_every == 0 {
                trace.push(self.sample());
            }
        }
        trace.resets = self.resets;
        trace.suppressed_resets = self.suppressed;
        Ok(trace)
    }
}

/// Zero crossings of `sin(ωt + φ)` on `(0, t_end]`.
pub fn predicted_reset_instants(omega: f64, trigger_phase: f64, t_end: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = (trigger_phase / PI).floor() as i64;
    loop {
        let t = (k as f64 * PI - trigger_phase) / omega;
        if t > t_end {
            break;
        }
        if t > 0.0 {
            out.push(t);
        }
        k += 1;
    }
    out
}
