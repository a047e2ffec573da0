//! Frequency-domain stability test for reset control loops and the Nyquist
//! check of the underlying linear loop.

use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::lti::TransferFunction;
use crate::numerics::Complex64;

/// Net change of `arg(1 + O(jω))` for ω from near zero to near infinity, and the
/// number of closed-loop poles in the right half-plane it implies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NyquistCount {
    pub phase_change: f64,
    pub origin_poles: i32,
    pub unstable_poles: i64,
}

fn open_right_half_plane(tf: &TransferFunction) -> Result<bool> {
    Ok(tf.poles()?.iter().any(|p| p.norm() > 0.0 && p.re > 1e-9 * p.norm()))
}

/// Counts unstable closed-loop poles of the unity-feedback loop around `open_loop`.
/// Open-loop poles must lie in the closed left half-plane.
pub fn nyquist_count(open_loop: &TransferFunction) -> Result<NyquistCount> {
    if open_right_half_plane(open_loop)? {
        return Err(Error::InvalidParameter("open loop has right half-plane poles; the winding count assumes none".into()));
    }
    if !open_loop.is_strictly_proper() {
        return Err(Error::InvalidParameter("open loop must be strictly proper for the winding count".into()));
    }
    let corners = open_loop.corner_frequencies()?;
    let lo = corners.first().copied().unwrap_or(1.0) * 1e-6;
    let mut hi = corners.last().copied().unwrap_or(1.0) * 1e6;
    if open_loop.delay() > 0.0 {
        hi = hi.max(1e3 / open_loop.delay());
    }
    let k = open_loop.origin_poles().max(0);
    let one_plus = |w: f64| -> Result<Complex64> { Ok(1.0 + open_loop.freq_response(w)?) };

    // Accumulate phase along a log grid, bisecting intervals with large increments.
    let mut total = 0.0;
    let points_per_decade = 200.0;
    let n = ((hi / lo).log10() * points_per_decade).ceil() as usize;
    let mut w_prev = lo;
    let mut v_prev = one_plus(lo)?;
    for i in 1..=n {
        let w = lo * (hi / lo).powf(i as f64 / n as f64);
        let v = one_plus(w)?;
        total += refine(&one_plus, w_prev, v_prev, w, v, 0)?;
        w_prev = w;
        v_prev = v;
    }
    let unstable = ((k as f64 * PI / 2.0 - total) / PI).round() as i64;
    Ok(NyquistCount { phase_change: total, origin_poles: k, unstable_poles: unstable })
}

fn refine<F>(f: &F, w0: f64, v0: Complex64, w1: f64, v1: Complex64, depth: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let d = (v1 / v0).arg();
    if d.abs() < 0.2 || depth > 40 {
        return Ok(d);
    }
    let wm = (w0 * w1).sqrt();
    let vm = f(wm)?;
    Ok(refine(f, w0, v0, wm, vm, depth + 1)? + refine(f, wm, vm, w1, v1, depth + 1)?)
}

/// Result of the angle test on `N(jω)` over a frequency grid.
#[derive(Debug, Clone)]
pub struct HbetaReport {
    pub omegas: Vec<f64>,
    pub nx: Vec<f64>,
    pub ny: Vec<f64>,
    pub angles_deg: Vec<f64>,
    pub theta1: f64,
    pub theta2: f64,
    pub satisfied: bool,
    /// Distance of θ1 above -90°.
    pub lower_margin: f64,
    /// Distance of θ2 below 180°.
    pub upper_margin: f64,
    /// Distance of θ2 - θ1 below 180°.
    pub spread_margin: f64,
    /// Frequencies whose angle lies outside (-90°, 180°).
    pub violating: Vec<f64>,
    pub nyquist: NyquistCount,
}

impl HbetaReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["omega", "Nx", "Ny", "angle_deg"])?;
        for i in 0..self.omegas.len() {
            w.write_record([self.omegas[i], self.nx[i], self.ny[i], self.angles_deg[i]].iter().map(|v| format!("{v:.9e}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Sufficient stability test for a loop with one reset element.
///
/// `open_loop` is the full open loop with the reset element replaced by its base
/// linear system; `reset_base` is that base linear system alone. The base linear
/// loop must be closed-loop stable.
pub fn hbeta_check(open_loop: &TransferFunction, reset_base: &TransferFunction, grid: &[f64]) -> Result<HbetaReport> {
    if grid.is_empty() || grid.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::InvalidParameter("frequency grid must be non-empty and positive".into()));
    }
    let nyquist = nyquist_count(open_loop)?;
    if nyquist.unstable_poles != 0 {
        return Err(Error::BaseLoopUnstable { unstable_poles: nyquist.unstable_poles });
    }
    let mut omegas: Vec<f64> = grid.to_vec();
    omegas.sort_by(f64::total_cmp);
    let (first, last) = (omegas[0], omegas[omegas.len() - 1]);
    // Stand-ins for the ω → 0 and ω → ∞ limits.
    omegas.insert(0, first * 1e-3);
    omegas.push(last * 1e3);

    let mut nx = Vec::with_capacity(omegas.len());
    let mut ny = Vec::with_capacity(omegas.len());
    let mut angles = Vec::with_capacity(omegas.len());
    let mut violating = Vec::new();
    for &w in &omegas {
        let o = open_loop.freq_response(w)?;
        let c = reset_base.freq_response(w)?;
        let kappa = 1.0 + o.conj();
        let x = (o * kappa).re;
        let y = (kappa * c).re;
        let a = y.atan2(x).to_degrees();
        if !(a > -90.0 && a < 180.0) {
            violating.push(w);
        }
        nx.push(x);
        ny.push(y);
        angles.push(a);
    }
    let theta1 = angles.iter().copied().fold(f64::INFINITY, f64::min);
    let theta2 = angles.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lower_margin = theta1 + 90.0;
    let upper_margin = 180.0 - theta2;
    let spread_margin = 180.0 - (theta2 - theta1);
    Ok(HbetaReport {
        omegas,
        nx,
        ny,
        angles_deg: angles,
        theta1,
        theta2,
        satisfied: lower_margin > 0.0 && upper_margin > 0.0 && spread_margin > 0.0,
        lower_margin,
        upper_margin,
        spread_margin,
        violating,
        nyquist,
    })
}

/// Phase margin in degrees of a loop whose gain crosses unity at `omega_c`.
pub fn phase_margin_at(open_loop_at_crossover: Complex64) -> f64 {
    crate::numerics::wrap_deg(180.0 + open_loop_at_crossover.arg().to_degrees())
}

/// `1 / (1 + L(jω))`.
pub fn sensitivity(open_loop: &TransferFunction, omega: f64) -> Result<Complex64> {
    Ok(1.0 / (1.0 + open_loop.freq_response(omega)?))
}
