use std::fmt;

use rayon::prelude::*;

use super::FrfData;
use crate::error::{Error, Result};
use crate::lti::TransferFunction;
use crate::numerics::{logspace, solve_real, unwrap, Complex64, MatrixR, J};

/// Fraction of the points (highest frequencies) used to estimate the delay.
const DELAY_FIT_FRACTION: f64 = 0.5;
const STAGNATION_ITERATIONS: usize = 50;
const MAX_ITERATIONS: usize = 5000;
/// A fitted resonance this far below the lowest measured frequency is treated as absent.
const DEGENERATE_RATIO: f64 = 0.05;

/// Per-point weighting of the fit residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitWeight {
    Uniform,
    /// Weight proportional to `1/f`.
    LowFrequency,
}

/// `gain · e^{-delay·s} / (s² + damping·s + stiffness)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderDelay {
    pub gain: f64,
    pub damping: f64,
    pub stiffness: f64,
    pub delay: f64,
}

impl SecondOrderDelay {
    pub fn natural_frequency(&self) -> f64 {
        self.stiffness.sqrt()
    }

    pub fn damping_ratio(&self) -> f64 {
        if self.stiffness > 0.0 {
            self.damping / (2.0 * self.stiffness.sqrt())
        } else {
            0.0
        }
    }

    pub fn response(&self, omega: f64) -> Complex64 {
        let s = J * omega;
        self.gain * (-s * self.delay).exp() / (s * s + self.damping * s + self.stiffness)
    }

    pub fn tf(&self) -> Result<TransferFunction> {
        TransferFunction::new(vec![self.gain], vec![self.stiffness, self.damping, 1.0])?.with_delay(self.delay)
    }
}

impl fmt::Display for SecondOrderDelay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6} e^(-{:.6e} s) / (s^2 + {:.6} s + {:.6})", self.gain, self.delay, self.damping, self.stiffness)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub model: SecondOrderDelay,
    /// Weighted mean of `|ln(H_meas / H_model)|²`.
    pub residual: f64,
    /// Residual of the grid-search starting point.
    pub initial_residual: f64,
    pub iterations: usize,
    /// The data shows no resonance and a double integrator was fitted instead.
    pub degenerate: bool,
    pub warning: Option<String>,
}

struct Problem {
    omegas: Vec<f64>,
    /// Measured response with the estimated delay removed.
    measured: Vec<Complex64>,
    weights: Vec<f64>,
}

impl Problem {
    /// Best log-gain for fixed poles, and the residual it gives.
    fn evaluate(&self, damping: f64, stiffness: f64) -> (f64, f64) {
        let ratios: Vec<Complex64> = self
            .omegas
            .iter()
            .zip(&self.measured)
            .map(|(&w, &h)| {
                let s = J * w;
                (h * (s * s + damping * s + stiffness)).ln()
            })
            .collect();
        let wsum: f64 = self.weights.iter().sum();
        let log_gain = ratios.iter().zip(&self.weights).map(|(r, w)| w * r.re).sum::<f64>() / wsum;
        let res = ratios.iter().zip(&self.weights).map(|(r, w)| w * ((r.re - log_gain).powi(2) + r.im.powi(2))).sum::<f64>() / wsum;
        (log_gain, res)
    }

    /// Residual in the search coordinates `(ln ω_n, ln ζ)`.
    fn cost(&self, x: &[f64; 2]) -> f64 {
        let wn = x[0].exp();
        let zeta = x[1].exp();
        let r = self.evaluate(2.0 * zeta * wn, wn * wn).1;
        if r.is_finite() {
            r
        } else {
            f64::INFINITY
        }
    }
}

/// Least-squares fit of `φ = c0 + c1/ω − Tω` to the unwrapped phase of the upper
/// frequency range.
fn estimate_delay(omegas: &[f64], phase: &[f64]) -> Result<f64> {
    let n = omegas.len();
    let m = ((n as f64 * DELAY_FIT_FRACTION).ceil() as usize).clamp(5.min(n), n);
    let mut ata = MatrixR::zeros(3, 3);
    let mut atb = MatrixR::zeros(3, 1);
    for i in n - m..n {
        let row = [1.0, 1.0 / omegas[i], -omegas[i]];
        for a in 0..3 {
            for b in 0..3 {
                ata[(a, b)] += row[a] * row[b];
            }
            atb[(a, 0)] += row[a] * phase[i];
        }
    }
    let coef = solve_real(&ata, &atb)?;
    Ok(coef[(2, 0)].max(0.0))
}

/// Nelder-Mead minimisation. Returns the best point, its value, the iteration count
/// and whether the search stopped for lack of progress rather than convergence.
fn nelder_mead(f: impl Fn(&[f64; 2]) -> f64, start: [f64; 2], scale: f64) -> ([f64; 2], f64, usize, bool) {
    let mut simplex = [start, [start[0] + scale, start[1]], [start[0], start[1] + scale]];
    let mut vals = simplex.map(|p| f(&p));
    let mut best = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let mut since_improvement = 0;
    let lerp = |a: &[f64; 2], b: &[f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    for iter in 1..=MAX_ITERATIONS {
        let mut order = [0, 1, 2];
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        simplex = order.map(|i| simplex[i]);
        vals = order.map(|i| vals[i]);

        let diameter = simplex[1..].iter().map(|p| (p[0] - simplex[0][0]).hypot(p[1] - simplex[0][1])).fold(0.0, f64::max);
        if diameter < 1e-10 {
            return (simplex[0], vals[0], iter, false);
        }
        if since_improvement >= STAGNATION_ITERATIONS {
            return (simplex[0], vals[0], iter, true);
        }

        let centroid = lerp(&simplex[0], &simplex[1], 0.5);
        let reflected = lerp(&centroid, &simplex[2], -1.0);
        let fr = f(&reflected);
        if fr < vals[0] {
            let expanded = lerp(&centroid, &simplex[2], -2.0);
            let fe = f(&expanded);
            (simplex[2], vals[2]) = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < vals[1] {
            (simplex[2], vals[2]) = (reflected, fr);
        } else {
            let contracted = if fr < vals[2] { lerp(&centroid, &reflected, 0.5) } else { lerp(&centroid, &simplex[2], 0.5) };
            let fc = f(&contracted);
            if fc < vals[2].min(fr) {
                (simplex[2], vals[2]) = (contracted, fc);
            } else {
                for i in 1..3 {
                    simplex[i] = lerp(&simplex[0], &simplex[i], 0.5);
                    vals[i] = f(&simplex[i]);
                }
            }
        }
        let current = vals.iter().copied().fold(f64::INFINITY, f64::min);
        if current < best * (1.0 - 1e-12) {
            best = current;
            since_improvement = 0;
        } else {
            since_improvement += 1;
        }
    }
    let i = (0..3).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    (simplex[i], vals[i], MAX_ITERATIONS, true)
}

/// Fits `k e^{-Ts}/(s² + c s + ω_n²)` to measured data. The delay is taken from the
/// high-frequency phase slope and then held fixed; the poles come from a grid search
/// refined by a simplex search, with the gain solved in closed form throughout.
pub fn fit_second_order_delay(data: &FrfData, weight: FitWeight) -> Result<FitReport> {
    let pts = data.points();
    if pts.len() < 10 {
        return Err(Error::InvalidParameter(format!("fitting needs at least 10 frequency points, got {}", pts.len())));
    }
    let omegas: Vec<f64> = pts.iter().map(|p| p.omega()).collect();
    let (w_lo, w_hi) = (omegas[0], omegas[omegas.len() - 1]);
    if w_hi < 10.0 * w_lo {
        return Err(Error::InvalidParameter("frequency data must span at least one decade".into()));
    }
    if pts.iter().any(|p| !(p.response.norm() > 0.0)) {
        return Err(Error::InvalidParameter("response magnitudes must be nonzero".into()));
    }
    let phase = unwrap(&pts.iter().map(|p| p.response.arg()).collect::<Vec<_>>());
    let delay = estimate_delay(&omegas, &phase)?;

    let weights = match weight {
        FitWeight::Uniform => vec![1.0; omegas.len()],
        FitWeight::LowFrequency => omegas.iter().map(|w| w_lo / w).collect(),
    };
    let measured = pts.iter().zip(&omegas).map(|(p, &w)| p.response * (J * w * delay).exp()).collect();
    let problem = Problem { omegas: omegas.clone(), measured, weights };

    let wn_grid = logspace(w_lo * DEGENERATE_RATIO, w_hi, 80);
    let zeta_grid = logspace(1e-3, 2.0, 40);
    let (start, initial_residual) = wn_grid
        .par_iter()
        .flat_map_iter(|&wn| zeta_grid.iter().map(move |&z| [wn.ln(), z.ln()]))
        .map(|x| (x, problem.cost(&x)))
        .reduce(|| ([0.0, 0.0], f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    if !initial_residual.is_finite() {
        return Err(Error::NoConvergence { iterations: 0 });
    }

    let (x, residual, iterations, stagnated) = nelder_mead(|x| problem.cost(x), start, 0.1);
    let wn = x[0].exp();
    let zeta = x[1].exp();
    let mut warning = stagnated.then(|| {
        format!("fit stopped after {STAGNATION_ITERATIONS} iterations without improvement; returning the best model found")
    });

    if wn < DEGENERATE_RATIO * w_lo {
        let (log_gain, res) = problem.evaluate(0.0, 0.0);
        warning = Some(format!(
            "fitted natural frequency {wn:.3e} rad/s lies far below the data; using a double integrator"
        ));
        return Ok(FitReport {
            model: SecondOrderDelay { gain: log_gain.exp(), damping: 0.0, stiffness: 0.0, delay },
            residual: res,
            initial_residual,
            iterations,
            degenerate: true,
            warning,
        });
    }
    let (log_gain, residual_check) = problem.evaluate(2.0 * zeta * wn, wn * wn);
    debug_assert!((residual_check - residual).abs() <= 1e-12 * residual.max(1.0));
    Ok(FitReport {
        model: SecondOrderDelay { gain: log_gain.exp(), damping: 2.0 * zeta * wn, stiffness: wn * wn, delay },
        residual,
        initial_residual,
        iterations,
        degenerate: false,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::blocks::precision_stage;
    use crate::numerics::logspace;

    fn freqs() -> Vec<f64> {
        logspace(1.0, 2000.0, 200)
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn recovers_stage_model() {
        let data = FrfData::from_model("stage", &precision_stage(), &freqs()).unwrap();
        for weight in [FitWeight::Uniform, FitWeight::LowFrequency] {
            let r = fit_second_order_delay(&data, weight).unwrap();
            let m = r.model;
            assert!(rel(m.gain, 9836.0) < 0.01, "{m}");
            assert!(rel(m.damping, 8.737) < 0.01, "{m}");
            assert!(rel(m.stiffness, 7376.0) < 0.01, "{m}");
            assert!(rel(m.delay, 1e-4) < 0.01, "{m}");
            assert!(!r.degenerate);
        }
    }

    #[test]
    fn pure_mass_falls_back_to_double_integrator() {
        let mass = TransferFunction::new(vec![1.0], vec![0.0, 0.0, 1.0]).unwrap();
        let data = FrfData::from_model("mass", &mass, &freqs()).unwrap();
        let r = fit_second_order_delay(&data, FitWeight::Uniform).unwrap();
        assert!(r.degenerate);
        assert!(r.warning.is_some());
        assert_eq!(r.model.stiffness, 0.0);
        assert!(rel(r.model.gain, 1.0) < 1e-6);
        assert!(r.model.delay < 1e-9);
    }

    #[test]
    fn residual_never_exceeds_start() {
        let data = FrfData::from_model("stage", &precision_stage(), &freqs()).unwrap();
        let r = fit_second_order_delay(&data, FitWeight::Uniform).unwrap();
        assert!(r.residual <= r.initial_residual);
    }

    #[test]
    fn too_few_points() {
        let data = FrfData::from_model("stage", &precision_stage(), &logspace(1.0, 100.0, 9)).unwrap();
        assert!(fit_second_order_delay(&data, FitWeight::Uniform).is_err());
    }
}
