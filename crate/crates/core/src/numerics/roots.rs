use super::Complex64;
use crate::error::{Error, Result};

/// Brent's bracketed root finder (inverse quadratic / secant steps guarded by bisection).
pub fn find_root<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    const MAX_ITER: usize = 200;
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if !fa.is_finite() || !fb.is_finite() || fa * fb > 0.0 {
        return Err(Error::Bracket { f_lo: fa, f_hi: fb });
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITER {
        if fb * fc > 0.0 {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::NoConvergence { iterations: MAX_ITER });
        }
    }
    Err(Error::NoConvergence { iterations: MAX_ITER })
}

/// Roots of a real polynomial given by ascending coefficients (Durand-Kerner iteration).
pub fn poly_roots(ascending: &[f64]) -> Result<Vec<Complex64>> {
    let mut coeffs: Vec<f64> = ascending.to_vec();
    while coeffs.last() == Some(&0.0) {
        coeffs.pop();
    }
    if coeffs.is_empty() {
        return Err(Error::InvalidParameter("zero polynomial has no defined roots".into()));
    }
    let zeros_at_origin = coeffs.iter().take_while(|&&c| c == 0.0).count();
    let core: Vec<f64> = coeffs[zeros_at_origin..].to_vec();
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros_at_origin];
    let degree = core.len() - 1;
    if degree == 0 {
        return Ok(roots);
    }
    let lead = core[degree];
    let monic: Vec<f64> = core.iter().map(|c| c / lead).collect();
    let radius = 1.0 + monic[..degree].iter().map(|c| c.abs()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..degree).map(|k| seed.powu(k as u32) * radius.min(1e12) * 0.5).collect();
    // Spread the initial guesses on a circle when the power sequence collapses.
    for (k, zk) in z.iter_mut().enumerate() {
        let angle = 2.0 * std::f64::consts::PI * k as f64 / degree as f64 + 0.3;
        *zk = Complex64::from_polar(0.5 * radius.min(1e12), angle);
    }
    let eval = |x: Complex64| monic.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c);
    for _ in 0..2000 {
        let mut change: f64 = 0.0;
        for i in 0..degree {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..degree {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            let delta = eval(z[i]) / denom;
            z[i] -= delta;
            change = change.max(delta.norm() / (1.0 + z[i].norm()));
        }
        if change < 1e-15 {
            roots.extend(z);
            return Ok(roots);
        }
    }
    roots.extend(z);
    Ok(roots)
}
