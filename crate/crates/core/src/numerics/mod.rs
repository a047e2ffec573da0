//! Dense linear algebra, root finding and spectral helpers shared by the
//! analysis and simulation modules.

mod expm;
mod linsolve;
mod roots;
mod spectrum;

use nalgebra::DMatrix;
pub use num_complex::Complex64;

pub use expm::mat_exp;
pub use linsolve::{solve, solve_complex, solve_real, PIVOT_TOLERANCE};
pub use roots::{find_root, poly_roots};
pub use spectrum::{fft_spectrum, Spectrum};

pub type MatrixR = DMatrix<f64>;
pub type MatrixC = DMatrix<Complex64>;

/// Imaginary unit.
pub const J: Complex64 = Complex64::new(0.0, 1.0);

pub fn to_complex(m: &MatrixR) -> MatrixC {
    m.map(|v| Complex64::new(v, 0.0))
}

/// Wraps an angle in degrees into (-180, 180].
pub fn wrap_deg(angle: f64) -> f64 {
    let mut a = angle % 360.0;
    if a <= -180.0 {
        a += 360.0;
    } else if a > 180.0 {
        a -= 360.0;
    }
    a
}

/// `n` points from `lo` to `hi`, equally spaced in log10.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect()
        }
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

pub fn db(mag: f64) -> f64 {
    20.0 * mag.log10()
}

/// Unwraps a phase sequence in radians so consecutive samples differ by less than pi.
pub fn unwrap(phase: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phase.len());
    let mut offset = 0.0;
    for (i, &p) in phase.iter().enumerate() {
        if i > 0 {
            let prev = phase[i - 1];
            let d = p - prev;
            if d > std::f64::consts::PI {
                offset -= 2.0 * std::f64::consts::PI;
            } else if d < -std::f64::consts::PI {
                offset += 2.0 * std::f64::consts::PI;
            }
        }
        out.push(p + offset);
    }
    out
}
