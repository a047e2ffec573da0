use super::TransferFunction;
use crate::error::{Error, Result};
use crate::numerics::{poly_roots, solve_complex, to_complex, Complex64, MatrixC, MatrixR, J};

/// Continuous-time state-space model `x' = A x + B u`, `y = C x + D u`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub a: MatrixR,
    pub b: MatrixR,
    pub c: MatrixR,
    pub d: MatrixR,
}

impl StateSpace {
    pub fn new(a: MatrixR, b: MatrixR, c: MatrixR, d: MatrixR) -> Result<Self> {
        let n = a.nrows();
        if !a.is_square() || b.nrows() != n || c.ncols() != n || d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(Error::Shape(format!(
                "inconsistent state-space dimensions: A {}x{}, B {}x{}, C {}x{}, D {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols(),
                c.nrows(),
                c.ncols(),
                d.nrows(),
                d.ncols()
            )));
        }
        Ok(Self { a, b, c, d })
    }

    /// Controllable canonical realization of a delay-free transfer function.
    pub fn from_tf(tf: &TransferFunction) -> Result<Self> {
        if tf.delay() != 0.0 {
            return Err(Error::InvalidParameter("state-space realization does not carry input delay".into()));
        }
        let den = tf.den();
        let n = den.len() - 1;
        let lead = den[n];
        let a_coef: Vec<f64> = den.iter().map(|v| v / lead).collect();
        let mut b_coef: Vec<f64> = tf.num().iter().map(|v| v / lead).collect();
        b_coef.resize(n + 1, 0.0);
        let feedthrough = b_coef[n];

        let mut a = MatrixR::zeros(n, n);
        for i in 0..n.saturating_sub(1) {
            a[(i, i + 1)] = 1.0;
        }
        let mut b = MatrixR::zeros(n, 1);
        let mut c = MatrixR::zeros(1, n);
        if n > 0 {
            for j in 0..n {
                a[(n - 1, j)] = -a_coef[j];
                c[(0, j)] = b_coef[j] - feedthrough * a_coef[j];
            }
            b[(n - 1, 0)] = 1.0;
        }
        Self::new(a, b, c, MatrixR::from_element(1, 1, feedthrough))
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn is_siso(&self) -> bool {
        self.b.ncols() == 1 && self.c.nrows() == 1
    }

    /// `C (jωI - A)^{-1} B + D`.
    pub fn freq_response(&self, omega: f64) -> Result<MatrixC> {
        let n = self.order();
        let m = MatrixC::identity(n, n) * (J * omega) - to_complex(&self.a);
        let x = solve_complex(&m, &to_complex(&self.b))?;
        Ok(to_complex(&self.c) * x + to_complex(&self.d))
    }

    /// Characteristic polynomial `det(sI - A)` in ascending powers (Faddeev-LeVerrier).
    pub fn characteristic_polynomial(&self) -> Vec<f64> {
        let n = self.order();
        let mut coeffs = vec![0.0; n + 1];
        coeffs[n] = 1.0;
        let mut m = MatrixR::zeros(n, n);
        for k in 1..=n {
            m = &self.a * &m + MatrixR::identity(n, n) * coeffs[n - k + 1];
            coeffs[n - k] = -(&self.a * &m).trace() / k as f64;
        }
        coeffs
    }

    /// Magnitudes of the nonzero eigenvalues of `A`.
    pub fn pole_magnitudes(&self) -> Result<Vec<f64>> {
        if self.order() == 0 {
            return Ok(Vec::new());
        }
        Ok(poly_roots(&self.characteristic_polynomial())?.into_iter().map(|z| z.norm()).filter(|&m| m > 0.0).collect())
    }

    pub fn freq_response_siso(&self, omega: f64) -> Result<Complex64> {
        Ok(self.freq_response(omega)?[(0, 0)])
    }
}
