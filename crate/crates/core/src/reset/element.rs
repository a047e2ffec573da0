use crate::error::{Error, Result};
use crate::lti::blocks::{cglp_lead, cr_postfilter, cr_prefilter};
use crate::lti::{StateSpace, TransferFunction};
use crate::numerics::{Complex64, MatrixR};

/// Linear flow `x' = A x + B e`, `u = C x + D e` whose state jumps to `A_ρ x`
/// whenever the input crosses zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ResetElement {
    base: StateSpace,
    reset_matrix: MatrixR,
}

impl ResetElement {
    pub fn new(base: StateSpace, reset_matrix: MatrixR) -> Result<Self> {
        if !base.is_siso() {
            return Err(Error::Shape("reset element must be single-input single-output".into()));
        }
        let n = base.order();
        if reset_matrix.nrows() != n || reset_matrix.ncols() != n {
            return Err(Error::Shape(format!(
                "reset matrix is {}x{}, state dimension is {n}",
                reset_matrix.nrows(),
                reset_matrix.ncols()
            )));
        }
        if reset_matrix.iter().any(|v| !(v.abs() <= 1.0)) {
            return Err(Error::InvalidParameter("reset matrix entries must lie in [-1, 1]".into()));
        }
        Ok(Self { base, reset_matrix })
    }

    /// Every state is multiplied by `gamma` at a reset.
    pub fn uniform(base: StateSpace, gamma: f64) -> Result<Self> {
        let n = base.order();
        Self::new(base, MatrixR::identity(n, n) * gamma)
    }

    pub fn from_tf(tf: &TransferFunction, gamma: f64) -> Result<Self> {
        Self::uniform(StateSpace::from_tf(tf)?, gamma)
    }

    /// Integrator whose state is zeroed at every reset.
    pub fn clegg() -> Self {
        let one = MatrixR::from_element(1, 1, 1.0);
        let base = StateSpace::new(MatrixR::zeros(1, 1), one.clone(), one, MatrixR::zeros(1, 1)).expect("scalar model");
        Self { base, reset_matrix: MatrixR::zeros(1, 1) }
    }

    /// First-order reset element `ω_r / (s + ω_r)` with reset factor `gamma`.
    pub fn fore(omega_r: f64, gamma: f64) -> Result<Self> {
        if !(omega_r > 0.0) || !omega_r.is_finite() {
            return Err(Error::InvalidParameter(format!("reset corner must be positive, got {omega_r}")));
        }
        let base = StateSpace::new(
            MatrixR::from_element(1, 1, -omega_r),
            MatrixR::from_element(1, 1, omega_r),
            MatrixR::from_element(1, 1, 1.0),
            MatrixR::zeros(1, 1),
        )?;
        Self::uniform(base, gamma)
    }

    pub fn base(&self) -> &StateSpace {
        &self.base
    }

    pub fn reset_matrix(&self) -> &MatrixR {
        &self.reset_matrix
    }

    pub fn order(&self) -> usize {
        self.base.order()
    }

    /// Frequency response of the element with resets disabled.
    pub fn base_response(&self, omega: f64) -> Result<Complex64> {
        self.base.freq_response_siso(omega)
    }

    pub fn corner_frequencies(&self) -> Result<Vec<f64>> {
        self.base.pole_magnitudes()
    }
}

/// Reset element wrapped by linear filters: `post · Σ_R · pre`, with the reset
/// triggered by the output of the pre-filters.
#[derive(Debug, Clone)]
pub struct ResetPath {
    pub pre: Vec<TransferFunction>,
    pub element: ResetElement,
    pub post: Vec<TransferFunction>,
}

impl ResetPath {
    pub fn bare(element: ResetElement) -> Self {
        Self { pre: Vec::new(), element, post: Vec::new() }
    }

    /// First-order reset element followed by its lead filter.
    pub fn cglp(omega_r: f64, gamma: f64, alpha: f64, omega_f: f64) -> Result<Self> {
        Ok(Self { pre: Vec::new(), element: ResetElement::fore(omega_r, gamma)?, post: vec![cglp_lead(omega_r, alpha, omega_f)?] })
    }

    pub fn pre_response(&self, omega: f64) -> Result<Complex64> {
        self.pre.iter().try_fold(Complex64::new(1.0, 0.0), |acc, b| Ok(acc * b.freq_response(omega)?))
    }

    pub fn post_response(&self, omega: f64) -> Result<Complex64> {
        self.post.iter().try_fold(Complex64::new(1.0, 0.0), |acc, b| Ok(acc * b.freq_response(omega)?))
    }

    /// Response of the whole path with resets disabled.
    pub fn base_response(&self, omega: f64) -> Result<Complex64> {
        Ok(self.pre_response(omega)? * self.element.base_response(omega)? * self.post_response(omega)?)
    }

    /// Fastest pole or zero among the element and its filters.
    pub fn max_corner(&self) -> Result<f64> {
        let mut m: f64 = 0.0;
        for b in self.pre.iter().chain(&self.post) {
            m = b.corner_frequencies()?.into_iter().fold(m, f64::max);
        }
        Ok(self.element.corner_frequencies()?.into_iter().fold(m, f64::max))
    }
}

/// Reset element between a lead pre-filter `(s/ω_l + 1)/(s/ω_h + 1)` and the
/// lag post-filter `1/(s/ω_l + 1)`; an optional shaping filter sits between the
/// element and the post-filter.
#[derive(Debug, Clone)]
pub struct CrElement {
    pub omega_l: f64,
    pub omega_h: f64,
    pub element: ResetElement,
    pub shaping: Option<TransferFunction>,
}

impl CrElement {
    pub fn new(element: ResetElement, omega_l: f64, omega_h: f64) -> Result<Self> {
        if !(omega_l > 0.0 && omega_h > omega_l) {
            return Err(Error::InvalidParameter(format!("need 0 < ω_l < ω_h, got ω_l = {omega_l}, ω_h = {omega_h}")));
        }
        Ok(Self { omega_l, omega_h, element, shaping: None })
    }

    pub fn with_shaping(mut self, shaping: TransferFunction) -> Self {
        self.shaping = Some(shaping);
        self
    }

    pub fn path(&self) -> Result<ResetPath> {
        let mut post = Vec::new();
        if let Some(d) = &self.shaping {
            post.push(d.clone());
        }
        post.push(cr_postfilter(self.omega_l)?);
        Ok(ResetPath { pre: vec![cr_prefilter(self.omega_l, self.omega_h)?], element: self.element.clone(), post })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reset_matrix_bounds_checked() {
        let base = ResetElement::fore(10.0, 0.0).unwrap().base().clone();
        assert!(ResetElement::uniform(base.clone(), 1.5).is_err());
        assert!(ResetElement::uniform(base, -1.0).is_ok());
    }

    #[test]
    fn cr_path_dc_gain_matches_element() {
        let cr = CrElement::new(ResetElement::fore(100.0, 0.0).unwrap(), 10.0, 1e4).unwrap();
        let p = cr.path().unwrap();
        let w = 1e-6;
        let ratio = p.base_response(w).unwrap() / cr.element.base_response(w).unwrap();
        assert!((ratio - 1.0).norm() < 1e-6);
    }

    #[test]
    fn cr_requires_ordered_corners() {
        assert!(CrElement::new(ResetElement::clegg(), 100.0, 10.0).is_err());
    }
}
