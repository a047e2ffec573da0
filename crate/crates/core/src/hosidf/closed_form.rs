use std::io::Write;

use crate::error::{Error, Result};
use crate::numerics::{db, mat_exp, solve_complex, solve_real, to_complex, wrap_deg, Complex64, MatrixC, MatrixR, J};
use crate::reset::{ResetElement, ResetPath};

fn at_omega(omega: f64) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Singular { pivot } => Error::SingularAt { omega, pivot },
        other => other,
    }
}

/// Matrix `Θ(ω)` that carries the reset action into every harmonic.
pub fn describing_matrix(element: &ResetElement, omega: f64) -> Result<MatrixR> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::InvalidParameter(format!("frequency must be positive, got {omega}")));
    }
    let a = &element.base().a;
    let rho = element.reset_matrix();
    let n = a.nrows();
    let id = MatrixR::identity(n, n);
    let half_period = mat_exp(a, std::f64::consts::PI / omega)?;
    let lambda = &id * (omega * omega) + a * a;
    let delta = &id + &half_period;
    let delta_rho = &id + rho * &half_period;
    let lambda_inv = solve_real(&lambda, &id).map_err(at_omega(omega))?;
    let gamma = solve_real(&delta_rho, &(rho * &delta * &lambda_inv)).map_err(at_omega(omega))?;
    Ok(&delta * (gamma - lambda_inv) * (-2.0 * omega * omega / std::f64::consts::PI))
}

fn resolvent_times(element: &ResetElement, s: Complex64, rhs: &MatrixC) -> Result<Complex64> {
    let base = element.base();
    let n = base.order();
    let m = MatrixC::identity(n, n) * s - to_complex(&base.a);
    let x = solve_complex(&m, rhs)?;
    Ok((to_complex(&base.c) * x)[(0, 0)])
}

/// `n`-th harmonic describing function of a reset element at `omega`
/// (sine-referenced: output harmonic phasor over input phasor).
pub fn hosidf(element: &ResetElement, omega: f64, n: usize) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::InvalidParameter("harmonic index starts at 1".into()));
    }
    if n.is_multiple_of(2) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let theta = to_complex(&describing_matrix(element, omega)?);
    let b = to_complex(&element.base().b);
    let dim = element.order();
    let s = J * (n as f64 * omega);
    let value = if n == 1 {
        let rhs = (MatrixC::identity(dim, dim) + theta * J) * b;
        resolvent_times(element, s, &rhs).map_err(at_omega(omega))? + element.base().d[(0, 0)]
    } else {
        let rhs = theta * J * b;
        resolvent_times(element, s, &rhs).map_err(at_omega(omega))?
    };
    Ok(value)
}

/// Harmonic of a filtered reset path. A sinusoid through the pre-filters reaches
/// the element with phase `ψ`, so its `n`-th harmonic is shifted by `n ψ`.
pub fn path_hosidf(path: &ResetPath, omega: f64, n: usize) -> Result<Complex64> {
    let h = hosidf(&path.element, omega, n)?;
    let pre = path.pre_response(omega)?;
    let post = path.post_response(n as f64 * omega)?;
    Ok(Complex64::from_polar(pre.norm(), n as f64 * pre.arg()) * h * post)
}

/// Phase lead of the first harmonic over the path with resets disabled, in degrees.
pub fn phase_advantage(path: &ResetPath, omega: f64) -> Result<f64> {
    let h1 = path_hosidf(path, omega, 1)?;
    let base = path.base_response(omega)?;
    Ok(wrap_deg((h1.arg() - base.arg()).to_degrees()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HosidfRow {
    pub omega: f64,
    pub n: usize,
    pub value: Complex64,
}

/// Harmonics on a frequency grid. Frequencies where the element is singular
/// are left out and listed in `gaps`.
#[derive(Debug, Clone, Default)]
pub struct HosidfTable {
    pub rows: Vec<HosidfRow>,
    pub gaps: Vec<f64>,
}

impl HosidfTable {
    pub fn get(&self, omega: f64, n: usize) -> Option<Complex64> {
        self.rows.iter().find(|r| r.n == n && r.omega == omega).map(|r| r.value)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["omega", "n", "mag_db", "phase_deg"])?;
        for r in &self.rows {
            let mag = r.value.norm();
            let mag_db = if mag > 0.0 { format!("{:.9}", db(mag)) } else { "-inf".to_string() };
            w.write_record([format!("{:.9e}", r.omega), r.n.to_string(), mag_db, format!("{:.9}", r.value.arg().to_degrees())])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn hosidf_table(path: &ResetPath, omegas: &[f64], n_max: usize) -> Result<HosidfTable> {
    let mut table = HosidfTable::default();
    'freq: for &omega in omegas {
        let mut row = Vec::with_capacity(n_max);
        for n in 1..=n_max {
            match path_hosidf(path, omega, n) {
                Ok(value) => row.push(HosidfRow { omega, n, value }),
                Err(Error::SingularAt { .. }) | Err(Error::Pole { .. }) => {
                    table.gaps.push(omega);
                    continue 'freq;
                }
                Err(e) => return Err(e),
            }
        }
        table.rows.extend(row);
    }
    Ok(table)
}
