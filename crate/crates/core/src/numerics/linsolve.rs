use nalgebra::{ComplexField, DMatrix};

use super::{MatrixC, MatrixR};
use crate::error::{Error, Result};

/// Pivots smaller than this fraction of the largest matrix entry count as singular.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// Solves `a * x = b` by Gaussian elimination with partial pivoting.
pub fn solve<T>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<DMatrix<T>>
where
    T: ComplexField<RealField = f64> + Copy,
{
    let n = a.nrows();
    if !a.is_square() || b.nrows() != n {
        return Err(Error::Shape(format!(
            "solve needs square A and matching B, got {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    if n == 0 {
        return Ok(b.clone());
    }
    let mut m = a.clone();
    let mut x = b.clone();
    let scale = m.iter().map(|v| v.modulus()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::Singular { pivot: 0.0 });
    }

    for k in 0..n {
        let (p, pivot) = (k..n)
            .map(|r| (r, m[(r, k)].modulus()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot <= PIVOT_TOLERANCE * scale {
            return Err(Error::Singular { pivot });
        }
        if p != k {
            m.swap_rows(p, k);
            x.swap_rows(p, k);
        }
        let diag = m[(k, k)];
        for r in k + 1..n {
            let factor = m[(r, k)] / diag;
            if factor.modulus() == 0.0 {
                continue;
            }
            for c in k..n {
                let v = m[(k, c)];
                m[(r, c)] -= factor * v;
            }
            for c in 0..x.ncols() {
                let v = x[(k, c)];
                x[(r, c)] -= factor * v;
            }
        }
    }

    for c in 0..x.ncols() {
        for k in (0..n).rev() {
            let mut acc = x[(k, c)];
            for j in k + 1..n {
                acc -= m[(k, j)] * x[(j, c)];
            }
            x[(k, c)] = acc / m[(k, k)];
        }
    }
    Ok(x)
}

pub fn solve_real(a: &MatrixR, b: &MatrixR) -> Result<MatrixR> {
    solve(a, b)
}

pub fn solve_complex(a: &MatrixC, b: &MatrixC) -> Result<MatrixC> {
    solve(a, b)
}
