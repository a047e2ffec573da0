use super::{solve_real, MatrixR};
use crate::error::{Error, Result};

// Padé(13) coefficients and the 1-norm bound below which no scaling is needed.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn norm1(m: &MatrixR) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Matrix exponential `exp(a * t)` by scaling and squaring around a Padé(13) approximant.
pub fn mat_exp(a: &MatrixR, t: f64) -> Result<MatrixR> {
    if !a.is_square() {
        return Err(Error::Shape(format!("mat_exp needs a square matrix, got {}x{}", a.nrows(), a.ncols())));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(MatrixR::zeros(0, 0));
    }
    if !t.is_finite() || a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("mat_exp argument is not finite".into()));
    }
    let at = a * t;
    let nrm = norm1(&at);
    let squarings = if nrm > THETA13 { (nrm / THETA13).log2().ceil() as i32 } else { 0 };
    let scaled = at / 2f64.powi(squarings);

    let id = MatrixR::identity(n, n);
    let a2 = &scaled * &scaled;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let b = &PADE13;
    let inner_u = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]) + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &id * b[1];
    let u = &scaled * inner_u;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]) + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &id * b[0];

    let mut r = solve_real(&(&v - &u), &(&v + &u))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}
