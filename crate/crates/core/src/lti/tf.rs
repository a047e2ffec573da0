use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::{poly_roots, Complex64, J};

/// Rational transfer function with an optional input delay.
///
/// Coefficients are stored in ascending powers of `s`, scaled so the lowest
/// nonzero denominator coefficient is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction {
    num: Vec<f64>,
    den: Vec<f64>,
    delay: f64,
}

fn trim(mut c: Vec<f64>) -> Vec<f64> {
    while c.len() > 1 && c.last() == Some(&0.0) {
        c.pop();
    }
    c
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn horner(c: &[f64], s: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &v| acc * s + v)
}

impl TransferFunction {
    pub fn new(num: Vec<f64>, den: Vec<f64>) -> Result<Self> {
        if num.iter().chain(&den).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("transfer function coefficients must be finite".into()));
        }
        let num = trim(if num.is_empty() { vec![0.0] } else { num });
        let den = trim(den);
        let Some(&low) = den.iter().find(|&&v| v != 0.0) else {
            return Err(Error::InvalidParameter("denominator is identically zero".into()));
        };
        if num.len() > den.len() {
            return Err(Error::InvalidParameter(format!(
                "improper transfer function: numerator degree {} exceeds denominator degree {}",
                num.len() - 1,
                den.len() - 1
            )));
        }
        Ok(Self { num: num.iter().map(|v| v / low).collect(), den: den.iter().map(|v| v / low).collect(), delay: 0.0 })
    }

    pub fn with_delay(mut self, delay: f64) -> Result<Self> {
        if !(delay >= 0.0) || !delay.is_finite() {
            return Err(Error::InvalidParameter(format!("delay must be a finite non-negative number, got {delay}")));
        }
        self.delay = delay;
        Ok(self)
    }

    pub fn gain(k: f64) -> Self {
        Self { num: vec![k], den: vec![1.0], delay: 0.0 }
    }

    pub fn num(&self) -> &[f64] {
        &self.num
    }

    pub fn den(&self) -> &[f64] {
        &self.den
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    pub fn order(&self) -> usize {
        self.den.len() - 1
    }

    pub fn relative_degree(&self) -> usize {
        self.den.len() - self.num.len()
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.relative_degree() > 0
    }

    /// Rational part evaluated at an arbitrary complex point (delay excluded).
    pub fn eval(&self, s: Complex64) -> Complex64 {
        horner(&self.num, s) / horner(&self.den, s)
    }

    /// `G(jω)` including the delay term.
    pub fn freq_response(&self, omega: f64) -> Result<Complex64> {
        let s = J * omega;
        let d = horner(&self.den, s);
        let size: f64 = self.den.iter().enumerate().map(|(i, c)| c.abs() * omega.abs().powi(i as i32)).sum();
        if d.norm() <= 1e-14 * size {
            return Err(Error::Pole { re: 0.0, im: omega });
        }
        let delay = Complex64::from_polar(1.0, -omega * self.delay);
        Ok(horner(&self.num, s) / d * delay)
    }

    pub fn series(&self, other: &TransferFunction) -> TransferFunction {
        let num = trim(poly_mul(&self.num, &other.num));
        let den = trim(poly_mul(&self.den, &other.den));
        Self { num, den, delay: self.delay + other.delay }
    }

    pub fn scaled(&self, k: f64) -> TransferFunction {
        Self { num: self.num.iter().map(|v| v * k).collect(), ..self.clone() }
    }

    /// Series product of a list of blocks; the empty product is unity.
    pub fn product<'a>(blocks: impl IntoIterator<Item = &'a TransferFunction>) -> TransferFunction {
        blocks.into_iter().fold(TransferFunction::gain(1.0), |acc, b| acc.series(b))
    }

    /// Net number of integrators (poles at the origin minus zeros at the origin).
    pub fn origin_poles(&self) -> i32 {
        let lead = |c: &[f64]| c.iter().take_while(|&&v| v == 0.0).count() as i32;
        lead(&self.den) - lead(&self.num)
    }

    pub fn poles(&self) -> Result<Vec<Complex64>> {
        poly_roots(&self.den)
    }

    pub fn zeros(&self) -> Result<Vec<Complex64>> {
        if self.num.iter().all(|&v| v == 0.0) {
            return Ok(Vec::new());
        }
        poly_roots(&self.num)
    }

    /// Magnitudes of the nonzero poles and zeros.
    pub fn corner_frequencies(&self) -> Result<Vec<f64>> {
        let mut out: Vec<f64> = self.poles()?.into_iter().chain(self.zeros()?).map(|z| z.norm()).filter(|&m| m > 0.0).collect();
        out.sort_by(f64::total_cmp);
        Ok(out)
    }
}

impl Mul for &TransferFunction {
    type Output = TransferFunction;

    fn mul(self, rhs: &TransferFunction) -> TransferFunction {
        self.series(rhs)
    }
}

impl fmt::Display for TransferFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |c: &[f64]| c.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(", ");
        write!(f, "num = [{}]; den = [{}]; delay = {:e}", list(&self.num), list(&self.den), self.delay)
    }
}

impl FromStr for TransferFunction {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut num = None;
        let mut den = None;
        let mut delay = 0.0;
        for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected `key = value` in transfer function text, got `{part}`")))?;
            let value = value.trim();
            let parse_list = |v: &str| -> Result<Vec<f64>> {
                let inner = v
                    .strip_prefix('[')
                    .and_then(|v| v.strip_suffix(']'))
                    .ok_or_else(|| Error::Config(format!("coefficient list must be bracketed, got `{v}`")))?;
                inner
                    .split(',')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(|t| t.parse::<f64>().map_err(|e| Error::Config(format!("bad coefficient `{t}`: {e}"))))
                    .collect()
            };
            match key.trim() {
                "num" => num = Some(parse_list(value)?),
                "den" => den = Some(parse_list(value)?),
                "delay" => delay = value.parse().map_err(|e| Error::Config(format!("bad delay `{value}`: {e}")))?,
                other => return Err(Error::Config(format!("unknown transfer function field `{other}`"))),
            }
        }
        let num = num.ok_or_else(|| Error::Config("transfer function text lacks `num`".into()))?;
        let den = den.ok_or_else(|| Error::Config("transfer function text lacks `den`".into()))?;
        TransferFunction::new(num, den)?.with_delay(delay)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalizes_constant_term() {
        let g = TransferFunction::new(vec![2.0], vec![4.0, 2.0]).unwrap();
        assert_eq!(g.num(), &[0.5]);
        assert_eq!(g.den(), &[1.0, 0.5]);
    }

    #[test]
    fn pole_on_axis_is_an_error() {
        let g = TransferFunction::new(vec![1.0], vec![4.0, 0.0, 1.0]).unwrap();
        assert!(matches!(g.freq_response(2.0), Err(Error::Pole { .. })));
        assert!(g.freq_response(1.0).is_ok());
    }

    #[test]
    fn improper_rejected() {
        assert!(TransferFunction::new(vec![1.0, 1.0], vec![1.0]).is_err());
    }

    #[test]
    fn delay_rotates_phase() {
        let g = TransferFunction::gain(1.0).with_delay(1e-3).unwrap();
        let h = g.freq_response(100.0).unwrap();
        assert!((h.arg() + 0.1).abs() < 1e-14);
    }

    #[test]
    fn origin_pole_count() {
        let g = TransferFunction::new(vec![1.0], vec![0.0, 0.0, 1.0]).unwrap();
        assert_eq!(g.origin_poles(), 2);
    }

    #[test]
    fn text_round_trip() {
        let g = TransferFunction::new(vec![9836.0], vec![7376.0, 8.737, 1.0]).unwrap().with_delay(1e-4).unwrap();
        let back: TransferFunction = g.to_string().parse().unwrap();
        assert_eq!(g, back);
    }

    proptest! {
        #[test]
        fn series_multiplies_responses(
            n1 in proptest::collection::vec(0.1f64..5.0, 1..3),
            d1 in proptest::collection::vec(0.1f64..5.0, 3..4),
            n2 in proptest::collection::vec(0.1f64..5.0, 1..2),
            d2 in proptest::collection::vec(0.1f64..5.0, 2..3),
            w in 0.01f64..100.0,
        ) {
            let a = TransferFunction::new(n1, d1).unwrap();
            let b = TransferFunction::new(n2, d2).unwrap().with_delay(0.01).unwrap();
            let ab = &a * &b;
            let lhs = ab.freq_response(w).unwrap();
            let rhs = a.freq_response(w).unwrap() * b.freq_response(w).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-9 * rhs.norm().max(1e-300));
        }
    }
}
