use std::f64::consts::PI;

use crate::error::Result;

/// Chebyshev interpolant on `[lo, hi]` through first-kind nodes.
#[derive(Debug, Clone)]
pub(crate) struct ChebPiece {
    pub lo: f64,
    pub hi: f64,
    coeffs: Vec<f64>,
}

impl ChebPiece {
    pub fn fit<F: FnMut(f64) -> Result<f64>>(mut f: F, lo: f64, hi: f64, n: usize) -> Result<Self> {
        let mut vals = Vec::with_capacity(n);
        for k in 0..n {
            let t = (PI * (k as f64 + 0.5) / n as f64).cos();
            vals.push(f(lo + 0.5 * (hi - lo) * (t + 1.0))?);
        }
        let mut coeffs: Vec<f64> = (0..n)
            .map(|j| {
                let s: f64 =
                    vals.iter().enumerate().map(|(k, v)| v * (PI * j as f64 * (k as f64 + 0.5) / n as f64).cos()).sum();
                2.0 * s / n as f64
            })
            .collect();
        coeffs[0] *= 0.5;
        Ok(ChebPiece { lo, hi, coeffs })
    }

    /// Clenshaw recurrence; `x` is assumed to lie in the piece.
    pub fn eval(&self, x: f64) -> f64 {
        let t = (2.0 * x - self.lo - self.hi) / (self.hi - self.lo);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs[1..].iter().rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + self.coeffs[0]
    }
}
