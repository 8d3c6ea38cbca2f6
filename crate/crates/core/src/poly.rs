//! Dense univariate polynomials in the monomial basis.
//!
//! Small utility used to build piecewise-polynomial test functions with
//! exact derivatives.

/// Coefficients in ascending degree order: `c[0] + c[1] x + c[2] x^2 + ...`
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![] }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// The linear factor `x + shift`.
    pub fn x_plus(shift: f64) -> Self {
        Self::new(vec![shift, 1.0])
    }

    fn trim(&mut self) {
        while matches!(self.coeffs.last(), Some(&c) if c == 0.0) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| k as f64 * c)
            .collect();
        Self::new(coeffs)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0.0; n];
        for (i, &c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, &c) in other.coeffs.iter().enumerate() {
            out[i] += c;
        }
        Self::new(out)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut out = Self::constant(1.0);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }
}

/// Cubic matching values `f0, f1` and derivatives `d0, d1` at `x0, x1`,
/// returned in the global monomial basis.
pub fn hermite_cubic(x0: f64, x1: f64, f0: f64, d0: f64, f1: f64, d1: f64) -> Polynomial {
    let len = x1 - x0;
    assert!(len > 0.0, "hermite_cubic needs x1 > x0");
    // Coefficients in t = x - x0.
    let a = f0;
    let b = d0;
    let c = 3.0 * (f1 - f0) / (len * len) - (2.0 * d0 + d1) / len;
    let d = 2.0 * (f0 - f1) / (len * len * len) + (d0 + d1) / (len * len);
    let t = Polynomial::x_plus(-x0);
    Polynomial::constant(a)
        .add(&t.scale(b))
        .add(&t.powi(2).scale(c))
        .add(&t.powi(3).scale(d))
}
