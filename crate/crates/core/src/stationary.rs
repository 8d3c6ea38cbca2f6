//! The explicit stationary law of the reflected catalyst diffusion.
//!
//! For subcritical drift (`c1 < 0`) the reflected catalyst diffusion has the
//! unique stationary density
//!
//! ```text
//! p(x) = (theta / x) exp(2 c1 x / alpha1)   for x >= 1,  0 below,
//! theta = ( int_1^inf exp(2 c1 x / alpha1) / x dx )^-1
//! ```
//!
//! with stationary mean `m_X = -(alpha1 theta / 2 c1) exp(2 c1 / alpha1)`.
//! This module computes `theta` and `m_X` by adaptive quadrature, exposes
//! density/CDF/quantile, draws exact samples by rejection, and evaluates the
//! generator-orthogonality (Echeverria-type) residual
//!
//! ```text
//! r(phi) = int_1^R [c1 l1 x phi' + (alpha1 l1 / 2) x phi''] p dx
//!          + (p(1)/2) alpha1 l1 phi'(1)
//! ```
//!
//! which vanishes for every compactly supported C^1, piecewise-C^2 test
//! function exactly when the boundary constant is `p(1)/2`.

use crate::poly::Polynomial;
use crate::quad::adaptive_gk;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StationaryError {
    #[error("stationary law needs c1 < 0, got {0}")]
    BadDrift(f64),
    #[error("stationary law needs alpha1 > 0, got {0}")]
    BadSpread(f64),
    #[error("quantile argument must lie in [0, 1], got {0}")]
    BadQuantileArg(f64),
    #[error("test function invalid: {0}")]
    BadTestFunction(String),
}

/// Number of cached CDF panels between 1 and the tail cutoff.
const CDF_PANELS: usize = 1024;

/// Relative tolerance for the normalization quadrature.
const THETA_REL_TOL: f64 = 1e-13;

/// The law `nu_1`: density `p(x) = (theta/x) e^{2 c1 x / alpha1}` on
/// `[1, inf)`.
///
/// Immutable after construction; the CDF table is built eagerly.
#[derive(Debug, Clone)]
pub struct StationaryLaw {
    c1: f64,
    alpha1: f64,
    /// Decay rate `beta = -2 c1 / alpha1 > 0`.
    beta: f64,
    theta: f64,
    /// Quadrature error bound carried by `theta`, including the analytic
    /// tail bound beyond `x_max`.
    theta_error: f64,
    /// Tail cutoff: mass beyond this point is below 1e-18 relative.
    x_max: f64,
    /// Cumulative unnormalized integrals at panel edges.
    cdf_knots: Vec<f64>,
    cdf_cumulative: Vec<f64>,
}

impl StationaryLaw {
    pub fn new(c1: f64, alpha1: f64) -> Result<Self, StationaryError> {
        if !(c1 < 0.0) || !c1.is_finite() {
            return Err(StationaryError::BadDrift(c1));
        }
        if !(alpha1 > 0.0) || !alpha1.is_finite() {
            return Err(StationaryError::BadSpread(alpha1));
        }
        let beta = -2.0 * c1 / alpha1;
        // e^{-beta (x_max - 1)} ~ 1e-20 relative to the mass near 1.
        let x_max = 1.0 + 46.2 / beta;
        let kernel = move |x: f64| (-beta * x).exp() / x;

        // Cumulative table: panel-wise Gauss-Kronrod over a uniform grid.
        let mut cdf_knots = Vec::with_capacity(CDF_PANELS + 1);
        let mut cdf_cumulative = Vec::with_capacity(CDF_PANELS + 1);
        let width = (x_max - 1.0) / CDF_PANELS as f64;
        let mut acc = 0.0;
        cdf_knots.push(1.0);
        cdf_cumulative.push(0.0);
        let mut err_acc = 0.0;
        for i in 0..CDF_PANELS {
            let lo = 1.0 + i as f64 * width;
            let hi = if i == CDF_PANELS - 1 {
                x_max
            } else {
                lo + width
            };
            let r = adaptive_gk(kernel, lo, hi, THETA_REL_TOL, 0.0);
            acc += r.value;
            err_acc += r.error;
            cdf_knots.push(hi);
            cdf_cumulative.push(acc);
        }
        // Analytic tail bound: int_x^inf e^{-bt}/t dt <= e^{-bx}/(bx),
        // and >= e^{-bx}/(bx) (1 - 1/(bx)). Use the midpoint, count the
        // half-width as error.
        let bx = beta * x_max;
        let tail_hi = (-bx).exp() / bx;
        let tail_lo = tail_hi * (1.0 - 1.0 / bx);
        let total = acc + 0.5 * (tail_hi + tail_lo);
        let theta = 1.0 / total;
        let theta_error = theta * (err_acc + 0.5 * (tail_hi - tail_lo)) / total;
        Ok(Self {
            c1,
            alpha1,
            beta,
            theta,
            theta_error,
            x_max,
            cdf_knots,
            cdf_cumulative,
        })
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    /// Normalization constant.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Error bound carried by the computed `theta`.
    pub fn theta_error(&self) -> f64 {
        self.theta_error
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < 1.0 {
            0.0
        } else {
            self.theta / x * (-self.beta * x).exp()
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x < 1.0 {
            return 0.0;
        }
        if x >= self.x_max {
            // Beyond the cutoff the remaining mass is ~1e-20.
            return 1.0_f64.min(1.0 - self.theta * self.upper_tail(x));
        }
        let i = match self
            .cdf_knots
            .binary_search_by(|k| k.total_cmp(&x))
        {
            Ok(i) => return (self.theta * self.cdf_cumulative[i]).min(1.0),
            Err(i) => i - 1, // knots[i] <= x < knots[i+1]
        };
        let beta = self.beta;
        let partial = adaptive_gk(
            move |t| (-beta * t).exp() / t,
            self.cdf_knots[i],
            x,
            1e-12,
            1e-300,
        );
        ((self.cdf_cumulative[i] + partial.value) * self.theta).min(1.0)
    }

    /// Asymptotic upper tail of the unnormalized integral for large x.
    fn upper_tail(&self, x: f64) -> f64 {
        let bx = self.beta * x;
        (-bx).exp() / bx * (1.0 - 1.0 / bx + 2.0 / (bx * bx))
    }

    /// Inverse CDF by monotone bisection on `[1, x_max]`.
    pub fn quantile(&self, p: f64) -> Result<f64, StationaryError> {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(StationaryError::BadQuantileArg(p));
        }
        if p == 0.0 {
            return Ok(1.0);
        }
        let mut lo = 1.0;
        let mut hi = self.x_max;
        if p >= self.cdf(hi) {
            return Ok(hi);
        }
        // Narrow the bracket with the cached table first.
        let target = p / self.theta;
        let idx = self
            .cdf_cumulative
            .partition_point(|&c| c < target)
            .min(self.cdf_knots.len() - 1);
        if idx > 0 {
            lo = self.cdf_knots[idx - 1];
            hi = self.cdf_knots[idx];
        }
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Stationary mean, closed form.
    pub fn mean(&self) -> f64 {
        -(self.alpha1 * self.theta) / (2.0 * self.c1) * (2.0 * self.c1 / self.alpha1).exp()
    }

    /// Stationary mean by direct quadrature of `x p(x)`; cross-check route
    /// for the closed form.
    pub fn mean_by_quadrature(&self) -> f64 {
        let main = adaptive_gk(|x| x * self.pdf(x), 1.0, self.x_max, 1e-12, 0.0);
        // int_{x_max}^inf x p(x) dx = theta e^{-beta x_max} / beta, exactly.
        let tail = self.theta * (-self.beta * self.x_max).exp() / self.beta;
        main.value + tail
    }

    /// Exact draw by rejection: propose `1 + Exp(beta)`, accept with
    /// probability `1/x`. The envelope `theta e^{-beta x}` dominates the
    /// density and is tight at the boundary.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let u: f64 = rng.random();
            let x = 1.0 - (1.0 - u).ln() / self.beta;
            let v: f64 = rng.random();
            if v * x <= 1.0 {
                return x;
            }
        }
    }
}

/// Normalization constant `theta(c1, alpha1)`.
pub fn theta(c1: f64, alpha1: f64) -> Result<f64, StationaryError> {
    Ok(StationaryLaw::new(c1, alpha1)?.theta())
}

/// Stationary mean `m_X(c1, alpha1)`, closed form.
pub fn mean_m_x(c1: f64, alpha1: f64) -> Result<f64, StationaryError> {
    Ok(StationaryLaw::new(c1, alpha1)?.mean())
}

/// Compactly supported piecewise-polynomial test function on `[1, R]`.
///
/// Continuous with continuous first derivative, identically zero past its
/// last knot; the zero extension beyond the support stays C^1 because the
/// value and slope vanish there.
#[derive(Debug, Clone)]
pub struct TestFunction {
    /// Descriptive name used in reports.
    pub name: String,
    /// `(lo, hi, poly)` pieces, contiguous and increasing.
    pieces: Vec<(f64, f64, Polynomial)>,
}

impl TestFunction {
    pub fn new(name: &str, pieces: Vec<(f64, f64, Polynomial)>) -> Result<Self, StationaryError> {
        let bad = |msg: String| Err(StationaryError::BadTestFunction(msg));
        if pieces.is_empty() {
            return bad("no pieces".into());
        }
        if pieces[0].0 < 1.0 {
            return bad(format!("support must start at or after 1, got {}", pieces[0].0));
        }
        for w in pieces.windows(2) {
            if w[0].1 != w[1].0 {
                return bad(format!("pieces not contiguous at {}", w[0].1));
            }
        }
        let last = pieces.last().unwrap();
        if !last.1.is_finite() {
            return bad("support must be bounded".into());
        }
        let tol = 1e-9;
        // C^1 junctions between pieces.
        for w in pieces.windows(2) {
            let x = w[0].1;
            let (v0, d0) = (w[0].2.eval(x), w[0].2.derivative().eval(x));
            let (v1, d1) = (w[1].2.eval(x), w[1].2.derivative().eval(x));
            if (v0 - v1).abs() > tol * (1.0 + v0.abs()) || (d0 - d1).abs() > tol * (1.0 + d0.abs())
            {
                return bad(format!("junction at {x} is not C^1"));
            }
        }
        // C^1 against the zero extension at the right end (and at the left
        // end when the support starts after 1).
        let (vr, dr) = (last.2.eval(last.1), last.2.derivative().eval(last.1));
        if vr.abs() > tol || dr.abs() > tol {
            return bad(format!(
                "zero extension at support end {} is not C^1 (value {vr}, slope {dr})",
                last.1
            ));
        }
        if pieces[0].0 > 1.0 {
            let (vl, dl) = (
                pieces[0].2.eval(pieces[0].0),
                pieces[0].2.derivative().eval(pieces[0].0),
            );
            if vl.abs() > tol || dl.abs() > tol {
                return bad(format!("zero extension at support start {} is not C^1", pieces[0].0));
            }
        }
        Ok(Self {
            name: name.to_string(),
            pieces,
        })
    }

    /// Single-polynomial test function on `[1, hi]`.
    pub fn single(name: &str, hi: f64, poly: Polynomial) -> Result<Self, StationaryError> {
        Self::new(name, vec![(1.0, hi, poly)])
    }

    pub fn support_end(&self) -> f64 {
        self.pieces.last().unwrap().1
    }

    /// Knot positions, including both support endpoints.
    pub fn knots(&self) -> Vec<f64> {
        let mut k: Vec<f64> = self.pieces.iter().map(|p| p.0).collect();
        k.push(self.support_end());
        k
    }

    fn piece_at(&self, x: f64) -> Option<&(f64, f64, Polynomial)> {
        self.pieces
            .iter()
            .find(|(lo, hi, _)| x >= *lo && x <= *hi)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.piece_at(x).map_or(0.0, |(_, _, p)| p.eval(x))
    }

    pub fn d1(&self, x: f64) -> f64 {
        self.piece_at(x)
            .map_or(0.0, |(_, _, p)| p.derivative().eval(x))
    }

    pub fn d2(&self, x: f64) -> f64 {
        self.piece_at(x)
            .map_or(0.0, |(_, _, p)| p.derivative().derivative().eval(x))
    }
}

/// Generator-orthogonality residual with the boundary constant `p(1)/2`.
pub fn echeverria_residual(law: &StationaryLaw, phi: &TestFunction, lambda1: f64) -> f64 {
    echeverria_residual_with_constant(law, phi, lambda1, law.pdf(1.0) / 2.0)
}

/// Residual with an explicit boundary constant `C`; the stationarity
/// identity holds exactly for `C = p(1)/2`, so perturbing `C` must produce a
/// visible residual whenever `phi'(1) != 0`.
pub fn echeverria_residual_with_constant(
    law: &StationaryLaw,
    phi: &TestFunction,
    lambda1: f64,
    boundary_constant: f64,
) -> f64 {
    let c1 = law.c1;
    let a1 = law.alpha1;
    let mut integral = 0.0;
    // Quadrature split at the polynomial knots keeps the integrand smooth
    // on each subinterval.
    for (lo, hi, poly) in &phi.pieces {
        let d1 = poly.derivative();
        let d2 = d1.derivative();
        let r = adaptive_gk(
            |x| (c1 * lambda1 * x * d1.eval(x) + 0.5 * a1 * lambda1 * x * d2.eval(x)) * law.pdf(x),
            *lo,
            (*hi).min(law.x_max),
            1e-12,
            1e-300,
        );
        integral += r.value;
    }
    integral + boundary_constant * a1 * lambda1 * phi.d1(1.0)
}

/// Fixed library of ten piecewise-polynomial test functions, mixing
/// boundary-flat cases (`phi'(1) = 0`) and boundary-active ones
/// (`phi'(1) != 0`), single-piece and multi-piece splines, and a range of
/// support widths.
pub fn test_function_library() -> Vec<TestFunction> {
    use crate::poly::hermite_cubic;
    let x = Polynomial::x_plus(0.0);
    let lin = |r: f64| Polynomial::x_plus(-r);
    let mut lib = Vec::new();

    // phi'(1) = 0 cases.
    lib.push(
        TestFunction::single("(x-1)^2 (x-4)^2 on [1..4]", 4.0, lin(1.0).powi(2).mul(&lin(4.0).powi(2)))
            .unwrap(),
    );
    lib.push(
        TestFunction::single(
            "(x-1)^2 (x-6)^3 on [1..6]",
            6.0,
            lin(1.0).powi(2).mul(&lin(6.0).powi(3)),
        )
        .unwrap(),
    );
    // Smoothstep bump rising on [1..2], falling on [2,4]; C^1 at the knot.
    let up = {
        // 3u^2 - 2u^3 with u = x - 1
        let u = lin(1.0);
        u.powi(2).scale(3.0).add(&u.powi(3).scale(-2.0))
    };
    let down = {
        // 3v^2 - 2v^3 with v = (4 - x)/2
        let v = lin(4.0).scale(-0.5);
        v.powi(2).scale(3.0).add(&v.powi(3).scale(-2.0))
    };
    lib.push(TestFunction::new("smoothstep bump on [1..2..4]", vec![(1.0, 2.0, up), (2.0, 4.0, down)]).unwrap());

    // phi'(1) != 0 cases.
    lib.push(TestFunction::single("(x-4)^4 on [1..4]", 4.0, lin(4.0).powi(4)).unwrap());
    lib.push(TestFunction::single("(x-3)^2 on [1..3]", 3.0, lin(3.0).powi(2)).unwrap());
    lib.push(
        TestFunction::single("(x-1)(x-3)^2 on [1..3]", 3.0, lin(1.0).mul(&lin(3.0).powi(2)))
            .unwrap(),
    );
    lib.push(
        TestFunction::single(
            "(x-2)^2 (x-5)^2 on [1..5]",
            5.0,
            lin(2.0).powi(2).mul(&lin(5.0).powi(2)),
        )
        .unwrap(),
    );
    lib.push(
        TestFunction::single(
            "0.3 (x-1)(x-4)^3 on [1..4]",
            4.0,
            lin(1.0).mul(&lin(4.0).powi(3)).scale(0.3),
        )
        .unwrap(),
    );
    lib.push(
        TestFunction::single(
            "(2x+1)(x-5)^4 / 256 on [1..5]",
            5.0,
            x.scale(2.0)
                .add(&Polynomial::constant(1.0))
                .mul(&lin(5.0).powi(4))
                .scale(1.0 / 256.0),
        )
        .unwrap(),
    );
    // Two Hermite cubics: value 1, slope -1 at the boundary, C^1 handoff at
    // x = 2, flat zero at x = 3.
    lib.push(
        TestFunction::new(
            "hermite spline on [1..2..3]",
            vec![
                (1.0, 2.0, hermite_cubic(1.0, 2.0, 1.0, -1.0, 0.5, -0.5)),
                (2.0, 3.0, hermite_cubic(2.0, 3.0, 0.5, -0.5, 0.0, 0.0)),
            ],
        )
        .unwrap(),
    );
    lib
}
