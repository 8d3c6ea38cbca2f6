//! Euler-Maruyama integration of the reflected catalyst-reactant system
//! and of the averaged one-dimensional reactant equation.
//!
//! Per step, with independent standard normals `xi`, `zeta`:
//!
//! ```text
//! X* = X + a_n c1 l1 X dt + sqrt(a_n alpha1 l1 X) xi sqrt(dt)
//! X' = max(X*, 1),          eta' = eta + (X' - X*)
//! Y* = Y + c2 l2 X Y dt + sqrt(alpha2 l2 X max(Y, 0)) zeta sqrt(dt)
//! Y' = max(Y*, 0)
//! ```
//!
//! The clamp is the one-step Skorohod map, so replaying the accumulated
//! driver increments through the exact Skorohod map reproduces `X` node for
//! node; `eta` is the reflection term and is emitted as a first-class
//! output. Once `Y` reaches 0 it is absorbed and stays 0. Coefficients are
//! evaluated at the previous post-reflection state, so both square roots
//! are always well defined. `a_n > 1` speeds up the catalyst by scaling its
//! drift and its diffusion variance.

use crate::params::DiffusionParams;
use crate::rng::CounterNormal;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdeError {
    #[error("step size must be positive, got {0}")]
    BadStep(f64),
    #[error("step count must be at least 1")]
    NoSteps,
    #[error("state became non-finite at step {step} (t = {t})")]
    Diverged { step: usize, t: f64 },
    #[error("averaged equation needs a >= 0 and y0 >= 0, got a={a}, y0={y0}")]
    BadAveragedCoefficients { a: f64, y0: f64 },
}

/// Uniform integration grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdeGrid {
    pub dt: f64,
    pub steps: usize,
}

impl SdeGrid {
    pub fn new(dt: f64, steps: usize) -> Result<Self, SdeError> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(SdeError::BadStep(dt));
        }
        if steps == 0 {
            return Err(SdeError::NoSteps);
        }
        Ok(Self { dt, steps })
    }

    /// Grid covering `[0, horizon]` with steps of at most `dt_target`.
    pub fn covering(horizon: f64, dt_target: f64) -> Result<Self, SdeError> {
        if !(horizon > 0.0) || !(dt_target > 0.0) {
            return Err(SdeError::BadStep(dt_target.min(horizon)));
        }
        let steps = (horizon / dt_target).ceil() as usize;
        Self::new(horizon / steps as f64, steps)
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.steps as f64
    }
}

/// Noise source for the integrators; `Zero` is the deterministic debug mode.
#[derive(Debug, Clone, Copy)]
pub enum Noise {
    Counter(CounterNormal),
    Zero,
}

impl Noise {
    #[inline]
    fn draw(&self, step: u64, coord: u32) -> f64 {
        match self {
            Noise::Counter(src) => src.normal(step, coord),
            Noise::Zero => 0.0,
        }
    }
}

/// Integrated path of the reflected pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectedPathSample {
    pub times: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Reflection term, nondecreasing from 0; increments only on steps that
    /// clamp at the boundary.
    pub eta: Vec<f64>,
    /// Time Y first hit 0, if it did.
    pub absorbed_at: Option<f64>,
    /// Cumulative driver increments (the unreflected path fed to the
    /// step-wise Skorohod map); kept for reflection-consistency checks.
    pub driver: Vec<f64>,
    /// Left-endpoint cumulative `int_0^{t_k} X dt`, matching the scheme's
    /// own use of the previous state in every coefficient.
    pub int_x: Vec<f64>,
}

/// Integrate the coupled reflected system on the grid.
pub fn integrate_system(
    params: &DiffusionParams,
    grid: &SdeGrid,
    noise: &Noise,
) -> Result<ReflectedPathSample, SdeError> {
    let dt = grid.dt;
    let sqrt_dt = dt.sqrt();
    let len = grid.steps + 1;
    let mut times = Vec::with_capacity(len);
    let mut xs = Vec::with_capacity(len);
    let mut ys = Vec::with_capacity(len);
    let mut etas = Vec::with_capacity(len);
    let mut driver = Vec::with_capacity(len);

    let mut x = params.x0;
    let mut y = params.y0;
    let mut eta = 0.0_f64;
    let mut psi = params.x0;
    let mut int_x_acc = 0.0_f64;
    let mut int_x = Vec::with_capacity(len);
    let mut absorbed_at = if y == 0.0 { Some(0.0) } else { None };
    times.push(0.0);
    xs.push(x);
    ys.push(y);
    etas.push(0.0);
    driver.push(psi);
    int_x.push(0.0);

    let cat_drift = params.a_n * params.c1 * params.lambda1;
    let cat_diff2 = params.a_n * params.alpha1 * params.lambda1;
    let rea_drift = params.c2 * params.lambda2;
    let rea_diff2 = params.alpha2 * params.lambda2;

    for step in 0..grid.steps {
        let t_next = (step + 1) as f64 * dt;
        let xi = noise.draw(step as u64, 0);
        let zeta = noise.draw(step as u64, 1);

        let dx = cat_drift * x * dt + (cat_diff2 * x).sqrt() * xi * sqrt_dt;
        let x_star = x + dx;
        let x_new = x_star.max(1.0);
        eta += x_new - x_star;
        psi += dx;

        let y_new = if absorbed_at.is_some() {
            0.0
        } else {
            let dy = rea_drift * x * y * dt + (rea_diff2 * x * y.max(0.0)).sqrt() * zeta * sqrt_dt;
            let y_star = y + dy;
            let clamped = y_star.max(0.0);
            if clamped == 0.0 {
                absorbed_at = Some(t_next);
            }
            clamped
        };

        if !x_new.is_finite() || !y_new.is_finite() {
            return Err(SdeError::Diverged {
                step,
                t: t_next,
            });
        }
        int_x_acc += x * dt;
        x = x_new;
        y = y_new;
        times.push(t_next);
        xs.push(x);
        ys.push(y);
        etas.push(eta);
        driver.push(psi);
        int_x.push(int_x_acc);
    }

    Ok(ReflectedPathSample {
        times,
        x: xs,
        y: ys,
        eta: etas,
        absorbed_at,
        driver,
        int_x,
    })
}

/// Integrated path of the averaged reactant equation.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedPathSample {
    pub times: Vec<f64>,
    pub y: Vec<f64>,
    pub absorbed_at: Option<f64>,
}

/// Euler-Maruyama for `dY = b Y dt + sqrt(a Y) dB` with absorption at 0.
///
/// In the averaged regime `b = c2 lambda2 m_X` and `a = alpha2 lambda2 m_X`
/// where `m_X` is the stationary catalyst mean.
pub fn integrate_averaged(
    b: f64,
    a: f64,
    y0: f64,
    grid: &SdeGrid,
    noise: &Noise,
) -> Result<AveragedPathSample, SdeError> {
    if !(a >= 0.0) || !(y0 >= 0.0) {
        return Err(SdeError::BadAveragedCoefficients { a, y0 });
    }
    let dt = grid.dt;
    let sqrt_dt = dt.sqrt();
    let mut times = Vec::with_capacity(grid.steps + 1);
    let mut ys = Vec::with_capacity(grid.steps + 1);
    let mut y = y0;
    let mut absorbed_at = if y == 0.0 { Some(0.0) } else { None };
    times.push(0.0);
    ys.push(y);
    for step in 0..grid.steps {
        let t_next = (step + 1) as f64 * dt;
        if absorbed_at.is_none() {
            let zeta = noise.draw(step as u64, 0);
            let y_star = y + b * y * dt + (a * y.max(0.0)).sqrt() * zeta * sqrt_dt;
            y = y_star.max(0.0);
            if y == 0.0 {
                absorbed_at = Some(t_next);
            }
            if !y.is_finite() {
                return Err(SdeError::Diverged { step, t: t_next });
            }
        }
        times.push(t_next);
        ys.push(y);
    }
    Ok(AveragedPathSample {
        times,
        y: ys,
        absorbed_at,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::{Path, PathKind};
    use crate::skorohod::skorohod_reflect;

    fn params(c1: f64, x0: f64, a_n: f64) -> DiffusionParams {
        DiffusionParams {
            c1,
            c2: -0.5,
            alpha1: 1.0,
            alpha2: 1.0,
            lambda1: 1.0,
            lambda2: 1.0,
            x0,
            y0: 1.0,
            a_n,
        }
    }

    #[test]
    fn zero_noise_matches_reflected_exponential_decay() {
        // dX = -X dt clamps at 1: X(t) = max(x0 e^{-t}, 1) up to O(dt).
        let dt = 1e-3;
        let grid = SdeGrid::new(dt, 3000).unwrap();
        let p = params(-1.0, 2.0, 1.0);
        let path = integrate_system(&p, &grid, &Noise::Zero).unwrap();
        let mut worst = 0.0_f64;
        for (t, x) in path.times.iter().zip(&path.x) {
            let exact = (2.0 * (-t).exp()).max(1.0);
            worst = worst.max((x - exact).abs());
        }
        assert!(worst <= 3.0 * 2.0 * dt, "max error {worst} not O(dt)");
    }

    #[test]
    fn zero_noise_pinned_at_boundary_deposits_linear_eta() {
        // x0 = 1, c1 < 0: every step clamps and puts |c1| l1 dt into eta.
        let grid = SdeGrid::new(1e-3, 2000).unwrap();
        let p = params(-1.5, 1.0, 1.0);
        let path = integrate_system(&p, &grid, &Noise::Zero).unwrap();
        for (i, (t, eta)) in path.times.iter().zip(&path.eta).enumerate() {
            assert!((path.x[i] - 1.0).abs() == 0.0);
            assert!(
                (eta - 1.5 * t).abs() < 1e-12 * (1.0 + t.abs() * 1.5e3),
                "eta({t}) = {eta}"
            );
        }
    }

    #[test]
    fn zero_initial_reactant_is_absorbed_immediately() {
        let grid = SdeGrid::new(1e-2, 100).unwrap();
        let mut p = params(-1.0, 2.0, 1.0);
        p.y0 = 0.0;
        let path = integrate_system(&p, &grid, &Noise::Counter(CounterNormal::new(1, 0))).unwrap();
        assert_eq!(path.absorbed_at, Some(0.0));
        assert!(path.y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn absorption_is_permanent_under_noise() {
        // Strong downward drift pushes Y to 0 quickly; it must stay there.
        let grid = SdeGrid::new(1e-3, 5000).unwrap();
        let mut p = params(-1.0, 2.0, 1.0);
        p.c2 = -8.0;
        let path =
            integrate_system(&p, &grid, &Noise::Counter(CounterNormal::new(7, 1))).unwrap();
        if let Some(t0) = path.absorbed_at {
            let k0 = (t0 / grid.dt).round() as usize;
            assert!(path.y[k0..].iter().all(|&v| v == 0.0));
            assert!(path.y[k0] == 0.0);
        } else {
            panic!("expected absorption under this drift");
        }
    }

    #[test]
    fn eta_increments_only_when_clamped() {
        let grid = SdeGrid::new(1e-3, 4000).unwrap();
        let p = params(-1.0, 1.5, 1.0);
        let path =
            integrate_system(&p, &grid, &Noise::Counter(CounterNormal::new(11, 2))).unwrap();
        for k in 1..path.x.len() {
            let d_eta = path.eta[k] - path.eta[k - 1];
            assert!(d_eta >= 0.0);
            if d_eta > 0.0 {
                assert_eq!(path.x[k], 1.0, "clamp without boundary at step {k}");
            }
        }
    }

    #[test]
    fn projection_scheme_is_discrete_skorohod_map_of_driver() {
        // Replaying the accumulated increments through the exact Skorohod
        // map must reproduce the integrator output to rounding accuracy.
        let grid = SdeGrid::new(1e-3, 2000).unwrap();
        let p = params(-1.0, 1.2, 4.0);
        let path =
            integrate_system(&p, &grid, &Noise::Counter(CounterNormal::new(3, 5))).unwrap();
        let psi = Path::new(
            path.times.clone(),
            path.driver.clone(),
            PathKind::PiecewiseLinear,
        )
        .unwrap();
        let (phi, eta) = skorohod_reflect(&psi).unwrap();
        for k in 0..path.x.len() {
            assert!(
                (phi.values()[k] - path.x[k]).abs() < 1e-9,
                "x mismatch at {k}: {} vs {}",
                phi.values()[k],
                path.x[k]
            );
            assert!((eta.values()[k] - path.eta[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn averaged_zero_start_stays_zero() {
        let grid = SdeGrid::new(1e-3, 1000).unwrap();
        let path =
            integrate_averaged(-0.5, 1.0, 0.0, &grid, &Noise::Counter(CounterNormal::new(5, 0)))
                .unwrap();
        assert!(path.y.iter().all(|&v| v == 0.0));
        assert_eq!(path.absorbed_at, Some(0.0));
    }

    #[test]
    fn averaged_moments_match_closed_forms() {
        // dY = bY dt + sqrt(aY) dB from y0: E Y_t = y0 e^{bt},
        // Var Y_t = a y0 e^{bt}(e^{bt} - 1)/b.
        let b = -0.6918909499972923; // c2 l2 m_X at (-0.5, 1) x (-1, 1)
        let a = 1.3837818999945846;
        let y0 = 1.0;
        let reps = 10_000usize;
        let grid = SdeGrid::new(1e-3, 1000).unwrap();
        let mut sum = 0.0;
        let mut sq = 0.0;
        for rep in 0..reps {
            let noise = Noise::Counter(CounterNormal::new(0x5eed, rep as u64));
            let path = integrate_averaged(b, a, y0, &grid, &noise).unwrap();
            let yt = *path.y.last().unwrap();
            sum += yt;
            sq += yt * yt;
        }
        let mean = sum / reps as f64;
        let var = sq / reps as f64 - mean * mean;
        let se_mean = (var / reps as f64).sqrt();
        let eb = b.exp();
        let want_mean = y0 * eb;
        let want_var = a * y0 * eb * (eb - 1.0) / b;
        assert!(
            (mean - want_mean).abs() < 3.0 * se_mean,
            "mean {mean} vs {want_mean} (se {se_mean})"
        );
        // SE of the sample variance via the fourth central moment bound.
        let se_var = want_var * (2.0 / (reps as f64 - 1.0)).sqrt() * 2.0;
        assert!(
            (var - want_var).abs() < 3.0 * se_var,
            "var {var} vs {want_var}"
        );
    }

    #[test]
    fn grid_validation() {
        assert!(SdeGrid::new(0.0, 10).is_err());
        assert!(SdeGrid::new(1e-3, 0).is_err());
        let g = SdeGrid::covering(1.0, 1e-3).unwrap();
        assert_eq!(g.steps, 1000);
        assert!((g.horizon() - 1.0).abs() < 1e-15);
    }
}
