//! Theorem-level Monte Carlo studies.
//!
//! Three studies check the limit statements at desk scale, each through
//! fixed-time marginals plus a trend in the scale parameter:
//!
//! * diffusion limit: branching marginals against reflected-SDE marginals
//!   as the lattice scale n grows;
//! * stationary convergence: occupation samples of the catalyst against the
//!   explicit stationary law;
//! * stochastic averaging: fast-catalyst reactant marginals against the
//!   averaged one-dimensional equation as the timescale split a_n grows.
//!
//! Every study is deterministic given (inputs, seed): replications draw
//! from per-replication streams and results are reduced in replication
//! order. Trend verdicts use medians over independent study repeats, which
//! keeps a single unlucky seed from flipping the sign of a comparison.

use crate::bp::{occupation_sampler, simulate_pair};
use crate::params::{near_critical_pmf, BranchingParams, DiffusionParams, ParamError};
use crate::rng::{derive_seed, CounterNormal, RngStream};
use crate::sde::{integrate_averaged, integrate_system, Noise, SdeError, SdeGrid};
use crate::stationary::{
    echeverria_residual, echeverria_residual_with_constant, test_function_library, StationaryError,
    StationaryLaw,
};
use crate::stats::{ks_one_sample, ks_two_sample, EmpiricalSample, StatsError};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("study needs at least one parameter point")]
    EmptySweep,
    #[error("parameter family mismatch: {0}")]
    FamilyMismatch(String),
    #[error("study requires a subcritical catalyst (c1 < 0), got c1 = {0}")]
    Supercritical(f64),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Bp(#[from] crate::bp::BpError),
    #[error(transparent)]
    Sde(#[from] SdeError),
    #[error(transparent)]
    Stationary(#[from] StationaryError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Limit constants shared by a near-critical family and its diffusion
/// limit, plus the initial masses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyAnchors {
    pub c1: f64,
    pub alpha1: f64,
    pub c2: f64,
    pub alpha2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub x0: f64,
    pub y0: f64,
}

impl FamilyAnchors {
    /// Family member at lattice scale n with timescale multiplier `a_n`.
    ///
    /// Initial masses are snapped to the lattice when needed.
    pub fn branching_member(&self, n: u32, a_n: f64) -> Result<BranchingParams, StudyError> {
        let pmf1 = near_critical_pmf(self.c1, self.alpha1, n)?;
        let pmf2 = near_critical_pmf(self.c2, self.alpha2, n)?;
        let snap = |v: f64| (v * f64::from(n)).round() / f64::from(n);
        let p = BranchingParams::new(
            n,
            self.lambda1,
            self.lambda2,
            pmf1,
            pmf2,
            snap(self.x0),
            snap(self.y0),
            a_n,
        )?;
        // The three-point construction hits the anchors exactly; anything
        // else is a wiring bug upstream.
        if (p.c1() - self.c1).abs() > 1e-9 || (p.alpha1() - self.alpha1).abs() > 1e-9 {
            return Err(StudyError::FamilyMismatch(format!(
                "member at n={n} has (c1, alpha1) = ({}, {}), anchors ({}, {})",
                p.c1(),
                p.alpha1(),
                self.c1,
                self.alpha1
            )));
        }
        Ok(p)
    }

    pub fn diffusion(&self, a_n: f64) -> DiffusionParams {
        DiffusionParams {
            c1: self.c1,
            c2: self.c2,
            alpha1: self.alpha1,
            alpha2: self.alpha2,
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            x0: self.x0,
            y0: self.y0,
            a_n,
        }
    }
}

/// One metric at one parameter point.
#[derive(Debug, Clone, Serialize)]
pub struct StudyRow {
    pub param: f64,
    pub metric: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
}

impl StudyRow {
    fn info(param: f64, metric: &str, value: f64) -> Self {
        Self {
            param,
            metric: metric.to_string(),
            value,
            stderr: None,
            tolerance: None,
            pass: None,
        }
    }

    fn gated(param: f64, metric: &str, value: f64, tolerance: f64, pass: bool) -> Self {
        Self {
            param,
            metric: metric.to_string(),
            value,
            stderr: None,
            tolerance: Some(tolerance),
            pass: Some(pass),
        }
    }
}

/// Structured study result; serializes to JSON and to a flat CSV.
#[derive(Debug, Clone, Serialize)]
pub struct StudyReport {
    pub study: String,
    pub seed: u64,
    /// Echo of the study inputs.
    pub inputs: serde_json::Value,
    pub rows: Vec<StudyRow>,
    pub pass: bool,
    /// Wall-clock seconds; excluded from serialized output so data
    /// sections stay byte-identical across reruns.
    #[serde(skip)]
    pub runtime_secs: f64,
}

impl StudyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Flat CSV: `study,param,metric,value,stderr,tolerance,verdict`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("study,param,metric,value,stderr,tolerance,verdict\n");
        for r in &self.rows {
            let opt = |o: Option<f64>| o.map(|v| v.to_string()).unwrap_or_default();
            let verdict = r
                .pass
                .map(|p| if p { "pass" } else { "fail" }.to_string())
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                self.study,
                r.param,
                r.metric,
                r.value,
                opt(r.stderr),
                opt(r.tolerance),
                verdict
            ));
        }
        out
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Terminal (X, Y) marginals of the branching pair over `reps` replications.
fn bp_marginals(
    params: &BranchingParams,
    horizon: f64,
    reps: usize,
    master: u64,
) -> Result<(Vec<f64>, Vec<f64>), StudyError> {
    let grid = [horizon];
    let results: Result<Vec<(f64, f64)>, crate::bp::BpError> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = RngStream::new(master, rep as u64).rng();
            let rec = simulate_pair(params, horizon, &grid, &mut rng, false)?;
            Ok((rec.x[0], rec.y[0]))
        })
        .collect();
    let pairs = results?;
    Ok(pairs.into_iter().unzip())
}

/// Terminal (X, Y) marginals of the reflected SDE pair.
fn sde_marginals(
    params: &DiffusionParams,
    grid: &SdeGrid,
    reps: usize,
    master: u64,
) -> Result<(Vec<f64>, Vec<f64>), StudyError> {
    let results: Result<Vec<(f64, f64)>, SdeError> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let noise = Noise::Counter(CounterNormal::new(master, rep as u64));
            let path = integrate_system(params, grid, &noise)?;
            Ok((*path.x.last().unwrap(), *path.y.last().unwrap()))
        })
        .collect();
    let pairs = results?;
    Ok(pairs.into_iter().unzip())
}

/// Diffusion-limit study: two-sample KS between branching and SDE marginals
/// at time `horizon`, for each n, plus a median trend over study repeats.
#[allow(clippy::too_many_arguments)]
pub fn study_diffusion_limit(
    anchors: &FamilyAnchors,
    n_list: &[u32],
    horizon: f64,
    reps: usize,
    trend_reps: usize,
    repeats: usize,
    dt: f64,
    ks_tol: f64,
    seed: u64,
) -> Result<StudyReport, StudyError> {
    let start = std::time::Instant::now();
    if n_list.is_empty() {
        return Err(StudyError::EmptySweep);
    }
    let members: Vec<BranchingParams> = n_list
        .iter()
        .map(|&n| anchors.branching_member(n, 1.0))
        .collect::<Result<_, _>>()?;
    crate::params::family_check(&members, 1.0)?;
    let sde_params = anchors.diffusion(1.0);
    let grid = SdeGrid::covering(horizon, dt)?;

    let ks_pair = |n: u32, reps: usize, tag: u64| -> Result<(f64, f64), StudyError> {
        let member = anchors.branching_member(n, 1.0)?;
        let (bx, by) = bp_marginals(
            &member,
            horizon,
            reps,
            derive_seed(seed, "limit/bp", tag ^ u64::from(n)),
        )?;
        let (sx, sy) = sde_marginals(
            &sde_params,
            &grid,
            reps,
            derive_seed(seed, "limit/sde", tag ^ u64::from(n)),
        )?;
        let ks_x = ks_two_sample(&EmpiricalSample::new(bx)?, &EmpiricalSample::new(sx)?);
        // Degenerate y0 = 0 families stay identically zero on both sides;
        // the KS of two all-zero samples is 0 by construction.
        let ks_y = ks_two_sample(&EmpiricalSample::new(by)?, &EmpiricalSample::new(sy)?);
        Ok((ks_x, ks_y))
    };

    let mut rows = Vec::new();
    let n_max = *n_list.last().unwrap();
    let mut main_pass = true;
    for &n in n_list {
        let (ks_x, ks_y) = ks_pair(n, reps, 0)?;
        if n == n_max {
            let px = ks_x < ks_tol;
            let py = ks_y < ks_tol;
            main_pass = px && py;
            rows.push(StudyRow::gated(n.into(), "ks_x", ks_x, ks_tol, px));
            rows.push(StudyRow::gated(n.into(), "ks_y", ks_y, ks_tol, py));
        } else {
            rows.push(StudyRow::info(n.into(), "ks_x", ks_x));
            rows.push(StudyRow::info(n.into(), "ks_y", ks_y));
        }
    }

    // Median KS trend across repeats: non-increasing in n.
    let mut medians = Vec::new();
    for &n in n_list {
        let mut ks_vals = Vec::with_capacity(repeats);
        for r in 0..repeats {
            let (ks_x, _) = ks_pair(n, trend_reps, 0x100 + r as u64 * 0x1000)?;
            ks_vals.push(ks_x);
        }
        let med = median(&mut ks_vals);
        rows.push(StudyRow::info(n.into(), "ks_x_median", med));
        medians.push(med);
    }
    let trend_pass = medians.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    rows.push(StudyRow::gated(
        n_max.into(),
        "ks_x_median_nonincreasing",
        f64::from(u8::from(trend_pass)),
        1.0,
        trend_pass,
    ));

    Ok(StudyReport {
        study: "diffusion_limit".into(),
        seed,
        inputs: serde_json::json!({
            "anchors": anchors,
            "n_list": n_list,
            "horizon": horizon,
            "reps": reps,
            "trend_reps": trend_reps,
            "repeats": repeats,
            "dt": dt,
            "ks_tolerance": ks_tol,
        }),
        rows,
        pass: main_pass && trend_pass,
        runtime_secs: start.elapsed().as_secs_f64(),
    })
}

/// Stationary-convergence study: one-sample KS of occupation samples
/// against the explicit law, per n, plus a sampler self-test row and the
/// median trend over repeats.
#[allow(clippy::too_many_arguments)]
pub fn study_stationary(
    anchors: &FamilyAnchors,
    n_list: &[u32],
    count: usize,
    gap: f64,
    burn_in: f64,
    trend_count: usize,
    repeats: usize,
    ks_tol: f64,
    seed: u64,
) -> Result<StudyReport, StudyError> {
    let start = std::time::Instant::now();
    if n_list.is_empty() {
        return Err(StudyError::EmptySweep);
    }
    if anchors.c1 >= 0.0 {
        return Err(StudyError::Supercritical(anchors.c1));
    }
    let law = StationaryLaw::new(anchors.c1, anchors.alpha1)?;

    let occupation_ks = |n: u32, count: usize, tag: u64| -> Result<f64, StudyError> {
        let member = anchors.branching_member(n, 1.0)?;
        let mut rng = RngStream::new(derive_seed(seed, "stationary/occ", tag ^ u64::from(n)), 0)
            .rng();
        let samples = occupation_sampler(&member, burn_in, gap, count, &mut rng)?;
        Ok(ks_one_sample(&EmpiricalSample::new(samples)?, |x| {
            law.cdf(x)
        }))
    };

    let mut rows = Vec::new();
    let n_max = *n_list.last().unwrap();
    let mut main_pass = true;
    for &n in n_list {
        let ks = occupation_ks(n, count, 0)?;
        if n == n_max {
            main_pass = ks < ks_tol;
            rows.push(StudyRow::gated(n.into(), "ks_occupation", ks, ks_tol, main_pass));
        } else {
            rows.push(StudyRow::info(n.into(), "ks_occupation", ks));
        }
    }

    // Exact-sampler self-test at the 95% one-sample critical value.
    let self_ks = {
        let mut rng = RngStream::new(derive_seed(seed, "stationary/self", 0), 0).rng();
        let draws: Vec<f64> = (0..count).map(|_| law.sample(&mut rng)).collect();
        ks_one_sample(&EmpiricalSample::new(draws)?, |x| law.cdf(x))
    };
    let self_crit = 1.36 / (count as f64).sqrt();
    let self_pass = self_ks < self_crit;
    rows.push(StudyRow::gated(0.0, "ks_sampler_self_test", self_ks, self_crit, self_pass));

    let mut medians = Vec::new();
    for &n in n_list {
        let mut ks_vals = Vec::with_capacity(repeats);
        for r in 0..repeats {
            ks_vals.push(occupation_ks(n, trend_count, 0x100 + r as u64 * 0x1000)?);
        }
        let med = median(&mut ks_vals);
        rows.push(StudyRow::info(n.into(), "ks_occupation_median", med));
        medians.push(med);
    }
    let trend_pass = medians.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    rows.push(StudyRow::gated(
        n_max.into(),
        "ks_median_nonincreasing",
        f64::from(u8::from(trend_pass)),
        1.0,
        trend_pass,
    ));

    Ok(StudyReport {
        study: "stationary_convergence".into(),
        seed,
        inputs: serde_json::json!({
            "anchors": anchors,
            "n_list": n_list,
            "count": count,
            "gap": gap,
            "burn_in": burn_in,
            "trend_count": trend_count,
            "repeats": repeats,
            "ks_tolerance": ks_tol,
        }),
        rows,
        pass: main_pass && trend_pass && self_pass,
        runtime_secs: start.elapsed().as_secs_f64(),
    })
}

/// Which fast-catalyst model the averaging study simulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// Reflected-SDE pair with the catalyst accelerated by `a_n`.
    Diffusion,
    /// Branching pair with the catalyst block accelerated by `a_n`.
    Branching,
}

/// Reactant marginal at `t_probe` under the fast catalyst, plus the
/// windowed catalyst average `(1/h) int_{t-h}^t X ds` with `h = a_n^{-1/2}`.
fn fast_marginals(
    regime: Regime,
    anchors: &FamilyAnchors,
    a_n: f64,
    bp_lattice_n: u32,
    t_probe: f64,
    dt: f64,
    reps: usize,
    master: u64,
) -> Result<(Vec<f64>, Vec<f64>), StudyError> {
    let window = a_n.powf(-0.5).min(t_probe);
    match regime {
        Regime::Branching => {
            let member = anchors.branching_member(bp_lattice_n, a_n)?;
            let grid = [t_probe - window, t_probe];
            let results: Result<Vec<(f64, f64)>, crate::bp::BpError> = (0..reps)
                .into_par_iter()
                .map(|rep| {
                    let mut rng = RngStream::new(master, rep as u64).rng();
                    let rec = simulate_pair(&member, t_probe, &grid, &mut rng, false)?;
                    let w = (rec.int_x_grid[1] - rec.int_x_grid[0]) / window;
                    Ok((rec.y[1], w))
                })
                .collect();
            Ok(results?.into_iter().unzip())
        }
        Regime::Diffusion => {
            // Finer steps as a_n grows keep the fast catalyst resolved on
            // its own clock.
            let sde_params = anchors.diffusion(a_n);
            let grid = SdeGrid::covering(t_probe, dt / a_n)?;
            let w_steps = (window / grid.dt).round() as usize;
            let results: Result<Vec<(f64, f64)>, SdeError> = (0..reps)
                .into_par_iter()
                .map(|rep| {
                    let noise = Noise::Counter(CounterNormal::new(master, rep as u64));
                    let path = integrate_system(&sde_params, &grid, &noise)?;
                    let last = path.int_x.len() - 1;
                    let w = (path.int_x[last] - path.int_x[last - w_steps])
                        / (w_steps as f64 * grid.dt);
                    Ok((*path.y.last().unwrap(), w))
                })
                .collect();
            Ok(results?.into_iter().unzip())
        }
    }
}

/// Stochastic-averaging study.
///
/// For each `a_n`, compares the fast-system reactant marginal at `t_probe`
/// with the averaged equation's marginal (two-sample KS) and, at the
/// largest `a_n`, with the closed-form moments
/// `E Y = y0 e^{b t}`, `Var Y = a y0 e^{b t}(e^{b t}-1)/b` where
/// `b = c2 l2 m_X`, `a = alpha2 l2 m_X`. The trend verdict compares KS
/// medians at the smallest and largest `a_n` over study repeats.
#[allow(clippy::too_many_arguments)]
pub fn study_averaging(
    anchors: &FamilyAnchors,
    a_n_list: &[f64],
    regime: Regime,
    bp_lattice_n: u32,
    t_probe: f64,
    reps: usize,
    trend_reps: usize,
    repeats: usize,
    dt: f64,
    ks_tol: f64,
    seed: u64,
) -> Result<StudyReport, StudyError> {
    let start = std::time::Instant::now();
    if a_n_list.is_empty() {
        return Err(StudyError::EmptySweep);
    }
    if anchors.c1 >= 0.0 {
        return Err(StudyError::Supercritical(anchors.c1));
    }
    if !(t_probe > 0.0) {
        return Err(StudyError::FamilyMismatch(format!(
            "t_probe must be positive, got {t_probe}"
        )));
    }
    let law = StationaryLaw::new(anchors.c1, anchors.alpha1)?;
    let m_x = law.mean();
    let b = anchors.c2 * anchors.lambda2 * m_x;
    let a = anchors.alpha2 * anchors.lambda2 * m_x;

    let averaged_sample = |reps: usize, tag: u64| -> Result<Vec<f64>, StudyError> {
        let grid = SdeGrid::covering(t_probe, dt)?;
        let master = derive_seed(seed, "averaging/ref", tag);
        let results: Result<Vec<f64>, SdeError> = (0..reps)
            .into_par_iter()
            .map(|rep| {
                let noise = Noise::Counter(CounterNormal::new(master, rep as u64));
                Ok(*integrate_averaged(b, a, anchors.y0, &grid, &noise)?.y.last().unwrap())
            })
            .collect();
        Ok(results?)
    };

    let fast_sample = |a_n: f64, reps: usize, tag: u64| -> Result<(Vec<f64>, Vec<f64>), StudyError> {
        fast_marginals(
            regime,
            anchors,
            a_n,
            bp_lattice_n,
            t_probe,
            dt,
            reps,
            derive_seed(seed, "averaging/fast", tag ^ a_n.to_bits()),
        )
    };

    let mut rows = Vec::new();
    let a_max = *a_n_list.last().unwrap();
    let mut main_pass = true;
    for &a_n in a_n_list {
        let (ys, windows) = fast_sample(a_n, reps, 0)?;
        let reference = averaged_sample(reps, a_n.to_bits())?;
        let ks = ks_two_sample(
            &EmpiricalSample::new(ys.clone())?,
            &EmpiricalSample::new(reference)?,
        );
        let window_dev =
            windows.iter().map(|w| (w - m_x).abs()).sum::<f64>() / windows.len() as f64;
        rows.push(StudyRow::info(a_n, "window_avg_abs_dev", window_dev));

        if a_n == a_max {
            let pass_ks = ks < ks_tol;
            rows.push(StudyRow::gated(a_n, "ks_y", ks, ks_tol, pass_ks));
            main_pass &= pass_ks;

            let sample = EmpiricalSample::new(ys)?;
            let (mean, mean_se) = sample.mean_with_se();
            let (var, var_se) = sample.variance_with_se();
            let ebt = (b * t_probe).exp();
            let want_mean = anchors.y0 * ebt;
            let want_var = a * anchors.y0 * ebt * (ebt - 1.0) / b;
            let pass_mean = (mean - want_mean).abs() < 3.0 * mean_se;
            let pass_var = (var - want_var).abs() < 3.0 * var_se;
            rows.push(StudyRow {
                param: a_n,
                metric: "mean_y_error".into(),
                value: mean - want_mean,
                stderr: Some(mean_se),
                tolerance: Some(3.0 * mean_se),
                pass: Some(pass_mean),
            });
            rows.push(StudyRow {
                param: a_n,
                metric: "var_y_error".into(),
                value: var - want_var,
                stderr: Some(var_se),
                tolerance: Some(3.0 * var_se),
                pass: Some(pass_var),
            });
            main_pass &= pass_mean && pass_var;
        } else {
            rows.push(StudyRow::info(a_n, "ks_y", ks));
        }
    }

    // KS medians at the sweep ends over independent repeats.
    let a_min = a_n_list[0];
    let mut trend_pass = true;
    if a_n_list.len() > 1 {
        let med = |a_n: f64| -> Result<f64, StudyError> {
            let mut vals = Vec::with_capacity(repeats);
            for r in 0..repeats {
                let tag = 0x100 + r as u64 * 0x1000;
                let (ys, _) = fast_sample(a_n, trend_reps, tag)?;
                let reference = averaged_sample(trend_reps, tag ^ a_n.to_bits())?;
                vals.push(ks_two_sample(
                    &EmpiricalSample::new(ys)?,
                    &EmpiricalSample::new(reference)?,
                ));
            }
            Ok(median(&mut vals))
        };
        let med_min = med(a_min)?;
        let med_max = med(a_max)?;
        trend_pass = med_max < med_min;
        rows.push(StudyRow::info(a_min, "ks_y_median", med_min));
        rows.push(StudyRow::info(a_max, "ks_y_median", med_max));
        rows.push(StudyRow::gated(
            a_max,
            "ks_median_improves",
            f64::from(u8::from(trend_pass)),
            1.0,
            trend_pass,
        ));
    }

    Ok(StudyReport {
        study: match regime {
            Regime::Diffusion => "averaging_diffusion".into(),
            Regime::Branching => "averaging_branching".into(),
        },
        seed,
        inputs: serde_json::json!({
            "anchors": anchors,
            "a_n_list": a_n_list,
            "regime": regime,
            "bp_lattice_n": bp_lattice_n,
            "t_probe": t_probe,
            "reps": reps,
            "trend_reps": trend_reps,
            "repeats": repeats,
            "dt": dt,
            "ks_tolerance": ks_tol,
            "m_x": m_x,
        }),
        rows,
        pass: main_pass && trend_pass,
        runtime_secs: start.elapsed().as_secs_f64(),
    })
}

/// Residuals of the generator-orthogonality identity over the test-function
/// library, with the boundary-constant mutation as a negative control.
pub fn echeverria_report(c1: f64, alpha1: f64, lambda1: f64) -> Result<StudyReport, StudyError> {
    let start = std::time::Instant::now();
    let law = StationaryLaw::new(c1, alpha1)?;
    let library = test_function_library();
    let residual_tol = 1e-6;
    let mutation_floor = 1e-3;
    let mut rows = Vec::new();
    let mut pass = true;
    for (i, phi) in library.iter().enumerate() {
        let r = echeverria_residual(&law, phi, lambda1);
        let ok = r.abs() < residual_tol;
        pass &= ok;
        rows.push(StudyRow::gated(i as f64, &format!("residual[{}]", phi.name), r, residual_tol, ok));
        if phi.d1(1.0).abs() > 1e-12 {
            let mutated = echeverria_residual_with_constant(&law, phi, lambda1, law.pdf(1.0));
            let caught = mutated.abs() > mutation_floor;
            pass &= caught;
            rows.push(StudyRow::gated(
                i as f64,
                &format!("mutated_residual[{}]", phi.name),
                mutated,
                mutation_floor,
                caught,
            ));
        }
    }
    Ok(StudyReport {
        study: "echeverria".into(),
        seed: 0,
        inputs: serde_json::json!({
            "c1": c1, "alpha1": alpha1, "lambda1": lambda1,
            "residual_tolerance": residual_tol,
            "mutation_floor": mutation_floor,
        }),
        rows,
        pass,
        runtime_secs: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_anchors() -> FamilyAnchors {
        FamilyAnchors {
            c1: -1.0,
            alpha1: 1.0,
            c2: -0.5,
            alpha2: 1.0,
            lambda1: 1.0,
            lambda2: 1.0,
            x0: 1.5,
            y0: 1.0,
        }
    }

    #[test]
    fn zero_reactant_family_gives_zero_ks_y() {
        let mut anchors = small_anchors();
        anchors.y0 = 0.0;
        let report = study_diffusion_limit(
            &anchors,
            &[10, 20],
            0.5,
            200,
            100,
            3,
            1e-2,
            0.5,
            42,
        )
        .unwrap();
        let ks_y = report
            .rows
            .iter()
            .find(|r| r.metric == "ks_y" && r.param == 20.0)
            .unwrap();
        assert_eq!(ks_y.value, 0.0);
    }

    #[test]
    fn stationary_study_rejects_supercritical() {
        let mut anchors = small_anchors();
        anchors.c1 = 0.5;
        let err = study_stationary(&anchors, &[10], 100, 0.5, 1.0, 50, 2, 0.1, 1).unwrap_err();
        assert!(matches!(err, StudyError::Supercritical(_)));
    }

    #[test]
    fn averaging_zero_reactant_is_degenerate_zero() {
        let mut anchors = small_anchors();
        anchors.y0 = 0.0;
        let report = study_averaging(
            &anchors,
            &[1.0, 4.0],
            Regime::Diffusion,
            10,
            0.5,
            100,
            50,
            2,
            1e-2,
            0.5,
            7,
        )
        .unwrap();
        for r in report.rows.iter().filter(|r| r.metric == "ks_y") {
            assert_eq!(r.value, 0.0);
        }
    }

    #[test]
    fn reports_are_deterministic_given_seed() {
        let anchors = small_anchors();
        let run = || {
            study_diffusion_limit(&anchors, &[10], 0.5, 150, 80, 2, 1e-2, 0.5, 99)
                .unwrap()
                .to_json()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn csv_shape_is_flat() {
        let report = echeverria_report(-1.0, 1.0, 1.0).unwrap();
        let csv = report.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "study,param,metric,value,stderr,tolerance,verdict"
        );
        assert!(lines.clone().count() >= 10);
        for line in lines {
            assert_eq!(line.split(',').count(), 7, "line {line}");
        }
    }
}
