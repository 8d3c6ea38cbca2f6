//! Statistics primitives for the verification studies: empirical samples,
//! Kolmogorov-Smirnov distances, order-statistic Wasserstein-1, ergodic
//! averages, and moment estimates with standard errors.

use crate::path::{Path, PathKind};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("sample is empty")]
    Empty,
    #[error("sample contains a non-finite value")]
    NonFinite,
    #[error("burn-in {burn_in} must be below the path horizon {horizon}")]
    BurnInTooLong { burn_in: f64, horizon: f64 },
}

/// Sorted sample with equal weights.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSample {
    values: Vec<f64>,
}

impl EmpiricalSample {
    pub fn new(mut values: Vec<f64>) -> Result<Self, StatsError> {
        if values.is_empty() {
            return Err(StatsError::Empty);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite);
        }
        values.sort_unstable_by(|a, b| a.total_cmp(b));
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    /// Sample mean with its standard error.
    pub fn mean_with_se(&self) -> (f64, f64) {
        let m = self.mean();
        let n = self.len() as f64;
        let var = self.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
        (m, (var / n).sqrt())
    }

    /// Unbiased sample variance with a standard error from the fourth
    /// central moment: `SE(s^2)^2 = (m4 - s^4 (n-3)/(n-1)) / n`.
    pub fn variance_with_se(&self) -> (f64, f64) {
        let n = self.len() as f64;
        let m = self.mean();
        let mut m2 = 0.0;
        let mut m4 = 0.0;
        for &v in &self.values {
            let d = v - m;
            m2 += d * d;
            m4 += d * d * d * d;
        }
        m2 /= n;
        m4 /= n;
        let s2 = m2 * n / (n - 1.0);
        let se2 = (m4 - s2 * s2 * (n - 3.0) / (n - 1.0)) / n;
        (s2, se2.max(0.0).sqrt())
    }
}

/// One-sample Kolmogorov-Smirnov statistic against a CDF:
/// `D = max_i max(i/m - F(x_(i)), F(x_(i)) - (i-1)/m)`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: &EmpiricalSample, cdf: F) -> f64 {
    let m = sample.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in sample.values().iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / m - f).max(f - i as f64 / m);
    }
    d
}

/// Two-sample Kolmogorov-Smirnov statistic: the sup-distance between the
/// empirical CDFs over the merged support.
pub fn ks_two_sample(a: &EmpiricalSample, b: &EmpiricalSample) -> f64 {
    let (av, bv) = (a.values(), b.values());
    let (na, nb) = (av.len() as f64, bv.len() as f64);
    let mut ia = 0usize;
    let mut ib = 0usize;
    let mut d = 0.0_f64;
    while ia < av.len() || ib < bv.len() {
        let x = match (av.get(ia), bv.get(ib)) {
            (Some(&xa), Some(&xb)) => xa.min(xb),
            (Some(&xa), None) => xa,
            (None, Some(&xb)) => xb,
            (None, None) => break,
        };
        while ia < av.len() && av[ia] <= x {
            ia += 1;
        }
        while ib < bv.len() && bv[ib] <= x {
            ib += 1;
        }
        d = d.max((ia as f64 / na - ib as f64 / nb).abs());
    }
    d
}

/// Wasserstein-1 distance between equal-size samples: the mean absolute
/// difference of matched order statistics. Unequal sizes are reduced to the
/// smaller count by nearest-rank quantile matching at `(i - 1/2)/m`.
pub fn wasserstein1(a: &EmpiricalSample, b: &EmpiricalSample) -> f64 {
    let m = a.len().min(b.len());
    let pick = |s: &EmpiricalSample, i: usize| {
        if s.len() == m {
            s.values()[i]
        } else {
            let q = (i as f64 + 0.5) / m as f64;
            let idx = ((q * s.len() as f64).floor() as usize).min(s.len() - 1);
            s.values()[idx]
        }
    };
    (0..m).map(|i| (pick(a, i) - pick(b, i)).abs()).sum::<f64>() / m as f64
}

/// Time-weighted average of a path over `[burn_in, horizon]`: exact for
/// piecewise-constant paths, trapezoidal for piecewise-linear.
pub fn ergodic_average(path: &Path, burn_in: f64) -> Result<f64, StatsError> {
    let horizon = path.horizon();
    if burn_in >= horizon || burn_in < 0.0 {
        return Err(StatsError::BurnInTooLong { burn_in, horizon });
    }
    let times = path.times();
    let values = path.values();
    let mut integral = 0.0;
    for k in 0..times.len() - 1 {
        let (t0, t1) = (times[k], times[k + 1]);
        if t1 <= burn_in {
            continue;
        }
        let lo = t0.max(burn_in);
        match path.kind() {
            PathKind::PiecewiseConstant => {
                integral += values[k] * (t1 - lo);
            }
            PathKind::PiecewiseLinear => {
                let interp = |t: f64| {
                    values[k] + (values[k + 1] - values[k]) * (t - t0) / (t1 - t0)
                };
                integral += 0.5 * (interp(lo) + values[k + 1]) * (t1 - lo);
            }
        }
    }
    Ok(integral / (horizon - burn_in))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(v: &[f64]) -> EmpiricalSample {
        EmpiricalSample::new(v.to_vec()).unwrap()
    }

    #[test]
    fn ks_one_sample_against_exact_quantiles() {
        // Points at quantiles (i - 0.5)/m of U(0,1) give D = 0.5/m.
        let m = 40usize;
        let vals: Vec<f64> = (1..=m).map(|i| (i as f64 - 0.5) / m as f64).collect();
        let d = ks_one_sample(&sample(&vals), |x| x.clamp(0.0, 1.0));
        assert!((d - 0.5 / m as f64).abs() < 1e-14);
    }

    #[test]
    fn ks_one_sample_single_median_point() {
        let d = ks_one_sample(&sample(&[0.5]), |x| x.clamp(0.0, 1.0));
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ks_one_sample_matches_brute_force_on_step_cdf() {
        // Step CDF with atoms at the sample's own values.
        let atoms = [1.0, 2.0, 4.0];
        let cdf = |x: f64| atoms.iter().filter(|&&a| a <= x).count() as f64 / 3.0;
        let s = sample(&[1.0, 2.0, 2.0, 4.0, 5.0]);
        let d = ks_one_sample(&s, cdf);
        // Brute force over the order statistics.
        let m = s.len() as f64;
        let mut want = 0.0_f64;
        for (i, &x) in s.values().iter().enumerate() {
            let f = cdf(x);
            want = want.max(((i as f64 + 1.0) / m - f).max(f - i as f64 / m));
        }
        assert_eq!(d, want);
    }

    #[test]
    fn ks_two_sample_basics() {
        let a = sample(&[1.0, 2.0]);
        assert_eq!(ks_two_sample(&a, &a), 0.0);
        let b = sample(&[1.5]);
        assert!((ks_two_sample(&a, &b) - 0.5).abs() < 1e-15);
        let disjoint = sample(&[10.0, 11.0]);
        assert_eq!(ks_two_sample(&a, &disjoint), 1.0);
        // Symmetry.
        assert_eq!(ks_two_sample(&a, &b), ks_two_sample(&b, &a));
    }

    #[test]
    fn wasserstein_basics() {
        let a = sample(&[0.0, 1.0]);
        assert_eq!(wasserstein1(&a, &a), 0.0);
        let shifted = sample(&[0.7, 1.7]);
        assert!((wasserstein1(&a, &shifted) - 0.7).abs() < 1e-15);
        let b = sample(&[0.0, 3.0]);
        assert!((wasserstein1(&a, &b) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn wasserstein_triangle_inequality_spot_check() {
        use crate::rng::RngStream;
        use rand::Rng;
        let mut rng = RngStream::new(99, 0).rng();
        for _ in 0..50 {
            let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
                sample(&(0..20).map(|_| rng.random::<f64>() * 4.0).collect::<Vec<_>>())
            };
            let (a, b, c) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
            let (ab, bc, ac) = (
                wasserstein1(&a, &b),
                wasserstein1(&b, &c),
                wasserstein1(&a, &c),
            );
            assert!(ac <= ab + bc + 1e-12);
        }
    }

    #[test]
    fn ergodic_average_constant_path() {
        let p = Path::new(
            vec![0.0, 1.0, 5.0],
            vec![3.0, 3.0, 3.0],
            PathKind::PiecewiseConstant,
        )
        .unwrap();
        assert!((ergodic_average(&p, 0.5).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn ergodic_average_piecewise_cases() {
        // Step path: value 2 on [0,1), 4 on [1,3). Average over [0.5, 3]:
        // (2*0.5 + 4*2) / 2.5 = 3.6
        let p = Path::new(
            vec![0.0, 1.0, 3.0],
            vec![2.0, 4.0, 4.0],
            PathKind::PiecewiseConstant,
        )
        .unwrap();
        assert!((ergodic_average(&p, 0.5).unwrap() - 3.6).abs() < 1e-14);

        // Linear ramp 0 -> 4 over [0, 2]: average over [1, 2] is 3.
        let ramp = Path::new(vec![0.0, 2.0], vec![0.0, 4.0], PathKind::PiecewiseLinear).unwrap();
        assert!((ergodic_average(&ramp, 1.0).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn ergodic_average_rejects_long_burn_in() {
        let p = Path::new(vec![0.0, 1.0], vec![1.0, 1.0], PathKind::PiecewiseLinear).unwrap();
        assert!(matches!(
            ergodic_average(&p, 1.0),
            Err(StatsError::BurnInTooLong { .. })
        ));
    }

    #[test]
    fn moment_estimates_reasonable() {
        let s = sample(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let (m, se) = s.mean_with_se();
        assert!((m - 3.0).abs() < 1e-15);
        // var = 2.5, se = sqrt(2.5/5)
        assert!((se - (2.5_f64 / 5.0).sqrt()).abs() < 1e-12);
        let (v, _) = s.variance_with_se();
        assert!((v - 2.5).abs() < 1e-12);
    }
}
