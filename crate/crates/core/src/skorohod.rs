//! One-dimensional Skorohod map with reflection at 1.
//!
//! For a path `psi` with `psi(0) >= 1`, the map is
//!
//! ```text
//! (Gamma psi)(t) = (psi(t) + 1) - min_{s <= t} (psi(s) /\ 1)
//! ```
//!
//! and the reflection term is `eta = Gamma psi - psi`. At grid nodes the
//! running minimum of `psi /\ 1` is exact for both path kinds, since a
//! linear segment attains its minimum at an endpoint. The output `phi`
//! stays in `[1, inf)`, `eta` is nondecreasing from 0, and `eta` grows only
//! while `phi` sits at the boundary.

use crate::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SkorohodError {
    #[error("input path must start at or above 1, got {0}")]
    StartsBelowOne(f64),
    #[error("paths must share one grid (mismatch at index {0})")]
    GridMismatch(usize),
    #[error("horizon {0} must be positive")]
    BadHorizon(f64),
}

/// Node-wise complementarity tolerance for piecewise-linear inputs, which
/// may touch the boundary strictly between nodes.
pub const COMPLEMENTARITY_TOL: f64 = 1e-9;

/// Apply the Skorohod map to `psi`, returning the reflected path and the
/// reflection term on the same grid.
pub fn skorohod_reflect(psi: &Path) -> Result<(Path, Path), SkorohodError> {
    let v = psi.values();
    if v[0] < 1.0 {
        return Err(SkorohodError::StartsBelowOne(v[0]));
    }
    let mut phi = Vec::with_capacity(v.len());
    let mut eta = Vec::with_capacity(v.len());
    // eta(t) = 1 - min_{s<=t}(psi(s) /\ 1) is computed first: the running
    // minimum is exact, so eta is exactly 0 while the path stays at or
    // above 1 and exactly nondecreasing throughout. phi = psi + eta then
    // clamps at 1 to keep the boundary exact against the last rounding.
    let mut running_min = 1.0_f64; // psi(0) /\ 1 = 1 since psi(0) >= 1
    for &x in v {
        running_min = running_min.min(x);
        let push = 1.0 - running_min;
        phi.push((x + push).max(1.0));
        eta.push(push);
    }
    let times = psi.times().to_vec();
    let phi = Path::new(times.clone(), phi, psi.kind()).expect("grid already validated");
    let eta = Path::new(times, eta, psi.kind()).expect("grid already validated");
    Ok((phi, eta))
}

/// Evaluate both sides of the Lipschitz bound
/// `sup_{s<=t} |Gamma psi - Gamma psi~| <= 2 sup_{s<=t} |psi - psi~|`
/// at the grid nodes up to `horizon`.
pub fn lipschitz_gap(
    psi: &Path,
    psi_tilde: &Path,
    horizon: f64,
) -> Result<(f64, f64), SkorohodError> {
    if psi.len() != psi_tilde.len() {
        return Err(SkorohodError::GridMismatch(psi.len().min(psi_tilde.len())));
    }
    for (i, (a, b)) in psi.times().iter().zip(psi_tilde.times()).enumerate() {
        if a != b {
            return Err(SkorohodError::GridMismatch(i));
        }
    }
    if !(horizon > 0.0) {
        return Err(SkorohodError::BadHorizon(horizon));
    }
    let (phi, _) = skorohod_reflect(psi)?;
    let (phi_t, _) = skorohod_reflect(psi_tilde)?;
    let mut lhs = 0.0_f64;
    let mut rhs = 0.0_f64;
    for i in 0..psi.len() {
        if psi.times()[i] > horizon {
            break;
        }
        lhs = lhs.max((phi.values()[i] - phi_t.values()[i]).abs());
        rhs = rhs.max((psi.values()[i] - psi_tilde.values()[i]).abs());
    }
    Ok((lhs, 2.0 * rhs))
}

/// Check the characterizing properties of a reflection output at the nodes:
/// `phi >= 1`, `eta` nondecreasing from 0, and `eta` increments only happen
/// against the boundary. Returns the first violated property, if any.
pub fn check_reflection(psi: &Path, phi: &Path, eta: &Path) -> Option<String> {
    let pv = phi.values();
    let ev = eta.values();
    if ev[0] != 0.0 {
        return Some(format!("eta(0) = {} != 0", ev[0]));
    }
    for i in 0..pv.len() {
        if pv[i] < 1.0 {
            return Some(format!("phi < 1 at node {i}: {}", pv[i]));
        }
        if (pv[i] - (psi.values()[i] + ev[i])).abs() > 1e-12 {
            return Some(format!("phi != psi + eta at node {i}"));
        }
        if i > 0 {
            if ev[i] < ev[i - 1] {
                return Some(format!("eta decreases at node {i}"));
            }
            if ev[i] > ev[i - 1] && pv[i].min(pv[i - 1]) > 1.0 + COMPLEMENTARITY_TOL {
                return Some(format!(
                    "eta grows over ({}, {}] while phi stays above 1",
                    psi.times()[i - 1],
                    psi.times()[i]
                ));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::PathKind;
    use proptest::prelude::*;

    fn linear(values: &[f64]) -> Path {
        let times: Vec<f64> = (0..values.len()).map(|i| i as f64).collect();
        Path::new(times, values.to_vec(), PathKind::PiecewiseLinear).unwrap()
    }

    #[test]
    fn constant_above_boundary_is_fixed() {
        let psi = linear(&[2.0, 2.0, 2.0, 2.0]);
        let (phi, eta) = skorohod_reflect(&psi).unwrap();
        assert_eq!(phi.values(), psi.values());
        assert_eq!(eta.values(), &[0.0; 4]);
    }

    #[test]
    fn descending_ramp_matches_hand_evaluation() {
        // psi through (0,2),(1,1),(2,0),(3,-1):
        //   running min of psi /\ 1: 1, 1, 0, -1
        //   phi = psi + 1 - min   : 2, 1, 1, 1
        let psi = linear(&[2.0, 1.0, 0.0, -1.0]);
        let (phi, eta) = skorohod_reflect(&psi).unwrap();
        assert_eq!(phi.values(), &[2.0, 1.0, 1.0, 1.0]);
        assert_eq!(eta.values(), &[0.0, 0.0, 1.0, 2.0]);
    }

    #[test]
    fn past_minimum_persists() {
        // psi through (0,1),(1,0),(2,1): phi(2) = 2 because the minimum 0
        // reached at t=1 keeps pushing.
        let psi = linear(&[1.0, 0.0, 1.0]);
        let (phi, eta) = skorohod_reflect(&psi).unwrap();
        assert_eq!(phi.values(), &[1.0, 1.0, 2.0]);
        assert_eq!(eta.values(), &[0.0, 1.0, 1.0]);
    }

    #[test]
    fn rejects_start_below_one() {
        let psi = linear(&[0.5, 2.0]);
        assert!(matches!(
            skorohod_reflect(&psi),
            Err(SkorohodError::StartsBelowOne(_))
        ));
    }

    #[test]
    fn lipschitz_gap_trivial_cases() {
        let psi = linear(&[2.0, 2.0, 2.0]);
        let same = lipschitz_gap(&psi, &psi, 2.0).unwrap();
        assert_eq!(same, (0.0, 0.0));

        let psi_t = linear(&[2.5, 2.5, 2.5]);
        let (lhs, rhs) = lipschitz_gap(&psi, &psi_t, 2.0).unwrap();
        assert_eq!((lhs, rhs), (0.5, 1.0));
    }

    #[test]
    fn lipschitz_gap_rejects_grid_mismatch() {
        let psi = linear(&[2.0, 2.0, 2.0]);
        let other = Path::new(
            vec![0.0, 0.5, 2.0],
            vec![2.0, 2.0, 2.0],
            PathKind::PiecewiseLinear,
        )
        .unwrap();
        assert!(matches!(
            lipschitz_gap(&psi, &other, 2.0),
            Err(SkorohodError::GridMismatch(1))
        ));
    }

    proptest! {
        #[test]
        fn reflection_satisfies_characterization(
            start in 1.0..4.0f64,
            steps in proptest::collection::vec(-1.0..1.0f64, 1..40),
        ) {
            let mut vals = vec![start];
            for s in &steps {
                vals.push(vals.last().unwrap() + s);
            }
            let psi = linear(&vals);
            let (phi, eta) = skorohod_reflect(&psi).unwrap();
            prop_assert!(check_reflection(&psi, &phi, &eta).is_none());
        }

        #[test]
        fn reflection_is_idempotent(
            start in 1.0..4.0f64,
            steps in proptest::collection::vec(-1.0..1.0f64, 1..40),
        ) {
            let mut vals = vec![start];
            for s in &steps {
                vals.push(vals.last().unwrap() + s);
            }
            let psi = linear(&vals);
            let (phi, _) = skorohod_reflect(&psi).unwrap();
            let (phi2, eta2) = skorohod_reflect(&phi).unwrap();
            prop_assert_eq!(phi.values(), phi2.values());
            prop_assert!(eta2.values().iter().all(|&e| e == 0.0));
        }

        #[test]
        fn map_is_monotone_in_vertical_shift(
            start in 1.0..4.0f64,
            steps in proptest::collection::vec(-1.0..1.0f64, 1..40),
            shift in 0.0..2.0f64,
        ) {
            let mut vals = vec![start];
            for s in &steps {
                vals.push(vals.last().unwrap() + s);
            }
            let shifted: Vec<f64> = vals.iter().map(|v| v + shift).collect();
            let (phi, _) = skorohod_reflect(&linear(&vals)).unwrap();
            let (phi_s, _) = skorohod_reflect(&linear(&shifted)).unwrap();
            for (a, b) in phi.values().iter().zip(phi_s.values()) {
                // one rounding of slack: the map itself is monotone
                prop_assert!(*b >= a - 1e-12);
            }
        }
    }
}
