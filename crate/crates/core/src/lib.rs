//! Simulation and numerical verification of near-critical
//! catalyst-reactant branching processes with controlled immigration.
//!
//! The catalyst population branches at per-particle rate `lambda1` and is
//! instantaneously replenished to level `n` whenever it would drop below;
//! the reactant branches at a rate proportional to the catalyst's scaled
//! mass. Under near-critical scaling (offspring mean `1 + c/n`, time sped
//! up by `n`, mass scaled by `1/n`) the pair converges to a reflected
//! diffusion coupled to a catalytic Feller-type diffusion, the catalyst has
//! an explicit stationary law on `[1, inf)`, and when the catalyst runs on
//! a faster clock the reactant collapses to a one-dimensional SDE whose
//! coefficients only see the catalyst's stationary mean.
//!
//! The crate provides, module by module:
//!
//! * [`params`] — model parameterizations, derived constants, validation;
//! * [`skorohod`] — the exact reflection map at 1 on discretized paths;
//! * [`bp`] — exact event-driven simulation of the scaled lattice triple;
//! * [`sde`] — Euler-Maruyama integration with projection reflection;
//! * [`stationary`] — the explicit stationary law and the
//!   generator-orthogonality residual check;
//! * [`stats`] — empirical distances and moment estimates;
//! * [`study`] — the theorem-level Monte Carlo studies.

pub mod bp;
pub mod params;
pub mod path;
pub mod poly;
pub mod quad;
pub mod rng;
pub mod sde;
pub mod skorohod;
pub mod stationary;
pub mod stats;
pub mod study;

pub use bp::{martingale_diagnostics, occupation_sampler, simulate_pair, BpPathRecord};
pub use params::{
    family_check, near_critical_pmf, offspring_moments, validate, BranchingParams,
    DiffusionParams, OffspringPmf,
};
pub use path::{Path, PathKind};
pub use sde::{integrate_averaged, integrate_system, Noise, SdeGrid};
pub use skorohod::{lipschitz_gap, skorohod_reflect};
pub use stationary::{
    echeverria_residual, mean_m_x, test_function_library, theta, StationaryLaw, TestFunction,
};
pub use stats::{ergodic_average, ks_one_sample, ks_two_sample, wasserstein1, EmpiricalSample};
pub use study::{
    echeverria_report, study_averaging, study_diffusion_limit, study_stationary, FamilyAnchors,
    Regime, StudyReport,
};
