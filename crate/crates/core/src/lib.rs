//! Simulation and verification toolkit for quantitative stable limit
//! theorems on the Wiener space.
//!
//! The crate samples fractional Brownian motion, evaluates quadratic and
//! weighted-quadratic-variation functionals together with replicates of
//! their mixed-Gaussian limits, computes the deterministic bound machinery
//! (Faà di Bruno index sets, coefficients, distance transfers) and checks
//! convergence rates empirically.

pub mod chaos;
pub mod config;
pub mod distances;
pub mod experiments;
pub mod error;
pub mod fbm;
pub mod functionals;
pub mod malliavin;
pub mod mc;

pub use error::{Error, Result};
pub use fbm::{FbmPath, FbmSampler, Hurst, TimeGrid};
