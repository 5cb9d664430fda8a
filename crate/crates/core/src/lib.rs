//! Uplink capacity model for a single-gateway LoRa cell.
//!
//! Two engines share one [`Model`]:
//!
//! * [`analytic`] evaluates the capture-probability integrals (reception,
//!   co-SF capture, inter-SF capture) by quadrature and mixes them over the
//!   binomial law of the number of devices per spreading factor.
//! * [`simulator`] draws device positions and Rayleigh fading, applies the
//!   three SINR conditions directly and estimates the same quantities.
//!
//! The crate is `no_std` and only needs `alloc`. Float math goes through
//! `libm`; randomness through a counter-based ChaCha stream per trial.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod analytic;
pub mod binomial;
mod error;
pub mod math;
pub mod quadrature;
pub mod scenario;
pub mod simulator;

pub use error::{Error, Result};
pub use quadrature::{QuadRule, QuadratureSpec};
pub use scenario::{
    AllocationProfile, CoSfThreshold, CodingRate, InterSfKernel, J1Rule, LinkBudget, Model,
    Orthogonality, Policy, RadialSet, Region, Scenario, SfConstants, SfParams, SpreadingFactor,
    SuccessMetric, SF_COUNT, SF_TABLE,
};
