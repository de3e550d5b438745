//! Scaled and adaptive scaled gradient methods for convex objectives whose
//! gradients are locally Hölder continuous, with estimators and checkers for
//! the smoothness, strong-convexity and KL properties the methods rely on,
//! rate and complexity bounds, and a batch experiment harness.

// `!(x > 0.0)` style guards are deliberate: NaN must fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adasga;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod problems;
pub mod rates;
pub mod rng;
pub mod sga;
pub mod smoothness;
pub mod trace;

pub use adasga::{run_adasga, AdaConfig, Alpha0, GammaPolicy};
pub use error::{Error, Result};
pub use problems::{GroundTruth, LogSumExp, Objective, Poisson, PowerNorm, Quadratic, Region};
pub use rates::{verify_bounds, Claim, RateConstants, RateReport};
pub use sga::{run_sga, SgaConfig, StepPolicy};
pub use trace::{Status, StopRule, Trace, TraceRecord};
