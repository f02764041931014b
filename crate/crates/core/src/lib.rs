//! Kaplan-Meier estimation for right-censored data, computed two ways.
//!
//! [`product_limit`] is the classic product-limit estimator together with the
//! log-scale variance estimate `v̂` and the transform `Ĥ = v̂ / (1 + v̂)`.
//! [`em`] reaches the same curve as the fixed point of an EM iteration that
//! maximises a quadratic M-function, and exposes the M-function itself so the
//! iteration can be audited. [`inference`] builds pointwise log-scale
//! confidence intervals and simultaneous bands calibrated by simulating the
//! supremum of a Brownian bridge, and [`simulation`] runs seeded coverage
//! studies on synthetic exponential/Weibull data.

pub mod em;
mod error;
pub mod inference;
pub mod product_limit;
pub mod seeding;
pub mod simulation;
pub mod types;

pub use em::{em_fit, em_update, EmOptions, EmTrace, MeasureSpec};
pub use error::{Error, Result};
pub use inference::{
    band_constant, bridge_sup_tail, ci_pointwise_log, confidence_band, Band, BandSpec, McParams,
};
pub use product_limit::{fit, km_estimate, FitResult};
pub use simulation::{coverage_experiment, CoverageReport, DistSpec, SimConfig};
pub use types::{build_risk_table, Observation, RiskTable, StepFunction};
