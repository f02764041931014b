//! Product-limit (Kaplan-Meier) estimator and its log-scale variance.

use crate::error::{Error, Result};
use crate::types::{build_risk_table, Observation, RiskTable, StepFunction};

/// A fitted survival curve with per-knot variance diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub curve: StepFunction,
    /// `v̂` at each knot: the estimated asymptotic variance of
    /// `√n (log Ŝ − log S₀)`. `+∞` once the trailing risk set empties.
    pub log_variance: Vec<f64>,
    /// `Ĥ = v̂ / (1 + v̂)` at each knot, 1 where `v̂` is infinite.
    pub h_hat: Vec<f64>,
    pub n: usize,
    pub risk_table: RiskTable,
}

impl FitResult {
    pub fn knots(&self) -> &[f64] {
        self.curve.knots()
    }

    pub fn estimate_at(&self, x: f64) -> Result<f64> {
        self.curve.eval(x)
    }

    /// `v̂(x)`, zero before the first knot.
    pub fn log_variance_at_time(&self, x: f64) -> Result<f64> {
        self.step_lookup(x, &self.log_variance, 0.0)
    }

    /// `Ĥ(x)`, zero before the first knot.
    pub fn h_hat_at_time(&self, x: f64) -> Result<f64> {
        self.step_lookup(x, &self.h_hat, 0.0)
    }

    fn step_lookup(&self, x: f64, per_knot: &[f64], before: f64) -> Result<f64> {
        if x < 0.0 || x.is_nan() {
            return Err(Error::NegativeTime(x));
        }
        Ok(match self.risk_table.knot_index(x) {
            Some(k) => per_knot[k],
            None => before,
        })
    }
}

/// `Ŝ(X_(k)) = Π_{j≤k} (1 − d_j / R_j)`.
pub fn km_estimate(rt: &RiskTable) -> StepFunction {
    let mut surv = 1.0;
    let values: Vec<f64> = rt
        .event_count()
        .iter()
        .zip(rt.at_risk())
        .map(|(&d, &r)| {
            surv *= 1.0 - d as f64 / r as f64;
            surv
        })
        .collect();
    StepFunction::new(rt.times().to_vec(), values).expect("product-limit curve is a valid step")
}

/// Cumulative `v̂` at every knot:
/// `Σ_{j≤k} n·d_j / (R_j · (R_j − n_j))`, where `R_j − n_j` is the number of
/// records strictly after `X_(j)`. An event knot with nothing after it makes
/// the sum `+∞` from there on.
pub fn log_variance(rt: &RiskTable) -> Vec<f64> {
    let n = rt.total() as f64;
    let mut acc = 0.0;
    (0..rt.len())
        .map(|j| {
            let d = rt.event_count()[j];
            if d > 0 {
                let r = rt.at_risk()[j];
                let after = r - rt.tie_count()[j];
                acc += if after == 0 {
                    f64::INFINITY
                } else {
                    n * d as f64 / (r as f64 * after as f64)
                };
            }
            acc
        })
        .collect()
}

pub fn log_variance_at(rt: &RiskTable, k: usize) -> Result<f64> {
    if k >= rt.len() {
        return Err(Error::KnotOutOfRange {
            index: k,
            len: rt.len(),
        });
    }
    Ok(log_variance(rt)[k])
}

/// `Ĥ = Â / (1 + Â)`, mapping `[0, ∞]` onto `[0, 1]`.
pub fn h_from_log_variance(a: f64) -> f64 {
    if a.is_infinite() {
        1.0
    } else {
        a / (1.0 + a)
    }
}

pub fn h_hat_at(rt: &RiskTable, k: usize) -> Result<f64> {
    log_variance_at(rt, k).map(h_from_log_variance)
}

pub fn fit(data: &[Observation]) -> Result<FitResult> {
    let rt = build_risk_table(data)?;
    Ok(fit_risk_table(rt))
}

pub fn fit_risk_table(rt: RiskTable) -> FitResult {
    let curve = km_estimate(&rt);
    let log_variance = log_variance(&rt);
    let h_hat = log_variance
        .iter()
        .copied()
        .map(h_from_log_variance)
        .collect();
    FitResult {
        curve,
        log_variance,
        h_hat,
        n: rt.total(),
        risk_table: rt,
    }
}
