//! Pointwise log-scale confidence intervals and simultaneous confidence bands.
//!
//! On the log scale `√n (log Ŝ − log S₀)` behaves like `B⁰(H(x)) / (1 − H(x))`
//! for a standard Brownian bridge `B⁰`, so a band over `[x1, x2]` needs the
//! `(1 − α)` quantile of `sup_{[a, b]} |B⁰|` with `a = Ĥ(x1)`, `b = Ĥ(x2)`.
//! That quantile has no closed form on a general sub-interval; it is
//! calibrated here by seeded Monte Carlo, with the Kolmogorov series covering
//! the full-interval limit as an independent check.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::product_limit::FitResult;
use crate::seeding::child_rng;

/// Monte Carlo settings for calibrating the band constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McParams {
    pub paths: usize,
    pub grid_points: usize,
    pub seed: u64,
}

impl Default for McParams {
    fn default() -> Self {
        Self {
            paths: 200_000,
            grid_points: 2048,
            seed: 1,
        }
    }
}

/// Everything needed to reproduce a band.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSpec {
    /// Band ends after snapping inward to knots of the fit.
    pub x1: f64,
    pub x2: f64,
    pub alpha: f64,
    /// `c_α(Ĥ(x1), Ĥ(x2))`.
    pub c_value: f64,
    pub h_lower: f64,
    pub h_upper: f64,
    pub paths: usize,
    pub grid_points: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandRow {
    pub x: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub spec: BandSpec,
    pub rows: Vec<BandRow>,
}

/// Monte Carlo estimate of a band constant with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandConstant {
    pub value: f64,
    pub std_error: f64,
}

/// Upper `α/2` standard normal quantile; 0 at `α = 1`.
pub fn z_two_sided(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    if alpha == 1.0 {
        return Ok(0.0);
    }
    Ok(Normal::standard().inverse_cdf(1.0 - alpha / 2.0))
}

/// Log-transformed pointwise interval
/// `[Ŝ e^{−z √(v̂/n)}, min(1, Ŝ e^{z √(v̂/n)})]`.
pub fn ci_pointwise_log(fit: &FitResult, x: f64, alpha: f64) -> Result<(f64, f64)> {
    let z = z_two_sided(alpha)?;
    let s = fit.estimate_at(x)?;
    let v = fit.log_variance_at_time(x)?;
    if !v.is_finite() || s <= 0.0 {
        return Err(Error::CiUndefined(x));
    }
    let half = z * (v / fit.n as f64).sqrt();
    let lo = (s * (-half).exp()).clamp(0.0, 1.0);
    let hi = (s * half.exp()).min(1.0);
    Ok((lo, hi))
}

/// `P(sup_{[0,1]} |B⁰| > c)`, the Kolmogorov tail.
///
/// Uses `2 Σ (−1)^{k+1} e^{−2k²c²}` for `c ≥ 1` and the dual theta-function
/// form `1 − (√(2π)/c) Σ e^{−(2k−1)²π²/(8c²)}` below that, where the
/// alternating series converges slowly. Terms are summed until they drop
/// below 1e-12.
pub fn bridge_sup_tail(c: f64) -> f64 {
    const EPS: f64 = 1e-12;
    if c.is_nan() || c <= 0.0 {
        return 1.0;
    }
    if c >= 1.0 {
        let mut sum = 0.0;
        for k in 1..=100 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * c * c).exp();
            sum += if k % 2 == 1 { term } else { -term };
            if term < EPS {
                break;
            }
        }
        (2.0 * sum).clamp(0.0, 1.0)
    } else {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let mut sum = 0.0;
        for k in 1..=100 {
            let odd = (2 * k - 1) as f64;
            let term = (-odd * odd * pi2 / (8.0 * c * c)).exp();
            sum += term;
            if term < EPS {
                break;
            }
        }
        let cdf = (2.0 * std::f64::consts::PI).sqrt() / c * sum;
        (1.0 - cdf).clamp(0.0, 1.0)
    }
}

/// Solve `bridge_sup_tail(c) = alpha` by bisection.
pub fn kolmogorov_quantile(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let (mut lo, mut hi) = (1e-3, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if bridge_sup_tail(mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `c_α(a, b)`: the `(1 − α)` quantile of `sup_{[a,b]} |B⁰|`.
pub fn band_constant(
    a: f64,
    b: f64,
    alpha: f64,
    paths: usize,
    grid_points: usize,
    seed: u64,
) -> Result<f64> {
    band_constant_estimate(
        a,
        b,
        alpha,
        &McParams {
            paths,
            grid_points,
            seed,
        },
    )
    .map(|c| c.value)
}

/// Band constant plus an order-statistic standard error.
///
/// Each path is a Brownian motion sampled on the nodes `i / (grid_points − 1)`
/// that fall inside `[a, b]`, plus `a` and `b` themselves, and at 1; the
/// transform `B⁰(t) = W(t) − t W(1)` turns it into a bridge. Grid nodes
/// outside `[a, b]` never enter the supremum, so they are not simulated.
/// Path `i` draws from its own generator keyed by `(seed, i)`.
///
/// `a == b` is the single-coordinate case `B⁰(a) ~ N(0, a(1 − a))`, solved
/// exactly.
pub fn band_constant_estimate(a: f64, b: f64, alpha: f64, mc: &McParams) -> Result<BandConstant> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    if !(a > 0.0 && b < 1.0 && a <= b) {
        return Err(Error::InvalidParameter(format!(
            "band interval must satisfy 0 < a <= b < 1, got a = {a}, b = {b}"
        )));
    }
    if a == b {
        let value = z_two_sided(alpha)? * (a * (1.0 - a)).sqrt();
        return Ok(BandConstant {
            value,
            std_error: 0.0,
        });
    }
    if mc.paths == 0 || mc.grid_points < 2 {
        return Err(Error::InvalidParameter(format!(
            "need paths >= 1 and grid_points >= 2, got {} and {}",
            mc.paths, mc.grid_points
        )));
    }

    let nodes = bridge_nodes(a, b, mc.grid_points);
    let mut steps = Vec::with_capacity(nodes.len());
    let mut prev = 0.0;
    for &t in &nodes {
        steps.push((t - prev).sqrt());
        prev = t;
    }
    let tail_sd = (1.0 - b).sqrt();

    let mut sups: Vec<f64> = (0..mc.paths)
        .into_par_iter()
        .map_init(
            || vec![0.0; nodes.len()],
            |walk, i| {
                let mut rng = child_rng(mc.seed, i as u64);
                let mut w = 0.0;
                for (slot, sd) in walk.iter_mut().zip(&steps) {
                    let z: f64 = rng.sample(StandardNormal);
                    w += sd * z;
                    *slot = w;
                }
                let z: f64 = rng.sample(StandardNormal);
                let w1 = w + tail_sd * z;
                walk.iter()
                    .zip(&nodes)
                    .map(|(w, t)| (w - t * w1).abs())
                    .fold(0.0, f64::max)
            },
        )
        .collect();
    sups.sort_unstable_by(f64::total_cmp);

    let n = sups.len();
    let q = 1.0 - alpha;
    let idx = |p: f64| (((p * n as f64).ceil() as usize).max(1) - 1).min(n - 1);
    let value = sups[idx(q)];
    let spread = (q * alpha / n as f64).sqrt();
    let std_error = 0.5 * (sups[idx((q + spread).min(1.0))] - sups[idx((q - spread).max(0.0))]);
    Ok(BandConstant { value, std_error })
}

fn bridge_nodes(a: f64, b: f64, grid_points: usize) -> Vec<f64> {
    let step = 1.0 / (grid_points - 1) as f64;
    let mut nodes = vec![a];
    nodes.extend(
        (0..grid_points)
            .map(|i| i as f64 * step)
            .filter(|&t| t > a && t < b),
    );
    nodes.push(b);
    nodes
}

/// Default band range: the first event time through the last knot with a
/// finite variance estimate.
pub fn default_band_interval(fit: &FitResult) -> Option<(f64, f64)> {
    let rt = &fit.risk_table;
    let first_event = (0..rt.len()).find(|&k| rt.event_count()[k] > 0)?;
    let last_finite = (0..rt.len()).rev().find(|&k| fit.h_hat[k] < 1.0)?;
    if last_finite < first_event {
        return None;
    }
    Some((rt.times()[first_event], rt.times()[last_finite]))
}

/// Simultaneous `(1 − α)` band
/// `Ŝ(x) exp(∓ c_α(Ĥ(x1), Ĥ(x2)) / (√n (1 − Ĥ(x))))` at every knot in
/// `[x1, x2]`, with the interval snapped inward to knots.
pub fn confidence_band(
    fit: &FitResult,
    x1: f64,
    x2: f64,
    alpha: f64,
    mc: &McParams,
) -> Result<Band> {
    if !(x1 > 0.0 && x1 < x2 && x2.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "band interval must satisfy 0 < x1 < x2, got [{x1}, {x2}]"
        )));
    }
    let knots = fit.knots();
    let k1 = knots.partition_point(|&t| t < x1);
    let k2 = match knots.partition_point(|&t| t <= x2).checked_sub(1) {
        Some(k) if k >= k1 => k,
        _ => return Err(Error::EmptyBandInterval(x1, x2)),
    };
    if let Some(k) = (k1..=k2).find(|&k| fit.h_hat[k] >= 1.0) {
        return Err(Error::BandDiverges(knots[k]));
    }
    let (a, b) = (fit.h_hat[k1], fit.h_hat[k2]);
    if a <= 0.0 {
        return Err(Error::BandStartsAtZero(knots[k1]));
    }

    let c = band_constant_estimate(a, b, alpha, mc)?.value;
    let root_n = (fit.n as f64).sqrt();
    let rows = (k1..=k2)
        .map(|k| {
            let s = fit.curve.values()[k];
            let w = c / (root_n * (1.0 - fit.h_hat[k]));
            BandRow {
                x: knots[k],
                lo: (s * (-w).exp()).clamp(0.0, 1.0),
                hi: (s * w.exp()).min(1.0),
            }
        })
        .collect();

    Ok(Band {
        spec: BandSpec {
            x1: knots[k1],
            x2: knots[k2],
            alpha,
            c_value: c,
            h_lower: a,
            h_upper: b,
            paths: mc.paths,
            grid_points: mc.grid_points,
            seed: mc.seed,
        },
        rows,
    })
}
