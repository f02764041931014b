//! Synthetic censored data and seeded coverage studies.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{ci_pointwise_log, confidence_band, default_band_interval, McParams};
use crate::product_limit::fit;
use crate::seeding::{child_rng, derive_seed};
use crate::types::Observation;

/// Event or censoring distribution. Weibull is parameterised as
/// `(shape, scale)` with survival `exp(−(x/scale)^shape)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum DistSpec {
    Exponential { rate: f64 },
    Weibull { shape: f64, scale: f64 },
}

impl DistSpec {
    pub fn exponential(rate: f64) -> Result<Self> {
        Self::Exponential { rate }.validated()
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        Self::Weibull { shape, scale }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        let valid = match self {
            Self::Exponential { rate } => ok(rate),
            Self::Weibull { shape, scale } => ok(shape) && ok(scale),
        };
        if valid {
            Ok(self)
        } else {
            Err(Error::InvalidParameter(format!(
                "distribution parameters must be positive: {self:?}"
            )))
        }
    }

    /// Inverse survival function: the variate produced by uniform `u ∈ (0, 1]`.
    pub fn quantile_from_uniform(&self, u: f64) -> f64 {
        let e = -u.ln();
        match *self {
            Self::Exponential { rate } => e / rate,
            Self::Weibull { shape, scale } => scale * e.powf(1.0 / shape),
        }
    }

    pub fn survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        match *self {
            Self::Exponential { rate } => (-rate * x).exp(),
            Self::Weibull { shape, scale } => (-(x / scale).powf(shape)).exp(),
        }
    }
}

pub fn sample_dist<R: Rng + ?Sized>(spec: &DistSpec, rng: &mut R) -> f64 {
    // 1 − U lies in (0, 1], keeping ln finite
    let u = 1.0 - rng.random::<f64>();
    spec.quantile_from_uniform(u)
}

pub fn true_survival(spec: &DistSpec, x: f64) -> f64 {
    spec.survival(x)
}

/// `n` independent records `(min(T, C), T < C)`.
pub fn gen_dataset<R: Rng + ?Sized>(
    n: usize,
    event_dist: &DistSpec,
    censor_dist: &DistSpec,
    rng: &mut R,
) -> Vec<Observation> {
    (0..n)
        .map(|_| {
            let t = sample_dist(event_dist, rng);
            let c = sample_dist(censor_dist, rng);
            Observation::new(t.min(c), t < c).expect("positive finite draw")
        })
        .collect()
}

/// Where the band of each replication is placed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BandInterval {
    /// First event time through the last knot with finite variance, per fit.
    DataDriven,
    Fixed {
        x1: f64,
        x2: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandSetup {
    pub interval: BandInterval,
    pub mc: McParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub event_dist: DistSpec,
    pub censor_dist: DistSpec,
    pub reps: usize,
    pub eval_times: Vec<f64>,
    pub alpha: f64,
    pub seed: u64,
    pub band: Option<BandSetup>,
}

/// Monte Carlo budget used for per-replication bands in the built-in
/// examples; one calibration per replication makes the full default too slow.
pub const EXAMPLE_BAND_MC: McParams = McParams {
    paths: 10_000,
    grid_points: 1024,
    seed: 0,
};

impl SimConfig {
    /// n = 200, event ~ Exp(1/3), censoring ~ Exp(1/6), times 1..7.
    pub fn example1(seed: u64) -> Self {
        Self {
            n: 200,
            event_dist: DistSpec::Exponential { rate: 1.0 / 3.0 },
            censor_dist: DistSpec::Exponential { rate: 1.0 / 6.0 },
            reps: 100,
            eval_times: (1..=7).map(f64::from).collect(),
            alpha: 0.05,
            seed,
            band: Some(BandSetup {
                interval: BandInterval::DataDriven,
                mc: EXAMPLE_BAND_MC,
            }),
        }
    }

    /// n = 500, event ~ Weibull(1, 1), censoring ~ Weibull(1, 2), times 0.1..1.5.
    pub fn example2(seed: u64) -> Self {
        Self {
            n: 500,
            event_dist: DistSpec::Weibull {
                shape: 1.0,
                scale: 1.0,
            },
            censor_dist: DistSpec::Weibull {
                shape: 1.0,
                scale: 2.0,
            },
            reps: 100,
            eval_times: (0..8).map(|i| (1 + 2 * i) as f64 / 10.0).collect(),
            alpha: 0.05,
            seed,
            band: Some(BandSetup {
                interval: BandInterval::DataDriven,
                mc: EXAMPLE_BAND_MC,
            }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if self.reps == 0 {
            return bad("reps must be positive".into());
        }
        self.event_dist.validated()?;
        self.censor_dist.validated()?;
        if self.eval_times.is_empty()
            || self.eval_times.iter().any(|t| !(t.is_finite() && *t > 0.0))
            || self.eval_times.windows(2).any(|w| w[0] >= w[1])
        {
            return bad("eval_times must be positive and strictly increasing".into());
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha must lie in (0, 1], got {}", self.alpha));
        }
        if let Some(BandSetup {
            interval: BandInterval::Fixed { x1, x2 },
            ..
        }) = self.band
        {
            if !(x1 > 0.0 && x1 < x2) {
                return bad(format!(
                    "band interval must satisfy 0 < x1 < x2, got [{x1}, {x2}]"
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeCoverage {
    pub time: f64,
    pub coverage: f64,
    /// Mean interval length over replications where the interval exists.
    pub mean_ci_length: f64,
    /// Replications whose interval was undefined (counted as not covering).
    pub undefined: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub reps: usize,
    pub per_time: Vec<TimeCoverage>,
    pub band_coverage: Option<f64>,
    /// Replications where no band could be formed (counted as not covering).
    pub band_failures: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BandOutcome {
    Covered,
    Missed,
    Undefined,
}

struct RepOutcome {
    ci: Vec<Option<(bool, f64)>>,
    band: Option<BandOutcome>,
}

fn run_replication(cfg: &SimConfig, rep: usize) -> RepOutcome {
    let mut rng = child_rng(cfg.seed, rep as u64);
    let data = gen_dataset(cfg.n, &cfg.event_dist, &cfg.censor_dist, &mut rng);
    let fitted = fit(&data).expect("simulated data are valid");

    let ci = cfg
        .eval_times
        .iter()
        .map(|&t| {
            ci_pointwise_log(&fitted, t, cfg.alpha)
                .ok()
                .map(|(lo, hi)| {
                    let truth = cfg.event_dist.survival(t);
                    (lo <= truth && truth <= hi, hi - lo)
                })
        })
        .collect();

    let band = cfg.band.as_ref().map(|setup| {
        let interval = match setup.interval {
            BandInterval::Fixed { x1, x2 } => Some((x1, x2)),
            BandInterval::DataDriven => default_band_interval(&fitted),
        };
        let mc = McParams {
            seed: derive_seed(setup.mc.seed ^ cfg.seed, rep as u64),
            ..setup.mc
        };
        match interval.and_then(|(x1, x2)| confidence_band(&fitted, x1, x2, cfg.alpha, &mc).ok()) {
            None => BandOutcome::Undefined,
            Some(band) => {
                let inside = band.rows.iter().all(|row| {
                    let truth = cfg.event_dist.survival(row.x);
                    row.lo <= truth && truth <= row.hi
                });
                if inside {
                    BandOutcome::Covered
                } else {
                    BandOutcome::Missed
                }
            }
        }
    });

    RepOutcome { ci, band }
}

/// Run `cfg.reps` independent replications and aggregate coverage and mean
/// interval length at each evaluation time.
///
/// Replication `r` draws from a generator keyed by `(cfg.seed, r)`, so the
/// report does not depend on how replications are scheduled.
pub fn coverage_experiment(cfg: &SimConfig) -> Result<CoverageReport> {
    cfg.validate()?;
    let outcomes: Vec<RepOutcome> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| run_replication(cfg, rep))
        .collect();

    let reps = cfg.reps as f64;
    let per_time = cfg
        .eval_times
        .iter()
        .enumerate()
        .map(|(i, &time)| {
            let mut covered = 0usize;
            let mut undefined = 0usize;
            let mut length_sum = 0.0;
            for out in &outcomes {
                match out.ci[i] {
                    Some((hit, len)) => {
                        covered += hit as usize;
                        length_sum += len;
                    }
                    None => undefined += 1,
                }
            }
            let defined = cfg.reps - undefined;
            TimeCoverage {
                time,
                coverage: covered as f64 / reps,
                mean_ci_length: if defined > 0 {
                    length_sum / defined as f64
                } else {
                    f64::NAN
                },
                undefined,
            }
        })
        .collect();

    let (band_coverage, band_failures) = if cfg.band.is_some() {
        let count = |want| outcomes.iter().filter(|o| o.band == Some(want)).count();
        (
            Some(count(BandOutcome::Covered) as f64 / reps),
            count(BandOutcome::Undefined),
        )
    } else {
        (None, 0)
    };

    Ok(CoverageReport {
        reps: cfg.reps,
        per_time,
        band_coverage,
        band_failures,
    })
}
