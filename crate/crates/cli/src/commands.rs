use std::path::Path;

use serde::{Deserialize, Serialize};

use kmest_core::em::{em_fit_risk_table, EmOptions, MeasureSpec};
use kmest_core::inference::{
    band_constant_estimate, ci_pointwise_log, confidence_band, default_band_interval, z_two_sided,
    McParams,
};
use kmest_core::simulation::{BandInterval, BandSetup, TimeCoverage, EXAMPLE_BAND_MC};
use kmest_core::{
    coverage_experiment, fit, DistSpec, FitResult, Observation, SimConfig, StepFunction,
};

use crate::args::{BandConstantArgs, CoverageArgs, FitArgs, McArgs, Method};
use crate::error::CliError;
use crate::input::read_observations;
use crate::output::{fmt_f64, BandInfo, EmInfo, FitMeta, FitReport, OutputRow};

/// Largest sup-norm gap between the EM and product-limit curves that
/// `--method both` accepts.
pub const EQUIVALENCE_TOL: f64 = 1e-8;

impl McArgs {
    fn params(&self) -> McParams {
        McParams {
            paths: self.paths,
            grid_points: self.grid,
            seed: self.seed,
        }
    }
}

pub fn fit_report(args: &FitArgs) -> Result<FitReport, CliError> {
    let data = read_observations(&args.input)?;
    fit_report_from(&data, args)
}

pub fn fit_report_from(data: &[Observation], args: &FitArgs) -> Result<FitReport, CliError> {
    z_two_sided(args.alpha)?;
    let km = fit(data)?;
    let knots = km.knots().to_vec();

    let mut em_info = None;
    let mut discrepancy = None;
    let mut em_curve = None;
    if args.method != Method::ProductLimit {
        let rt = &km.risk_table;
        let options = EmOptions {
            tol: args.tol,
            max_iter: args.max_iter,
        };
        let (curve, trace) = em_fit_risk_table(rt, &options, &MeasureSpec::on_observed_times(rt))?;
        let mut values = curve.values().to_vec();
        if let Some(delta) = args.inject_em_fault {
            let m = values.len() / 2;
            let d = delta.abs();
            values[m] += if values[m] >= d { -d } else { d };
        }
        discrepancy = Some(
            values
                .iter()
                .zip(km.curve.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        );
        em_info = Some(EmInfo {
            iterations: trace.iterations,
            converged: trace.converged,
            final_sup_change: trace.final_sup_change,
            tol: args.tol,
            max_iter: args.max_iter,
        });
        em_curve = Some(values);
    }

    let display = match (args.method, em_curve) {
        (Method::Em, Some(values)) => FitResult {
            curve: StepFunction::new(knots.clone(), values)?,
            ..km.clone()
        },
        _ => km.clone(),
    };

    let mut rows: Vec<OutputRow> = knots
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let ci = ci_pointwise_log(&display, x, args.alpha).ok();
            let v = display.log_variance[k];
            OutputRow {
                x,
                estimate: display.curve.values()[k],
                ci_lo: ci.map(|c| c.0),
                ci_hi: ci.map(|c| c.1),
                band_lo: None,
                band_hi: None,
                log_variance: v.is_finite().then_some(v),
                h_hat: Some(display.h_hat[k]),
            }
        })
        .collect();

    let band = if args.band || args.band_from.is_some() || args.band_to.is_some() {
        Some(add_band(&display, args, &mut rows)?)
    } else {
        None
    };

    Ok(FitReport {
        meta: FitMeta {
            n: data.len(),
            k: knots.len(),
            events: km.risk_table.total_events(),
            method: args.method.name().into(),
            alpha: args.alpha,
            seed: args.mc.seed,
            em: em_info,
            discrepancy,
            band,
        },
        rows,
    })
}

fn add_band(fit: &FitResult, args: &FitArgs, rows: &mut [OutputRow]) -> Result<BandInfo, CliError> {
    let (x1, x2, source) = match (args.band_from, args.band_to) {
        (Some(a), Some(b)) => (a, b, "requested"),
        (from, to) => {
            let (d1, d2) = default_band_interval(fit).ok_or_else(|| {
                CliError::Numerical(
                    "no event time with finite variance; cannot place a band".into(),
                )
            })?;
            if from.is_none() && to.is_none() && d1 == d2 {
                return Err(CliError::Numerical(format!(
                    "default band interval collapses to the single time {d1}"
                )));
            }
            let source = if from.is_none() && to.is_none() {
                "default"
            } else {
                "partial-default"
            };
            (from.unwrap_or(d1), to.unwrap_or(d2), source)
        }
    };
    let band = confidence_band(fit, x1, x2, args.alpha, &args.mc.params())?;
    let knots = fit.knots();
    for b in &band.rows {
        let k = knots.partition_point(|&t| t < b.x);
        rows[k].band_lo = Some(b.lo);
        rows[k].band_hi = Some(b.hi);
    }
    let s = band.spec;
    Ok(BandInfo {
        interval: source.into(),
        x1: s.x1,
        x2: s.x2,
        c_value: s.c_value,
        h_lower: s.h_lower,
        h_upper: s.h_upper,
        paths: s.paths,
        grid_points: s.grid_points,
        seed: s.seed,
    })
}

/// Exit-3 check for `--method both`.
pub fn check_equivalence(report: &FitReport) -> Result<(), CliError> {
    match report.meta.discrepancy {
        Some(d)
            if report.meta.method == Method::Both.name() && (d.is_nan() || d > EQUIVALENCE_TOL) =>
        {
            Err(CliError::Equivalence(format!(
                "EM and product-limit estimates differ by {d:e} (tolerance {EQUIVALENCE_TOL:e})"
            )))
        }
        _ => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandConstantRow {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub paths: usize,
    pub grid_points: usize,
    pub seed: u64,
    pub value: f64,
    pub std_error: f64,
}

pub fn band_constant_row(args: &BandConstantArgs) -> Result<BandConstantRow, CliError> {
    let (a, b) = (args.a, args.b);
    if !(a > 0.0 && a <= b && b < 1.0) {
        return Err(CliError::Usage(format!(
            "need 0 < a <= b < 1, got a = {a}, b = {b}"
        )));
    }
    let mc = args.mc.params();
    let est = band_constant_estimate(a, b, args.alpha, &mc)?;
    Ok(BandConstantRow {
        a,
        b,
        alpha: args.alpha,
        paths: mc.paths,
        grid_points: mc.grid_points,
        seed: mc.seed,
        value: est.value,
        std_error: est.std_error,
    })
}

/// Study configuration as written in a TOML file; keys mirror [`SimConfig`].
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageFile {
    pub n: usize,
    pub event_dist: DistSpec,
    pub censor_dist: DistSpec,
    pub reps: usize,
    pub eval_times: Vec<f64>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub seed: u64,
    pub band: Option<BandFile>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandFile {
    #[serde(default = "data_driven")]
    pub interval: BandInterval,
    pub paths: Option<usize>,
    pub grid_points: Option<usize>,
    pub seed: Option<u64>,
}

fn default_alpha() -> f64 {
    0.05
}

fn data_driven() -> BandInterval {
    BandInterval::DataDriven
}

impl CoverageFile {
    pub fn into_config(self) -> Result<SimConfig, CliError> {
        let band = self.band.map(|b| BandSetup {
            interval: b.interval,
            mc: McParams {
                paths: b.paths.unwrap_or(EXAMPLE_BAND_MC.paths),
                grid_points: b.grid_points.unwrap_or(EXAMPLE_BAND_MC.grid_points),
                seed: b.seed.unwrap_or(EXAMPLE_BAND_MC.seed),
            },
        });
        Ok(SimConfig {
            n: self.n,
            event_dist: self.event_dist.validated()?,
            censor_dist: self.censor_dist.validated()?,
            reps: self.reps,
            eval_times: self.eval_times,
            alpha: self.alpha,
            seed: self.seed,
            band,
        })
    }
}

pub fn load_coverage_file(path: &Path) -> Result<SimConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let file: CoverageFile = toml::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))?;
    file.into_config()
}

pub fn coverage_config(args: &CoverageArgs) -> Result<SimConfig, CliError> {
    let mut cfg = match (args.example, &args.config) {
        (Some(1), None) => SimConfig::example1(1),
        (Some(2), None) => SimConfig::example2(1),
        (None, Some(path)) => load_coverage_file(path)?,
        _ => {
            return Err(CliError::Usage(
                "give exactly one of --example 1|2 or --config <file>".into(),
            ))
        }
    };
    if let Some(reps) = args.reps {
        cfg.reps = reps;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(alpha) = args.alpha {
        cfg.alpha = alpha;
    }
    if args.no_band {
        cfg.band = None;
    }
    if let Some(band) = cfg.band.as_mut() {
        if let Some(paths) = args.paths {
            band.mc.paths = paths;
        }
        if let Some(grid) = args.grid {
            band.mc.grid_points = grid;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageMeta {
    pub n: usize,
    pub reps: usize,
    pub alpha: f64,
    pub seed: u64,
    pub event_dist: DistSpec,
    pub censor_dist: DistSpec,
    pub band_coverage: Option<f64>,
    pub band_failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageOutput {
    pub meta: CoverageMeta,
    pub rows: Vec<TimeCoverage>,
}

impl CoverageOutput {
    pub fn footer(&self) -> Vec<(String, String)> {
        let m = &self.meta;
        let mut kv = vec![
            ("n".to_string(), m.n.to_string()),
            ("reps".into(), m.reps.to_string()),
            ("alpha".into(), fmt_f64(m.alpha)),
            ("seed".into(), m.seed.to_string()),
        ];
        if let Some(c) = m.band_coverage {
            kv.push(("band_coverage".into(), fmt_f64(c)));
            kv.push(("band_failures".into(), m.band_failures.to_string()));
        }
        kv
    }
}

pub fn coverage_output(args: &CoverageArgs) -> Result<CoverageOutput, CliError> {
    let cfg = coverage_config(args)?;
    let report = coverage_experiment(&cfg)?;
    Ok(CoverageOutput {
        meta: CoverageMeta {
            n: cfg.n,
            reps: report.reps,
            alpha: cfg.alpha,
            seed: cfg.seed,
            event_dist: cfg.event_dist,
            censor_dist: cfg.censor_dist,
            band_coverage: report.band_coverage,
            band_failures: report.band_failures,
        },
        rows: report.per_time,
    })
}
