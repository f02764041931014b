//! The Kaplan-Meier curve as the fixed point of an EM iteration.
//!
//! With the quadratic M-function `m_S(X) = ∫ −(I{X>x} − S(x))² dμ(x)` the
//! E-step replaces each censored indicator by the conditional survival ratio
//! `S_g(max{x, X}) / S_g(X)`, and the M-step is the pointwise mean of the
//! resulting "pseudo-indicators":
//!
//! ```text
//! S_{g+1}(x) = (1/n) Σ_k [ d_k I{X_(k) > x} + c_k S_g(max{x, X_(k)}) / S_g(X_(k)) ]
//! ```
//!
//! where `d_k`/`c_k` are the event/censored counts tied at `X_(k)`. Iterates
//! only change at the knots of the risk table, so they are stored there.

use crate::error::{Error, Result};
use crate::types::{build_risk_table, Observation, RiskTable, StepFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureKind {
    /// Equal mass on each support atom.
    DiscreteUniform,
}

/// The integrating measure `μ` of the M-function.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpec {
    kind: MeasureKind,
    support: Vec<f64>,
}

impl MeasureSpec {
    pub fn discrete_uniform(support: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidMeasure("support is empty".into()));
        }
        if support.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::InvalidMeasure(
                "atoms must be positive and finite".into(),
            ));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidMeasure(
                "support must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            kind: MeasureKind::DiscreteUniform,
            support,
        })
    }

    /// Default measure: uniform on the distinct observed times.
    pub fn on_observed_times(rt: &RiskTable) -> Self {
        Self::discrete_uniform(rt.times().to_vec()).expect("risk-table times are valid atoms")
    }

    pub fn kind(&self) -> MeasureKind {
        self.kind
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    /// `(atom, mass)` pairs.
    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let w = match self.kind {
            MeasureKind::DiscreteUniform => 1.0 / self.support.len() as f64,
        };
        self.support.iter().map(move |&x| (x, w))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmOptions {
    /// Stop once the sup-norm change over knots drops below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EmOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmTrace {
    /// Number of EM updates applied.
    pub iterations: usize,
    /// `M̃_n` of the starting curve followed by `M̃_n` after each update.
    pub objective_path: Vec<f64>,
    pub final_sup_change: f64,
    pub converged: bool,
}

/// Observed-data M-function `M̃_n(S)`.
///
/// Events contribute `∫ −I{X>x} + 2S(x)I{X>x} − S(x)² dμ`; a record censored
/// at `X` contributes the same integrand over atoms `x < X` only, where the
/// indicator is 1.
pub fn m_tilde(s: &StepFunction, data: &[Observation], mu: &MeasureSpec) -> Result<f64> {
    let rt = build_risk_table(data)?;
    m_tilde_grouped(s, &rt, mu)
}

/// `M̃_n` evaluated from risk-table counts instead of individual records.
pub fn m_tilde_grouped(s: &StepFunction, rt: &RiskTable, mu: &MeasureSpec) -> Result<f64> {
    let total_events = rt.total_events() as f64;
    let mut acc = 0.0;
    for (x, w) in mu.atoms() {
        let sx = s.eval(x)?;
        // records strictly after x, split by status
        let (events_after, censored_after) = match rt.knot_index(x) {
            Some(k) => suffix_counts(rt, k + 1),
            None => suffix_counts(rt, 0),
        };
        let e = events_after as f64;
        let c = censored_after as f64;
        acc += w * (-e + 2.0 * sx * e - sx * sx * total_events - c * (1.0 - sx).powi(2));
    }
    Ok(acc / rt.total() as f64)
}

fn suffix_counts(rt: &RiskTable, from: usize) -> (usize, usize) {
    (from..rt.len()).fold((0, 0), |(e, c), k| {
        (e + rt.event_count()[k], c + rt.censored_count(k))
    })
}

/// Conditional expectation `E[M_n(S) | S_g]` of the complete-data M-function.
pub fn e_step_objective(
    s: &StepFunction,
    s_g: &StepFunction,
    rt: &RiskTable,
    mu: &MeasureSpec,
) -> Result<f64> {
    let mut acc = 0.0;
    for (k, &xk) in rt.times().iter().enumerate() {
        let d = rt.event_count()[k] as f64;
        let c = rt.censored_count(k) as f64;
        let base = if c > 0.0 {
            let v = s_g.eval(xk)?;
            if v <= 0.0 {
                return Err(Error::EmRatioUndefined(xk));
            }
            v
        } else {
            1.0
        };
        for (x, w) in mu.atoms() {
            let sx = s.eval(x)?;
            if d > 0.0 {
                let ind = if xk > x { 1.0 } else { 0.0 };
                acc += w * d * (-ind + 2.0 * sx * ind - sx * sx);
            }
            if c > 0.0 {
                let ratio = s_g.eval(x.max(xk))? / base;
                acc += w * c * (-ratio + 2.0 * sx * ratio - sx * sx);
            }
        }
    }
    Ok(acc / rt.total() as f64)
}

/// Starting curve `(#{X_i > x} + 1) / (n + 1)`: nonincreasing, 1 at 0, flat
/// after the last knot and strictly positive, so every E-step ratio exists.
pub fn initial_estimate(rt: &RiskTable) -> StepFunction {
    let n = rt.total() as f64;
    let values = rt
        .at_risk()
        .iter()
        .zip(rt.tie_count())
        .map(|(&r, &ties)| ((r - ties) as f64 + 1.0) / (n + 1.0))
        .collect();
    StepFunction::new(rt.times().to_vec(), values).expect("initial curve is a valid step")
}

/// One closed-form EM update, evaluated at the knots of `rt`.
///
/// At knot `j` every record after `X_(j)` contributes 1, censored records tied
/// at `X_(j)` contribute 1, and earlier censored records contribute
/// `S(X_(j)) / S(X_(k))`, which collapses the double sum to a running total.
pub fn em_update(prev: &StepFunction, rt: &RiskTable) -> Result<StepFunction> {
    let n = rt.total() as f64;
    let prev_at: Vec<f64> = rt
        .times()
        .iter()
        .map(|&x| prev.eval(x))
        .collect::<Result<_>>()?;

    let mut earlier_censored = 0.0; // Σ_{k<j} c_k / S(X_(k))
    let mut floor = 1.0_f64;
    let mut values = Vec::with_capacity(rt.len());
    for (j, &x) in rt.times().iter().enumerate() {
        let c = rt.censored_count(j);
        if c > 0 && prev_at[j] <= 0.0 {
            return Err(Error::EmRatioUndefined(x));
        }
        let after = (rt.at_risk()[j] - rt.tie_count()[j]) as f64;
        let raw = (after + c as f64 + prev_at[j] * earlier_censored) / n;
        // running min strips rounding-level upticks; the exact update is monotone
        floor = floor.min(raw.clamp(0.0, 1.0));
        values.push(floor);
        if c > 0 {
            earlier_censored += c as f64 / prev_at[j];
        }
    }
    StepFunction::new(rt.times().to_vec(), values)
}

pub fn em_fit(data: &[Observation], options: &EmOptions) -> Result<(StepFunction, EmTrace)> {
    let rt = build_risk_table(data)?;
    let mu = MeasureSpec::on_observed_times(&rt);
    em_fit_risk_table(&rt, options, &mu)
}

/// EM fit with an explicit integrating measure for the recorded objective path.
pub fn em_fit_with_measure(
    data: &[Observation],
    options: &EmOptions,
    mu: &MeasureSpec,
) -> Result<(StepFunction, EmTrace)> {
    let rt = build_risk_table(data)?;
    em_fit_risk_table(&rt, options, mu)
}

pub fn em_fit_risk_table(
    rt: &RiskTable,
    options: &EmOptions,
    mu: &MeasureSpec,
) -> Result<(StepFunction, EmTrace)> {
    if !(options.tol > 0.0 && options.tol.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive, got {}",
            options.tol
        )));
    }
    if options.max_iter == 0 {
        return Err(Error::InvalidParameter(
            "max_iter must be at least 1".into(),
        ));
    }

    let mut current = initial_estimate(rt);
    let mut objective_path = vec![m_tilde_grouped(&current, rt, mu)?];
    let mut iterations = 0;
    let mut change = f64::INFINITY;
    let mut converged = false;

    while iterations < options.max_iter {
        let next = em_update(&current, rt)?;
        iterations += 1;
        change = next.sup_distance(&current);
        objective_path.push(m_tilde_grouped(&next, rt, mu)?);
        current = next;
        // without censoring the update ignores its input: one step is exact
        if change < options.tol || !rt.has_censoring() {
            converged = true;
            break;
        }
    }

    Ok((
        current,
        EmTrace {
            iterations,
            objective_path,
            final_sup_change: change,
            converged,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::product_limit::km_estimate;
    use crate::types::observations;

    fn five_point() -> Vec<Observation> {
        observations(
            &[1.0, 2.0, 3.0, 4.0, 5.0],
            &[true, false, true, false, true],
        )
        .unwrap()
    }

    #[test]
    fn update_no_censoring_ignores_input() {
        let data = observations(&[1.0, 2.0, 3.0, 4.0], &[true; 4]).unwrap();
        let rt = build_risk_table(&data).unwrap();
        let a = em_update(&StepFunction::constant_one(rt.times()).unwrap(), &rt).unwrap();
        let b = em_update(&initial_estimate(&rt), &rt).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.values(), &[0.75, 0.5, 0.25, 0.0]);
    }

    #[test]
    fn update_single_step_from_one() {
        // data [(1,event),(2,censored)], S_prev ≡ 1 → 1/2 at both knots
        let rt = build_risk_table(&observations(&[1.0, 2.0], &[true, false]).unwrap()).unwrap();
        let s = em_update(&StepFunction::constant_one(rt.times()).unwrap(), &rt).unwrap();
        assert_eq!(s.values(), &[0.5, 0.5]);
    }

    #[test]
    fn km_is_fixed_point_five_point() {
        let rt = build_risk_table(&five_point()).unwrap();
        let km = km_estimate(&rt);
        let next = em_update(&km, &rt).unwrap();
        assert!(next.sup_distance(&km) < 1e-12);
    }

    #[test]
    fn update_zero_at_censored_knot_errors() {
        let rt = build_risk_table(&five_point()).unwrap();
        let bad = StepFunction::new(rt.times().to_vec(), vec![0.5, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(em_update(&bad, &rt), Err(Error::EmRatioUndefined(2.0)));
    }

    #[test]
    fn initial_curve_shape() {
        let rt = build_risk_table(&five_point()).unwrap();
        let s0 = initial_estimate(&rt);
        assert_eq!(
            s0.values(),
            &[5.0 / 6.0, 4.0 / 6.0, 3.0 / 6.0, 2.0 / 6.0, 1.0 / 6.0]
        );
        assert!(s0.values().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn em_fit_five_point_matches_km() {
        let (s, trace) = em_fit(&five_point(), &EmOptions::default()).unwrap();
        let expect = [0.8, 0.8, 1.6 / 3.0, 1.6 / 3.0, 0.0];
        for (v, e) in s.values().iter().zip(expect) {
            assert!((v - e).abs() < 1e-8, "{v} vs {e}");
        }
        assert!(trace.converged);
        assert_eq!(trace.objective_path.len(), trace.iterations + 1);
    }

    #[test]
    fn em_fit_no_censoring_one_iteration() {
        let data = observations(&[0.5, 1.5, 2.5], &[true; 3]).unwrap();
        let (s, trace) = em_fit(&data, &EmOptions::default()).unwrap();
        assert_eq!(trace.iterations, 1);
        assert!(trace.converged);
        assert_eq!(s.values(), &[2.0 / 3.0, 1.0 / 3.0, 0.0]);
    }

    #[test]
    fn em_fit_all_censored_is_one() {
        let data = observations(&[0.5, 1.5, 2.5], &[false; 3]).unwrap();
        let (s, trace) = em_fit(&data, &EmOptions::default()).unwrap();
        // reaches 1 in the limit; from the positive start the first update
        // is (1 + 1 + S(x1)/S(x0)) / 3 < 1 at the middle knot
        assert!(
            s.values().iter().all(|&v| (v - 1.0).abs() < 1e-8),
            "{:?}",
            s.values()
        );
        assert!(trace.converged);
    }

    #[test]
    fn em_fit_iteration_cap() {
        let opts = EmOptions {
            tol: 1e-10,
            max_iter: 1,
        };
        let (_, trace) = em_fit(&five_point(), &opts).unwrap();
        assert_eq!(trace.iterations, 1);
        assert!(!trace.converged);
    }

    #[test]
    fn em_fit_rejects_bad_options() {
        let bad_tol = EmOptions {
            tol: 0.0,
            max_iter: 10,
        };
        assert!(em_fit(&five_point(), &bad_tol).is_err());
        let bad_iter = EmOptions {
            tol: 1e-10,
            max_iter: 0,
        };
        assert!(em_fit(&five_point(), &bad_iter).is_err());
    }

    #[test]
    fn m_tilde_censored_boundary_atom_excluded() {
        let data = observations(&[5.0], &[false]).unwrap();
        let mu = MeasureSpec::discrete_uniform(vec![5.0]).unwrap();
        let one = StepFunction::constant_one(&[5.0]).unwrap();
        assert_eq!(m_tilde(&one, &data, &mu).unwrap(), 0.0);
    }

    #[test]
    fn measure_validation() {
        assert!(MeasureSpec::discrete_uniform(vec![]).is_err());
        assert!(MeasureSpec::discrete_uniform(vec![2.0, 1.0]).is_err());
        assert!(MeasureSpec::discrete_uniform(vec![-1.0]).is_err());
    }
}
