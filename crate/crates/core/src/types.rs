//! Observations, the risk table and right-continuous step functions.

use crate::error::{Error, Result};

/// One right-censored record: the observed time `min(T, C)` and whether the
/// event was seen before censoring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    time: f64,
    event: bool,
}

impl Observation {
    pub fn new(time: f64, event: bool) -> Result<Self> {
        if !(time.is_finite() && time > 0.0) {
            return Err(Error::InvalidTime(time));
        }
        Ok(Self { time, event })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn event(&self) -> bool {
        self.event
    }
}

/// Build observations from parallel slices, validating every time.
pub fn observations(times: &[f64], events: &[bool]) -> Result<Vec<Observation>> {
    if times.len() != events.len() {
        return Err(Error::InvalidParameter(format!(
            "times/events length mismatch: {} vs {}",
            times.len(),
            events.len()
        )));
    }
    times
        .iter()
        .zip(events)
        .map(|(&t, &e)| Observation::new(t, e))
        .collect()
}

/// Distinct observed times (events and censorings alike) with their tie,
/// event and at-risk counts.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskTable {
    times: Vec<f64>,
    tie_count: Vec<usize>,
    event_count: Vec<usize>,
    at_risk: Vec<usize>,
    total: usize,
}

impl RiskTable {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn tie_count(&self) -> &[usize] {
        &self.tie_count
    }

    pub fn event_count(&self) -> &[usize] {
        &self.event_count
    }

    pub fn at_risk(&self) -> &[usize] {
        &self.at_risk
    }

    /// Number of observations `n`.
    pub fn total(&self) -> usize {
        self.total
    }

    /// Number of distinct times `K`.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Censored records tied at knot `k`.
    pub fn censored_count(&self, k: usize) -> usize {
        self.tie_count[k] - self.event_count[k]
    }

    /// True when at least one record is censored.
    pub fn has_censoring(&self) -> bool {
        self.tie_count
            .iter()
            .zip(&self.event_count)
            .any(|(n, d)| n > d)
    }

    pub fn total_events(&self) -> usize {
        self.event_count.iter().sum()
    }

    /// Index of the last knot `<= x`, or `None` before the first knot.
    pub fn knot_index(&self, x: f64) -> Option<usize> {
        self.times.partition_point(|&t| t <= x).checked_sub(1)
    }
}

/// Group observations by exact time. Ties are detected by floating-point
/// equality; inputs are expected to carry already-discretised timestamps.
pub fn build_risk_table(data: &[Observation]) -> Result<RiskTable> {
    if data.is_empty() {
        return Err(Error::NoObservations);
    }
    if let Some(bad) = data.iter().find(|o| !(o.time.is_finite() && o.time > 0.0)) {
        return Err(Error::InvalidTime(bad.time));
    }

    let mut sorted: Vec<Observation> = data.to_vec();
    sorted.sort_by(|a, b| a.time.total_cmp(&b.time));

    let mut times = Vec::new();
    let mut tie_count = Vec::new();
    let mut event_count = Vec::new();
    for obs in &sorted {
        if times.last() == Some(&obs.time) {
            *tie_count.last_mut().unwrap() += 1;
            *event_count.last_mut().unwrap() += obs.event as usize;
        } else {
            times.push(obs.time);
            tie_count.push(1);
            event_count.push(obs.event as usize);
        }
    }

    let total = sorted.len();
    let mut at_risk = Vec::with_capacity(times.len());
    let mut remaining = total;
    for &ties in &tie_count {
        at_risk.push(remaining);
        remaining -= ties;
    }

    Ok(RiskTable {
        times,
        tie_count,
        event_count,
        at_risk,
        total,
    })
}

/// Right-continuous, nonincreasing survival curve on `[0, ∞)`.
///
/// The curve is 1 on `[0, knots[0])`, `values[k]` on `[knots[k], knots[k+1])`
/// and `values[K-1]` from the last knot on.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() != values.len() {
            return Err(Error::InvalidStepFunction(format!(
                "{} knots but {} values",
                knots.len(),
                values.len()
            )));
        }
        if knots.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
            return Err(Error::InvalidStepFunction(
                "knots must be positive and finite".into(),
            ));
        }
        if knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidStepFunction(
                "knots must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidStepFunction(
                "values must lie in [0, 1]".into(),
            ));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidStepFunction(
                "values must be nonincreasing".into(),
            ));
        }
        Ok(Self { knots, values })
    }

    /// The curve that is 1 at every knot.
    pub fn constant_one(knots: &[f64]) -> Result<Self> {
        Self::new(knots.to_vec(), vec![1.0; knots.len()])
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if x < 0.0 || x.is_nan() {
            return Err(Error::NegativeTime(x));
        }
        Ok(match self.knots.partition_point(|&k| k <= x) {
            0 => 1.0,
            i => self.values[i - 1],
        })
    }

    /// Sup-norm distance between two curves sharing the same knots.
    pub fn sup_distance(&self, other: &StepFunction) -> f64 {
        debug_assert_eq!(self.knots, other.knots);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(pairs: &[(f64, bool)]) -> Vec<Observation> {
        pairs
            .iter()
            .map(|&(t, e)| Observation::new(t, e).unwrap())
            .collect()
    }

    #[test]
    fn risk_table_five_points() {
        let rt = build_risk_table(&obs(&[
            (1.0, true),
            (2.0, false),
            (3.0, true),
            (4.0, false),
            (5.0, true),
        ]))
        .unwrap();
        assert_eq!(rt.times(), &[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(rt.tie_count(), &[1, 1, 1, 1, 1]);
        assert_eq!(rt.event_count(), &[1, 0, 1, 0, 1]);
        assert_eq!(rt.at_risk(), &[5, 4, 3, 2, 1]);
        assert_eq!(rt.total(), 5);
    }

    #[test]
    fn risk_table_ties_mixed() {
        let rt = build_risk_table(&obs(&[(2.0, true), (2.0, true), (2.0, false)])).unwrap();
        assert_eq!(rt.times(), &[2.0]);
        assert_eq!(rt.tie_count(), &[3]);
        assert_eq!(rt.event_count(), &[2]);
        assert_eq!(rt.at_risk(), &[3]);
    }

    #[test]
    fn risk_table_single_censored() {
        let rt = build_risk_table(&obs(&[(7.0, false)])).unwrap();
        assert_eq!(rt.times(), &[7.0]);
        assert_eq!(rt.tie_count(), &[1]);
        assert_eq!(rt.event_count(), &[0]);
        assert_eq!(rt.at_risk(), &[1]);
    }

    #[test]
    fn risk_table_errors() {
        assert_eq!(build_risk_table(&[]), Err(Error::NoObservations));
        assert!(matches!(
            Observation::new(0.0, true),
            Err(Error::InvalidTime(_))
        ));
        assert!(matches!(
            Observation::new(-1.0, true),
            Err(Error::InvalidTime(_))
        ));
        assert!(matches!(
            Observation::new(f64::INFINITY, false),
            Err(Error::InvalidTime(_))
        ));
    }

    #[test]
    fn step_eval_contract() {
        let f = StepFunction::new(vec![1.0, 3.0], vec![0.8, 0.5]).unwrap();
        assert_eq!(f.eval(0.5).unwrap(), 1.0);
        assert_eq!(f.eval(0.0).unwrap(), 1.0);
        assert_eq!(f.eval(1.0).unwrap(), 0.8);
        assert_eq!(f.eval(2.999).unwrap(), 0.8);
        assert_eq!(f.eval(3.0).unwrap(), 0.5);
        assert_eq!(f.eval(100.0).unwrap(), 0.5);
        assert!(matches!(f.eval(-1.0), Err(Error::NegativeTime(_))));
    }

    #[test]
    fn step_rejects_bad_shapes() {
        assert!(StepFunction::new(vec![1.0, 2.0], vec![0.5, 0.6]).is_err());
        assert!(StepFunction::new(vec![2.0, 1.0], vec![0.5, 0.4]).is_err());
        assert!(StepFunction::new(vec![1.0], vec![1.5]).is_err());
        assert!(StepFunction::new(vec![0.0], vec![0.5]).is_err());
        assert!(StepFunction::new(vec![1.0], vec![]).is_err());
    }

    #[test]
    fn knot_index_lookup() {
        let rt = build_risk_table(&obs(&[(1.0, true), (3.0, false)])).unwrap();
        assert_eq!(rt.knot_index(0.5), None);
        assert_eq!(rt.knot_index(1.0), Some(0));
        assert_eq!(rt.knot_index(2.0), Some(0));
        assert_eq!(rt.knot_index(3.0), Some(1));
        assert_eq!(rt.knot_index(10.0), Some(1));
    }
}
