#![allow(dead_code)]

use kmest_core::types::observations;
use kmest_core::{Observation, StepFunction};
use proptest::prelude::*;

pub fn obs(pairs: &[(f64, bool)]) -> Vec<Observation> {
    pairs
        .iter()
        .map(|&(t, e)| Observation::new(t, e).unwrap())
        .collect()
}

pub fn five_point() -> Vec<Observation> {
    observations(
        &[1.0, 2.0, 3.0, 4.0, 5.0],
        &[true, false, true, false, true],
    )
    .unwrap()
}

/// Brute-force product-limit value at `x` straight from the records:
/// Π over distinct event times `t ≤ x` of `1 − #{X = t, event} / #{X ≥ t}`.
pub fn km_bruteforce(data: &[Observation], x: f64) -> f64 {
    let mut times: Vec<f64> = data
        .iter()
        .filter(|o| o.event())
        .map(|o| o.time())
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    times
        .into_iter()
        .filter(|&t| t <= x)
        .map(|t| {
            let d = data.iter().filter(|o| o.event() && o.time() == t).count() as f64;
            let r = data.iter().filter(|o| o.time() >= t).count() as f64;
            1.0 - d / r
        })
        .product()
}

/// The EM update written exactly as the double sum over records, evaluated
/// at an arbitrary `x`.
pub fn em_update_literal(prev: &StepFunction, data: &[Observation], x: f64) -> f64 {
    let n = data.len() as f64;
    data.iter()
        .map(|o| {
            if o.event() {
                if o.time() > x {
                    1.0
                } else {
                    0.0
                }
            } else {
                prev.eval(x.max(o.time())).unwrap() / prev.eval(o.time()).unwrap()
            }
        })
        .sum::<f64>()
        / n
}

/// `M̃_n(S)` term by term over records and atoms of a uniform measure.
pub fn m_tilde_literal(s: &StepFunction, data: &[Observation], atoms: &[f64]) -> f64 {
    let w = 1.0 / atoms.len() as f64;
    let mut acc = 0.0;
    for o in data {
        for &x in atoms {
            let sx = s.eval(x).unwrap();
            let ind = if o.time() > x { 1.0 } else { 0.0 };
            if o.event() || x < o.time() {
                acc += w * (-ind * ind + 2.0 * sx * ind - sx * sx);
            }
        }
    }
    acc / data.len() as f64
}

/// Greenwood's log-scale variance `Σ_{t_j ≤ x} d_j / (R_j (R_j − d_j))`.
pub fn greenwood_log_variance(data: &[Observation], x: f64) -> f64 {
    let mut times: Vec<f64> = data
        .iter()
        .filter(|o| o.event())
        .map(|o| o.time())
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    times
        .into_iter()
        .filter(|&t| t <= x)
        .map(|t| {
            let d = data.iter().filter(|o| o.event() && o.time() == t).count() as f64;
            let r = data.iter().filter(|o| o.time() >= t).count() as f64;
            d / (r * (r - d))
        })
        .sum()
}

/// 3..=50 records with distinct positive times and mixed censoring.
pub fn censored_dataset() -> impl Strategy<Value = Vec<Observation>> {
    prop::collection::vec((0.01f64..100.0, any::<bool>()), 3..=50).prop_map(|mut rows| {
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        rows.dedup_by(|a, b| a.0 == b.0);
        rows.into_iter()
            .map(|(t, e)| Observation::new(t, e).unwrap())
            .collect()
    })
}

/// Like [`censored_dataset`] but drawn from a small lattice so ties are common.
pub fn tied_dataset() -> impl Strategy<Value = Vec<Observation>> {
    prop::collection::vec((1u8..12, any::<bool>()), 1..=40).prop_map(|rows| {
        rows.into_iter()
            .map(|(t, e)| Observation::new(f64::from(t) * 0.5, e).unwrap())
            .collect()
    })
}
