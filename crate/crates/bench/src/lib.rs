//! Fixtures shared by the criterion benches.

use kmest_core::seeding::child_rng;
use kmest_core::simulation::{gen_dataset, DistSpec};
use kmest_core::Observation;

/// Exponential events with exponential censoring at roughly a third censored.
pub fn censored_sample(n: usize, seed: u64) -> Vec<Observation> {
    let mut rng = child_rng(seed, 0);
    gen_dataset(
        n,
        &DistSpec::Exponential { rate: 1.0 / 3.0 },
        &DistSpec::Exponential { rate: 1.0 / 6.0 },
        &mut rng,
    )
}
