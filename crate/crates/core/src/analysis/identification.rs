//! How many photons Eve needs to pin down an angle.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::adversary::{estimate_angle_detector_bank, estimate_angle_ml, BasisPolicy};
use crate::channel::Beam;
use crate::error::{Error, Result};
use crate::protocol::AngleSet;
use crate::quantum::PolarizationState;
use crate::rng::substream;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Estimator {
    MaxLikelihood(BasisPolicy),
    DetectorBank,
}

/// Fraction of trials in which `m` photons of a uniformly drawn candidate
/// angle lead the estimator's point estimate back to that angle.
pub fn identification_rate(
    candidates: &AngleSet,
    m: usize,
    estimator: Estimator,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if m == 0 {
        return Err(Error::invalid("m", ">= 1", m));
    }
    if trials == 0 {
        return Err(Error::invalid("trials", ">= 1", trials));
    }
    let hits = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(seed, t as u64);
            let truth = candidates.angles()[rng.gen_range(0..candidates.len())];
            let photons = Beam::uniform(PolarizationState::new(truth), m).photons;
            let est = match estimator {
                Estimator::MaxLikelihood(policy) => estimate_angle_ml(&photons, candidates, policy, &mut rng)?,
                Estimator::DetectorBank => estimate_angle_detector_bank(&photons, candidates, &mut rng)?,
            };
            Ok(est.posterior.argmax().polarization_eq(truth) as usize)
        })
        .sum::<Result<usize>>()?;
    Ok(hits as f64 / trials as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentificationSweep {
    /// `(m, success rate)` for every `m` tried, in increasing order.
    pub rates: Vec<(usize, f64)>,
    /// Smallest `m` reaching the threshold, if any did.
    pub min_photons: Option<usize>,
}

/// Sweeps `m = 1..=max_m` and stops at the first `m` whose identification
/// rate reaches `threshold`. Each `m` gets its own seed so rows are
/// independent.
pub fn min_photons_for_identification(
    candidates: &AngleSet,
    estimator: Estimator,
    threshold: f64,
    trials: usize,
    max_m: usize,
    seed: u64,
) -> Result<IdentificationSweep> {
    let mut rates = Vec::new();
    for m in 1..=max_m {
        let r = identification_rate(candidates, m, estimator, trials, crate::rng::child_seed(seed, m as u64))?;
        rates.push((m, r));
        if r >= threshold {
            return Ok(IdentificationSweep {
                rates,
                min_photons: Some(m),
            });
        }
    }
    Ok(IdentificationSweep {
        rates,
        min_photons: None,
    })
}
