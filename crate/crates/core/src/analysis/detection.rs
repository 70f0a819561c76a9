use rayon::prelude::*;
use serde::Serialize;

use super::stats::proportion_halfwidth;
use crate::error::{Error, Result};
use crate::protocol::{run_round, RoundConfig};
use crate::rng::substream;

/// Minimum trial count for the normal-approximation interval.
pub const MIN_TRIALS: usize = 100;

/// A Monte Carlo proportion with its 95% halfwidth.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProportionEstimate {
    pub estimate: f64,
    pub halfwidth: f64,
    pub trials: usize,
}

impl ProportionEstimate {
    pub fn from_hits(hits: usize, trials: usize) -> Self {
        let estimate = hits as f64 / trials as f64;
        ProportionEstimate {
            estimate,
            halfwidth: proportion_halfwidth(estimate, trials),
            trials,
        }
    }

    pub fn covers(&self, value: f64) -> bool {
        (self.estimate - value).abs() <= self.halfwidth
    }
}

/// Monte Carlo estimate of `P(intensity alarm or alignment alarm)` for a
/// fixed round configuration. Trial `i` runs on substream `(seed, i)`.
pub fn detection_probability(cfg: &RoundConfig, trials: usize, seed: u64) -> Result<ProportionEstimate> {
    if trials < MIN_TRIALS {
        return Err(Error::invalid("n_trials", format!(">= {MIN_TRIALS}"), trials));
    }
    cfg.validate()?;
    let hits = (0..trials)
        .into_par_iter()
        .map(|i| run_round(cfg, &mut substream(seed, i as u64)).map(|t| t.detected() as usize))
        .sum::<Result<usize>>()?;
    Ok(ProportionEstimate::from_hits(hits, trials))
}

/// Exact detection probability for photon-count siphoning of fraction `g` on
/// all three links with ideal detectors and no loss.
///
/// Ideal detectors fire iff at least one photon went missing, so the round
/// escapes detection only if every link loses zero photons. Conditioning on
/// that, each tap thins the beam binomially and the probability generating
/// function of a binomial gives
/// `P(undetected) = (1-g)^I · (k_B + (1-k_B)·q)^I`,
/// `q = (1-g)·(k_A + (1-k_A)(1-g))`.
pub fn siphon_detection_exact(source_intensity: u64, g: f64, bob_tap: f64, alice_tap: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&g) {
        return Err(Error::invalid("g", "[0, 1]", g));
    }
    for (field, k) in [("tap_fraction", bob_tap), ("alice_tap_fraction", alice_tap)] {
        if !(k > 0.0 && k < 1.0) {
            return Err(Error::invalid(field, "(0, 1)", k));
        }
    }
    let n = source_intensity as f64;
    let keep = 1.0 - g;
    let q = keep * (alice_tap + (1.0 - alice_tap) * keep);
    let undetected = keep.powf(n) * (bob_tap + (1.0 - bob_tap) * q).powf(n);
    Ok(1.0 - undetected)
}
