//! Bayesian angle estimation over a finite candidate set.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::Photon;
use crate::error::{Error, Result};
use crate::protocol::AngleSet;
use crate::quantum::{measure, prob_zero, Angle, Bit, PolarizationState};

/// Posterior masses closer than this are treated as tied.
const TIE_EPS: f64 = 1e-12;

/// How Eve picks the measurement basis for each captured photon.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisPolicy {
    /// Every photon in the same basis.
    Fixed(Angle),
    /// Basis minimizing the expected posterior entropy given the evidence so far.
    #[default]
    Adaptive,
    /// Photon `i` in basis `candidates[i mod n]`.
    Cycle,
}

/// One measured photon: the basis used and the outcome seen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub basis: Angle,
    pub outcome: Bit,
}

/// `P(outcome | ψ, basis)` under the Born rule.
pub fn likelihood(psi: Angle, obs: Observation) -> f64 {
    let p0 = prob_zero(PolarizationState::new(psi), obs.basis);
    match obs.outcome {
        Bit::Zero => p0,
        Bit::One => 1.0 - p0,
    }
}

/// A normalized probability distribution over candidate angles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnglePosterior {
    candidates: Vec<Angle>,
    probs: Vec<f64>,
}

impl AnglePosterior {
    pub fn uniform(candidates: &AngleSet) -> Self {
        let n = candidates.len();
        AnglePosterior {
            candidates: candidates.angles().to_vec(),
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn candidates(&self) -> &[Angle] {
        &self.candidates
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob_of(&self, angle: Angle) -> f64 {
        self.candidates
            .iter()
            .zip(&self.probs)
            .filter(|(c, _)| c.polarization_eq(angle))
            .map(|(_, p)| p)
            .sum()
    }

    /// Bayes update with one observation. Evidence that rules out every
    /// candidate resets the posterior to uniform.
    pub fn update(&mut self, obs: Observation) {
        for (p, c) in self.probs.iter_mut().zip(&self.candidates) {
            *p *= likelihood(*c, obs);
        }
        let total: f64 = self.probs.iter().sum();
        if total > 0.0 {
            self.probs.iter_mut().for_each(|p| *p /= total);
        } else {
            let n = self.probs.len() as f64;
            self.probs.iter_mut().for_each(|p| *p = 1.0 / n);
        }
    }

    fn max_prob(&self) -> f64 {
        self.probs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Point estimate; ties go to the smallest angle.
    pub fn argmax(&self) -> Angle {
        let max = self.max_prob();
        self.candidates
            .iter()
            .zip(&self.probs)
            .filter(|(_, &p)| p >= max - TIE_EPS)
            .map(|(c, _)| *c)
            .min_by(|a, b| a.radians().total_cmp(&b.radians()))
            .expect("posterior has at least one candidate")
    }

    /// More than one candidate shares the maximal mass.
    pub fn is_ambiguous(&self) -> bool {
        let max = self.max_prob();
        self.probs.iter().filter(|&&p| p >= max - TIE_EPS).count() > 1
    }

    pub fn support(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }

    pub fn entropy(&self) -> f64 {
        entropy(&self.probs)
    }

    /// Probability that the photon encodes bit 0, i.e. `Σ P(ψ)·cos²ψ`.
    pub fn prob_bit_zero(&self) -> f64 {
        self.candidates
            .iter()
            .zip(&self.probs)
            .map(|(c, p)| p * prob_zero(PolarizationState::new(*c), Angle::ZERO))
            .sum()
    }
}

fn entropy(probs: &[f64]) -> f64 {
    probs.iter().filter(|&&p| p > 0.0).map(|p| -p * p.log2()).sum()
}

/// Posterior from a uniform prior after the given observations.
pub fn posterior_from_observations(candidates: &AngleSet, observations: &[Observation]) -> AnglePosterior {
    let mut post = AnglePosterior::uniform(candidates);
    for &obs in observations {
        post.update(obs);
    }
    post
}

/// Result of an estimation run: the posterior and the raw measurement record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub posterior: AnglePosterior,
    pub observations: Vec<Observation>,
}

/// Candidate angles plus the midpoints between neighbours, modulo π.
fn adaptive_bases(candidates: &AngleSet) -> Vec<Angle> {
    let mut reps: Vec<f64> = candidates.angles().iter().map(|a| a.mod_pi()).collect();
    reps.sort_by(f64::total_cmp);
    reps.dedup_by(|a, b| (*a - *b).abs() <= TIE_EPS);
    let n = reps.len();
    let mut bases = Vec::with_capacity(2 * n);
    for i in 0..n {
        let next = if i + 1 < n { reps[i + 1] } else { reps[0] + PI };
        bases.push(reps[i]);
        bases.push((reps[i] + next) / 2.0);
    }
    let mut bases: Vec<Angle> = bases.into_iter().map(|b| Angle::new(Angle::new(b).mod_pi())).collect();
    bases.sort_by(|a, b| a.radians().total_cmp(&b.radians()));
    bases
}

/// Expected posterior entropy after measuring in `basis`.
fn expected_entropy(post: &AnglePosterior, basis: Angle) -> f64 {
    let mut p0 = 0.0;
    let mut after0 = Vec::with_capacity(post.probs.len());
    let mut after1 = Vec::with_capacity(post.probs.len());
    for (c, p) in post.candidates.iter().zip(&post.probs) {
        let l0 = prob_zero(PolarizationState::new(*c), basis);
        p0 += p * l0;
        after0.push(p * l0);
        after1.push(p * (1.0 - l0));
    }
    let p1 = 1.0 - p0;
    let mut h = 0.0;
    if p0 > 0.0 {
        after0.iter_mut().for_each(|x| *x /= p0);
        h += p0 * entropy(&after0);
    }
    if p1 > 0.0 {
        after1.iter_mut().for_each(|x| *x /= p1);
        h += p1 * entropy(&after1);
    }
    h
}

fn best_adaptive_basis(post: &AnglePosterior, bases: &[Angle]) -> Angle {
    let mut best = bases[0];
    let mut best_h = f64::INFINITY;
    for &b in bases {
        let h = expected_entropy(post, b);
        if h < best_h - TIE_EPS {
            best = b;
            best_h = h;
        }
    }
    best
}

/// Maximum-likelihood estimation: measures every photon in a basis chosen by
/// `policy` and returns the posterior over `candidates`.
pub fn estimate_angle_ml<R: Rng + ?Sized>(
    photons: &[Photon],
    candidates: &AngleSet,
    policy: BasisPolicy,
    rng: &mut R,
) -> Result<Estimate> {
    if photons.is_empty() {
        return Err(Error::EmptyPhotons("estimate_angle_ml"));
    }
    let bases = match policy {
        BasisPolicy::Adaptive => adaptive_bases(candidates),
        _ => Vec::new(),
    };
    let mut post = AnglePosterior::uniform(candidates);
    let mut observations = Vec::with_capacity(photons.len());
    for (i, photon) in photons.iter().enumerate() {
        let basis = match policy {
            BasisPolicy::Fixed(b) => b,
            BasisPolicy::Cycle => candidates.angles()[i % candidates.len()],
            BasisPolicy::Adaptive => best_adaptive_basis(&post, &bases),
        };
        let obs = Observation {
            basis,
            outcome: measure(photon.state, basis, rng),
        };
        post.update(obs);
        observations.push(obs);
    }
    Ok(Estimate {
        posterior: post,
        observations,
    })
}

/// Detector-bank estimation: one detector aligned with each candidate, photon
/// `i` routed to detector `i mod s`. A candidate is ruled out as soon as the
/// detector aligned with it reports the orthogonal outcome.
pub fn estimate_angle_detector_bank<R: Rng + ?Sized>(
    photons: &[Photon],
    candidates: &AngleSet,
    rng: &mut R,
) -> Result<Estimate> {
    if photons.is_empty() {
        return Err(Error::EmptyPhotons("estimate_angle_detector_bank"));
    }
    estimate_angle_ml(photons, candidates, BasisPolicy::Cycle, rng)
}
