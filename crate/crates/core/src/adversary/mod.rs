//! Eavesdropper strategies: passive listening, siphoning, siphon-and-inject
//! and detector-bank estimation, plus Eve's reconstruction of the key bit.

mod estimate;

pub use estimate::{
    estimate_angle_detector_bank, estimate_angle_ml, likelihood, posterior_from_observations, AnglePosterior,
    BasisPolicy, Estimate, Observation,
};

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{Beam, IntensityMode, Origin, Photon};
use crate::error::{Error, Result};
use crate::protocol::AngleSet;
use crate::quantum::{Angle, Bit, PolarizationState};

/// How many photons Eve removes from a pass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Take {
    /// Each photon independently with probability `g`.
    Fraction(f64),
    /// The first `n` photons of the beam (the whole beam if shorter).
    Count(usize),
}

/// Polarization of the photons Eve injects.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InjectPolicy {
    /// A fresh uniform angle in `[0, π)` per injected photon.
    #[default]
    Uniform,
    Fixed(Angle),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    #[default]
    None,
    /// Destructively measures `m` photons per attacked pass.
    Passive {
        m: usize,
    },
    Siphon {
        take: Take,
    },
    /// Siphons and replaces every removed photon with one of her own.
    SiphonInject {
        take: Take,
        #[serde(default)]
        inject: InjectPolicy,
    },
    /// Captures `detectors` photons per pass and routes them to a bank of
    /// detectors aligned with the candidate angles.
    DetectorBank {
        detectors: usize,
    },
}

/// Subset of the three transmissions (numbered 1, 2, 3) that Eve taps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct PassSet([bool; 3]);

impl PassSet {
    pub const ALL: PassSet = PassSet([true; 3]);

    pub fn only(pass: u8) -> Self {
        let mut set = [false; 3];
        if (1..=3).contains(&pass) {
            set[pass as usize - 1] = true;
        }
        PassSet(set)
    }

    pub fn contains(self, pass: u8) -> bool {
        (1..=3).contains(&pass) && self.0[pass as usize - 1]
    }

    pub fn is_empty(self) -> bool {
        !self.0.iter().any(|&b| b)
    }
}

impl Default for PassSet {
    fn default() -> Self {
        PassSet::ALL
    }
}

impl TryFrom<Vec<u8>> for PassSet {
    type Error = String;

    fn try_from(passes: Vec<u8>) -> std::result::Result<Self, String> {
        let mut set = [false; 3];
        for p in passes {
            if !(1..=3).contains(&p) {
                return Err(format!("passes must be drawn from {{1, 2, 3}}, got {p}"));
            }
            set[p as usize - 1] = true;
        }
        Ok(PassSet(set))
    }
}

impl From<PassSet> for Vec<u8> {
    fn from(s: PassSet) -> Vec<u8> {
        (1..=3).filter(|&p| s.contains(p)).collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversarySpec {
    #[serde(default)]
    pub strategy: Strategy,
    #[serde(default)]
    pub passes: PassSet,
    /// Basis policy for the maximum-likelihood estimator.
    #[serde(default)]
    pub basis: BasisPolicy,
}

impl AdversarySpec {
    pub fn none() -> Self {
        AdversarySpec::default()
    }

    pub fn new(strategy: Strategy, passes: PassSet) -> Self {
        AdversarySpec {
            strategy,
            passes,
            basis: BasisPolicy::default(),
        }
    }

    pub fn is_active(&self) -> bool {
        self.strategy != Strategy::None && !self.passes.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let take = match self.strategy {
            Strategy::Siphon { take } | Strategy::SiphonInject { take, .. } => Some(take),
            _ => None,
        };
        if let Some(Take::Fraction(g)) = take {
            if !(0.0..=1.0).contains(&g) {
                return Err(Error::invalid("adversary.strategy.take.fraction", "[0, 1]", g));
            }
        }
        if let Strategy::DetectorBank { detectors: 0 } = self.strategy {
            return Err(Error::invalid("adversary.strategy.detector_bank.detectors", ">= 1", 0));
        }
        Ok(())
    }

    fn take(&self) -> Option<Take> {
        match self.strategy {
            Strategy::None => None,
            Strategy::Passive { m } => Some(Take::Count(m)),
            Strategy::Siphon { take } | Strategy::SiphonInject { take, .. } => Some(take),
            Strategy::DetectorBank { detectors } => Some(Take::Count(detectors)),
        }
    }
}

/// What Eve removed from and added to one pass.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PassCapture {
    pub pass: u8,
    pub siphoned: Vec<Photon>,
    pub injected: Vec<Photon>,
    /// Number of siphoned photons she can actually measure. Equal to
    /// `siphoned.len()` except for fractional siphoning in expected-value
    /// mode, where it is the captured intensity rounded to whole photons.
    pub measurable: usize,
}

/// Eve taps one transmission.
///
/// Photons out = photons in − siphoned + injected. Passes outside
/// `spec.passes` go through untouched and consume no randomness.
pub fn intercept<R: Rng + ?Sized>(
    beam: Beam,
    spec: &AdversarySpec,
    pass: u8,
    mode: IntensityMode,
    rng: &mut R,
) -> (Beam, PassCapture) {
    let mut capture = PassCapture {
        pass,
        ..PassCapture::default()
    };
    let take = match spec.take() {
        Some(t) if spec.passes.contains(pass) => t,
        _ => return (beam, capture),
    };

    let mut photons = beam.photons;
    match (take, mode) {
        (Take::Count(n), _) => {
            let n = n.min(photons.len());
            capture.siphoned = photons.drain(..n).collect();
            capture.measurable = n;
        }
        (Take::Fraction(g), IntensityMode::PhotonCount) => {
            let (taken, kept): (Vec<_>, Vec<_>) = photons.into_iter().partition(|_| rng.gen::<f64>() < g);
            photons = kept;
            capture.measurable = taken.len();
            capture.siphoned = taken;
        }
        (Take::Fraction(g), IntensityMode::ExpectedValue) => {
            capture.siphoned = photons
                .iter()
                .map(|p| Photon::with_weight(p.state, p.origin(), p.weight() * g))
                .collect();
            photons = photons
                .into_iter()
                .map(|p| Photon::with_weight(p.state, p.origin(), p.weight() * (1.0 - g)))
                .collect();
            let weight: f64 = capture.siphoned.iter().map(Photon::weight).sum();
            capture.measurable = (weight.round() as usize).min(capture.siphoned.len());
        }
    }

    if let Strategy::SiphonInject { inject, .. } = spec.strategy {
        capture.injected = capture
            .siphoned
            .iter()
            .map(|p| {
                let angle = match inject {
                    InjectPolicy::Uniform => Angle::new(rng.gen::<f64>() * PI),
                    InjectPolicy::Fixed(a) => a,
                };
                Photon::with_weight(PolarizationState::new(angle), Origin::EveInjected { pass }, p.weight())
            })
            .collect();
        photons.extend(capture.injected.iter().copied());
    }

    (Beam::new(photons), capture)
}

/// Eve's angle estimate for one pass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PassEstimate {
    pub pass: u8,
    pub estimate: Estimate,
}

/// Measures the photons captured on one pass with the estimator implied by
/// the strategy. Returns `None` when nothing measurable was captured.
pub fn estimate_pass<R: Rng + ?Sized>(
    capture: &PassCapture,
    spec: &AdversarySpec,
    candidates: &AngleSet,
    rng: &mut R,
) -> Option<PassEstimate> {
    if capture.measurable == 0 {
        return None;
    }
    let photons = &capture.siphoned[..capture.measurable];
    let estimate = match spec.strategy {
        Strategy::DetectorBank { .. } => estimate_angle_detector_bank(photons, candidates, rng),
        _ => estimate_angle_ml(photons, candidates, spec.basis, rng),
    }
    .expect("measurable photons are non-empty");
    Some(PassEstimate {
        pass: capture.pass,
        estimate,
    })
}

/// Everything Eve did and learned during one round.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EveLog {
    pub captures: Vec<PassCapture>,
    pub estimates: Vec<PassEstimate>,
    /// Result of the three-pass reconstruction; `None` when undetermined.
    pub recovered_bit_guess: Option<Bit>,
    /// The bit Eve commits to: the reconstruction when it succeeds, otherwise
    /// her best single-pass guess. `None` only when Eve is absent.
    pub committed_guess: Option<Bit>,
}

impl EveLog {
    pub fn siphoned(&self) -> usize {
        self.captures.iter().map(|c| c.siphoned.len()).sum()
    }

    pub fn injected(&self) -> usize {
        self.captures.iter().map(|c| c.injected.len()).sum()
    }

    pub fn estimate_for(&self, pass: u8) -> Option<&PassEstimate> {
        self.estimates.iter().find(|e| e.pass == pass)
    }

    /// All of Eve's measurement outcomes: (zeros, total).
    pub fn outcome_counts(&self) -> (usize, usize) {
        self.estimates
            .iter()
            .flat_map(|e| &e.estimate.observations)
            .fold((0, 0), |(z, n), o| (z + (o.outcome == Bit::Zero) as usize, n + 1))
    }
}

/// Solves for the key bit from the three pass estimates.
///
/// Pass 1 carries `X + θ`, pass 2 `X + θ + ϕ` and pass 3 `X + ϕ`, so
/// `ψ₁ + ψ₃ − ψ₂ = X (mod π)`. Undetermined when a pass is missing, a
/// posterior has no unique maximum, or the combination lands on neither
/// encoding angle.
pub fn eve_reconstruct_bit(log: &EveLog) -> Option<Bit> {
    let mut psi = [Angle::ZERO; 3];
    for pass in 1..=3u8 {
        let post = &log.estimate_for(pass)?.estimate.posterior;
        if post.is_ambiguous() {
            return None;
        }
        psi[pass as usize - 1] = post.argmax();
    }
    let x = psi[0] + psi[2] - psi[1];
    if x.polarization_eq(Angle::ZERO) {
        Some(Bit::Zero)
    } else if x.polarization_eq(Angle::QUARTER_TURN) {
        Some(Bit::One)
    } else {
        None
    }
}

/// The guess Eve commits to when reconstruction is unavailable: read the
/// lowest attacked pass as if its rotation were the identity, breaking exact
/// ties with a coin flip.
pub fn eve_fallback_guess<R: Rng + ?Sized>(log: &EveLog, rng: &mut R) -> Bit {
    let p0 = log
        .estimates
        .iter()
        .min_by_key(|e| e.pass)
        .map(|e| e.estimate.posterior.prob_bit_zero())
        .unwrap_or(0.5);
    if (p0 - 0.5).abs() <= 1e-12 {
        if rng.gen::<bool>() {
            Bit::Zero
        } else {
            Bit::One
        }
    } else if p0 > 0.5 {
        Bit::Zero
    } else {
        Bit::One
    }
}
