use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::{RoundConfig, Variant};
use crate::adversary::{estimate_pass, eve_fallback_guess, eve_reconstruct_bit, intercept, EveLog};
use crate::channel::{intensity_check, split, transmit, Beam, IntensityMode, Origin, TapReading, TapStage};
use crate::error::Result;
use crate::quantum::{bit_to_state, measure, Angle, Bit, RotationOp};

/// Everything observable (and the hidden bookkeeping) from one round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundTranscript {
    pub variant: Variant,
    pub theta: Angle,
    pub phi: Angle,
    pub bit: Bit,
    /// One reading per receipt when intensity is tracked, empty otherwise.
    pub taps: Vec<TapReading>,
    pub tap_passed: Vec<bool>,
    /// The beam Bob measures at the end of the round.
    pub final_beam: Beam,
    pub bob_outcomes: Vec<Bit>,
    /// `None` when the outcomes tie or no photon reached Bob.
    pub recovered_bit: Option<Bit>,
    pub intensity_alarm: bool,
    pub alignment_alarm: bool,
    pub eve: EveLog,
    /// Photon provenance after each of the seven protocol steps, when traced.
    pub trace: Option<Vec<Vec<Origin>>>,
}

impl RoundTranscript {
    pub fn final_intensity(&self) -> f64 {
        self.final_beam.intensity()
    }

    pub fn detected(&self) -> bool {
        self.intensity_alarm || self.alignment_alarm
    }
}

/// Unanimity gives the bit; mixed outcomes fall back to a majority vote, with
/// ties undetermined.
pub fn decide_bit(outcomes: &[Bit]) -> Option<Bit> {
    let ones = outcomes.iter().filter(|&&b| b == Bit::One).count();
    let zeros = outcomes.len() - ones;
    match zeros.cmp(&ones) {
        std::cmp::Ordering::Greater => Some(Bit::Zero),
        std::cmp::Ordering::Less => Some(Bit::One),
        std::cmp::Ordering::Equal => None,
    }
}

struct Link {
    pass: u8,
    stage: TapStage,
    tap: f64,
    /// Rotation the receiver applies before sending on.
    rotation: RotationOp,
}

fn execute<R: Rng + ?Sized>(
    cfg: &RoundConfig,
    taps_enabled: bool,
    traced: bool,
    rng: &mut R,
) -> Result<RoundTranscript> {
    cfg.validate()?;
    let set = cfg.angle_set()?;
    let theta = set.angles()[cfg.alice_angle];
    let phi = set.angles()[cfg.bob_angle];
    let alice = RotationOp::new(theta);
    let bob = RotationOp::new(phi);
    let adversary = &cfg.adversary;
    let candidates = adversary.is_active().then(|| set.state_candidates());

    let mut trace = traced.then(Vec::new);
    let mut snapshot = |beam: &Beam| {
        if let Some(t) = trace.as_mut() {
            t.push(beam.iter().map(|p| p.origin()).collect::<Vec<_>>());
        }
    };

    // Step 1: Alice encodes X and applies her rotation.
    let mut beam = Beam::uniform(bit_to_state(cfg.bit).rotate(alice), cfg.source_intensity as usize);
    snapshot(&beam);

    let links = [
        Link {
            pass: 1,
            stage: TapStage::BobFirst,
            tap: cfg.bob_tap(),
            rotation: bob,
        },
        Link {
            pass: 2,
            stage: TapStage::AliceSecond,
            tap: cfg.alice_tap(),
            rotation: alice.inverse(),
        },
        Link {
            pass: 3,
            stage: TapStage::BobThird,
            tap: cfg.bob_tap(),
            rotation: bob.inverse(),
        },
    ];

    let mut eve = EveLog::default();
    let mut taps = Vec::new();
    // Intensity each receiver should see, starting from the announced source.
    let mut expected_incoming = cfg.source_intensity as f64;
    for link in &links {
        beam = transmit(beam, cfg.loss, cfg.mode, rng)?;
        expected_incoming *= 1.0 - cfg.loss;
        let (forwarded, capture) = intercept(beam, adversary, link.pass, cfg.mode, rng);
        beam = forwarded;
        if let Some(candidates) = &candidates {
            if let Some(est) = estimate_pass(&capture, adversary, candidates, rng) {
                eve.estimates.push(est);
            }
            eve.captures.push(capture);
        }
        snapshot(&beam);

        if taps_enabled {
            taps.push(TapReading {
                stage: link.stage,
                expected: expected_incoming * link.tap,
                observed: beam.intensity() * link.tap,
            });
            let (tapped, through) = split(beam, link.tap, cfg.mode, rng)?;
            beam = through;
            expected_incoming = match cfg.mode {
                IntensityMode::ExpectedValue => expected_incoming * (1.0 - link.tap),
                // The receiver counted the photons it diverted.
                IntensityMode::PhotonCount => expected_incoming - tapped.intensity(),
            };
        }

        let rotation = link.rotation;
        beam.map_states(|s| s.rotate(rotation));
        if link.pass < 3 {
            snapshot(&beam);
        }
    }
    snapshot(&beam);

    // Step 4: the state is fully unwound, so Bob reads it in the encoding basis.
    let bob_outcomes: Vec<Bit> = beam.iter().map(|p| measure(p.state, Angle::ZERO, rng)).collect();
    let recovered_bit = decide_bit(&bob_outcomes);
    let alignment_alarm = bob_outcomes.windows(2).any(|w| w[0] != w[1]);
    let tap_passed: Vec<bool> = taps
        .iter()
        .map(|t| intensity_check(t, cfg.detector_resolution))
        .collect();
    let intensity_alarm = tap_passed.iter().any(|&ok| !ok);

    if candidates.is_some() {
        eve.recovered_bit_guess = eve_reconstruct_bit(&eve);
        eve.committed_guess = Some(match eve.recovered_bit_guess {
            Some(b) => b,
            None => eve_fallback_guess(&eve, rng),
        });
    }

    Ok(RoundTranscript {
        variant: cfg.variant,
        theta,
        phi,
        bit: cfg.bit,
        taps,
        tap_passed,
        final_beam: beam,
        bob_outcomes,
        recovered_bit,
        intensity_alarm,
        alignment_alarm,
        eve,
        trace,
    })
}

/// Three-pass K06 round: rotations only, no intensity taps.
pub fn run_k06_round<R: Rng + ?Sized>(cfg: &RoundConfig, rng: &mut R) -> Result<RoundTranscript> {
    execute(cfg, false, false, rng)
}

/// iAQC round: K06 plus a beam-splitter tap at each of the three receipts.
/// With `track_intensity = false` it is exactly a K06 round.
pub fn run_iaqc_round<R: Rng + ?Sized>(cfg: &RoundConfig, rng: &mut R) -> Result<RoundTranscript> {
    execute(cfg, cfg.track_intensity, false, rng)
}

/// Runs the variant named in the config.
pub fn run_round<R: Rng + ?Sized>(cfg: &RoundConfig, rng: &mut R) -> Result<RoundTranscript> {
    match cfg.variant {
        Variant::K06 => run_k06_round(cfg, rng),
        Variant::Iaqc => run_iaqc_round(cfg, rng),
    }
}

/// As [`run_round`], also recording photon provenance after every step.
pub fn run_round_traced<R: Rng + ?Sized>(cfg: &RoundConfig, rng: &mut R) -> Result<RoundTranscript> {
    let taps = cfg.variant == Variant::Iaqc && cfg.track_intensity;
    execute(cfg, taps, true, rng)
}
