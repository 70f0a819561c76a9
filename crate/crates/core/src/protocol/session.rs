use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RoundConfig;
use super::round::{run_round, RoundTranscript};
use crate::analysis::SessionStats;
use crate::channel::TapReading;
use crate::error::{Error, Result};
use crate::quantum::Bit;
use crate::rng::substream;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnglePolicy {
    /// Every round uses the configured angle indices.
    FixedAngles,
    /// θ and ϕ drawn uniformly from the angle set each round.
    #[default]
    FreshAnglesPerRound,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BitPolicy {
    #[default]
    Fixed,
    RandomPerRound,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionSpec {
    pub rounds: usize,
    pub angle_policy: AnglePolicy,
    pub bit_policy: BitPolicy,
}

impl Default for SessionSpec {
    fn default() -> Self {
        SessionSpec {
            rounds: 1000,
            angle_policy: AnglePolicy::default(),
            bit_policy: BitPolicy::default(),
        }
    }
}

impl SessionSpec {
    pub fn new(rounds: usize, angle_policy: AnglePolicy) -> Self {
        SessionSpec {
            rounds,
            angle_policy,
            bit_policy: BitPolicy::Fixed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds < 1 {
            return Err(Error::invalid("rounds", ">= 1", self.rounds));
        }
        Ok(())
    }
}

/// Compact per-round record: what the session statistics and the transcript
/// CSV need, without the photon-level detail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundSummary {
    pub round: usize,
    pub theta: f64,
    pub phi: f64,
    pub bit: Bit,
    pub taps: Vec<TapReading>,
    pub final_intensity: f64,
    pub zeros: usize,
    pub ones: usize,
    pub recovered: Option<Bit>,
    pub intensity_alarm: bool,
    pub alignment_alarm: bool,
    pub eve_active: bool,
    pub eve_siphoned: usize,
    pub eve_injected: usize,
    pub eve_zero_outcomes: usize,
    pub eve_outcomes: usize,
    pub eve_reconstructed: Option<Bit>,
    pub eve_guess: Option<Bit>,
}

impl RoundSummary {
    pub fn from_transcript(round: usize, t: &RoundTranscript) -> Self {
        let ones = t.bob_outcomes.iter().filter(|&&b| b == Bit::One).count();
        let (eve_zero_outcomes, eve_outcomes) = t.eve.outcome_counts();
        RoundSummary {
            round,
            theta: t.theta.radians(),
            phi: t.phi.radians(),
            bit: t.bit,
            taps: t.taps.clone(),
            final_intensity: t.final_intensity(),
            zeros: t.bob_outcomes.len() - ones,
            ones,
            recovered: t.recovered_bit,
            intensity_alarm: t.intensity_alarm,
            alignment_alarm: t.alignment_alarm,
            eve_active: t.eve.committed_guess.is_some(),
            eve_siphoned: t.eve.siphoned(),
            eve_injected: t.eve.injected(),
            eve_zero_outcomes,
            eve_outcomes,
            eve_reconstructed: t.eve.recovered_bit_guess,
            eve_guess: t.eve.committed_guess,
        }
    }

    pub fn detected(&self) -> bool {
        self.intensity_alarm || self.alignment_alarm
    }
}

/// The configuration actually used for round `index`, with per-round angles
/// and bit drawn from `rng` as the policies require.
pub fn round_config<R: Rng + ?Sized>(template: &RoundConfig, spec: &SessionSpec, rng: &mut R) -> RoundConfig {
    let mut cfg = template.clone();
    if spec.angle_policy == AnglePolicy::FreshAnglesPerRound {
        cfg.alice_angle = rng.gen_range(0..cfg.angle_set_size);
        cfg.bob_angle = rng.gen_range(0..cfg.angle_set_size);
    }
    if spec.bit_policy == BitPolicy::RandomPerRound {
        cfg.bit = if rng.gen::<bool>() { Bit::One } else { Bit::Zero };
    }
    cfg
}

/// Runs one round of a session on its own substream `(seed, index)`.
pub fn session_round(template: &RoundConfig, spec: &SessionSpec, seed: u64, index: usize) -> Result<RoundTranscript> {
    let mut rng = substream(seed, index as u64);
    let cfg = round_config(template, spec, &mut rng);
    run_round(&cfg, &mut rng)
}

/// Runs every round and returns the per-round summaries in round order.
/// Rounds execute in parallel; results do not depend on the thread count.
pub fn run_session_rounds(template: &RoundConfig, spec: &SessionSpec, seed: u64) -> Result<Vec<RoundSummary>> {
    template.validate()?;
    spec.validate()?;
    (0..spec.rounds)
        .into_par_iter()
        .map(|i| session_round(template, spec, seed, i).map(|t| RoundSummary::from_transcript(i, &t)))
        .collect()
}

pub fn run_session(template: &RoundConfig, spec: &SessionSpec, seed: u64) -> Result<SessionStats> {
    let rounds = run_session_rounds(template, spec, seed)?;
    Ok(SessionStats::from_rounds(&rounds))
}
