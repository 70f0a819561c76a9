use serde::{Deserialize, Serialize};

use crate::protocol::RoundSummary;

/// z for a two-sided 95% normal interval.
pub const Z95: f64 = 1.959963984540054;

/// Normal-approximation 95% halfwidth for a proportion `p` over `n` trials.
pub fn proportion_halfwidth(p: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    Z95 * (p * (1.0 - p) / n as f64).sqrt()
}

fn rate(hits: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        hits as f64 / n as f64
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Halfwidths {
    pub detection_rate: f64,
    pub intensity_alarm_rate: f64,
    pub alignment_alarm_rate: f64,
    pub bit_error_rate_undetected: f64,
    pub undetermined_rate: f64,
    pub eve_accuracy: Option<f64>,
}

/// Aggregate statistics over the rounds of a session.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SessionStats {
    pub rounds: usize,
    /// Fraction of rounds with any alarm.
    pub detection_rate: f64,
    pub intensity_alarm_rate: f64,
    pub alignment_alarm_rate: f64,
    /// Wrong recovered bits among undetected rounds with a determined bit.
    pub bit_error_rate_undetected: f64,
    pub undetermined_rate: f64,
    /// Fraction of rounds where Eve's committed guess equals X.
    pub eve_accuracy: Option<f64>,
    /// Fraction of rounds where Eve's three-pass reconstruction succeeds.
    pub eve_reconstruction_rate: Option<f64>,
    /// Fraction of Eve's individual measurement outcomes equal to 0.
    pub eve_zero_outcome_rate: Option<f64>,
    pub mean_final_intensity: f64,
    pub halfwidths: Halfwidths,
}

impl SessionStats {
    pub fn from_rounds(rounds: &[RoundSummary]) -> Self {
        let n = rounds.len();
        let count = |f: &dyn Fn(&RoundSummary) -> bool| rounds.iter().filter(|r| f(r)).count();

        let detection_rate = rate(count(&|r| r.detected()), n);
        let intensity_alarm_rate = rate(count(&|r| r.intensity_alarm), n);
        let alignment_alarm_rate = rate(count(&|r| r.alignment_alarm), n);
        let undetermined_rate = rate(count(&|r| r.recovered.is_none()), n);

        let decided = count(&|r| !r.detected() && r.recovered.is_some());
        let errors = count(&|r| !r.detected() && r.recovered.is_some_and(|b| b != r.bit));
        let bit_error_rate_undetected = rate(errors, decided);

        let eve_rounds = count(&|r| r.eve_active);
        let (eve_accuracy, eve_reconstruction_rate) = if eve_rounds > 0 {
            (
                Some(rate(count(&|r| r.eve_guess == Some(r.bit)), eve_rounds)),
                Some(rate(count(&|r| r.eve_reconstructed == Some(r.bit)), eve_rounds)),
            )
        } else {
            (None, None)
        };
        let eve_outcomes: usize = rounds.iter().map(|r| r.eve_outcomes).sum();
        let eve_zeros: usize = rounds.iter().map(|r| r.eve_zero_outcomes).sum();
        let eve_zero_outcome_rate = (eve_outcomes > 0).then(|| rate(eve_zeros, eve_outcomes));

        let mean_final_intensity = if n == 0 {
            0.0
        } else {
            rounds.iter().map(|r| r.final_intensity).sum::<f64>() / n as f64
        };

        SessionStats {
            rounds: n,
            detection_rate,
            intensity_alarm_rate,
            alignment_alarm_rate,
            bit_error_rate_undetected,
            undetermined_rate,
            eve_accuracy,
            eve_reconstruction_rate,
            eve_zero_outcome_rate,
            mean_final_intensity,
            halfwidths: Halfwidths {
                detection_rate: proportion_halfwidth(detection_rate, n),
                intensity_alarm_rate: proportion_halfwidth(intensity_alarm_rate, n),
                alignment_alarm_rate: proportion_halfwidth(alignment_alarm_rate, n),
                bit_error_rate_undetected: proportion_halfwidth(bit_error_rate_undetected, decided),
                undetermined_rate: proportion_halfwidth(undetermined_rate, n),
                eve_accuracy: eve_accuracy.map(|a| proportion_halfwidth(a, eve_rounds)),
            },
        }
    }
}
