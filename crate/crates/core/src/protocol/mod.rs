//! The K06 and iAQC protocol engines.
//!
//! A round moves one beam through the three transmissions: Alice rotates by
//! θ, Bob by ϕ, Alice undoes θ, Bob undoes ϕ and measures. In iAQC each
//! receiver first diverts a fraction of the incoming beam to an intensity
//! detector and compares it against what the announced source intensity
//! implies.

mod config;
pub mod ledger;
mod round;
mod session;

pub use config::{AngleSet, RoundConfig, Variant};
pub use round::{decide_bit, run_iaqc_round, run_k06_round, run_round, run_round_traced, RoundTranscript};
pub use session::{
    round_config, run_session, run_session_rounds, session_round, AnglePolicy, BitPolicy, RoundSummary, SessionSpec,
};
