//! Photon bounds, detection probability, Eve's identification budget,
//! session statistics and parameter sweeps.

mod bounds;
mod detection;
mod identification;
mod stats;
mod sweep;

pub use bounds::{detector_bank_budget, min_photons_info_bound, siphon_budget, Budget};
pub use detection::{detection_probability, siphon_detection_exact, ProportionEstimate, MIN_TRIALS};
pub use identification::{identification_rate, min_photons_for_identification, Estimator, IdentificationSweep};
pub use stats::{proportion_halfwidth, Halfwidths, SessionStats, Z95};
pub use sweep::{apply_param, run_sweep, BoundColumns, SweepParam, SweepRow, SweepSpec};
