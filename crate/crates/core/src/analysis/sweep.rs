use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::bounds::{detector_bank_budget, min_photons_info_bound};
use super::stats::SessionStats;
use crate::adversary::{Strategy, Take};
use crate::error::{Error, Result};
use crate::protocol::{run_session, RoundConfig, SessionSpec};
use crate::rng::child_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "k")]
    TapFraction,
    #[serde(rename = "g")]
    SiphonFraction,
    #[serde(rename = "I")]
    SourceIntensity,
    #[serde(rename = "s")]
    AngleSetSize,
    #[serde(rename = "r")]
    DetectorResolution,
    #[serde(rename = "loss")]
    Loss,
}

impl SweepParam {
    pub fn symbol(self) -> &'static str {
        match self {
            SweepParam::TapFraction => "k",
            SweepParam::SiphonFraction => "g",
            SweepParam::SourceIntensity => "I",
            SweepParam::AngleSetSize => "s",
            SweepParam::DetectorResolution => "r",
            SweepParam::Loss => "loss",
        }
    }

    /// Config field the parameter writes to.
    pub fn field(self) -> &'static str {
        match self {
            SweepParam::TapFraction => "tap_fraction",
            SweepParam::SiphonFraction => "adversary.strategy.take.fraction",
            SweepParam::SourceIntensity => "source_intensity",
            SweepParam::AngleSetSize => "angle_set_size",
            SweepParam::DetectorResolution => "detector_resolution",
            SweepParam::Loss => "loss",
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "k" => SweepParam::TapFraction,
            "g" => SweepParam::SiphonFraction,
            "I" => SweepParam::SourceIntensity,
            "s" => SweepParam::AngleSetSize,
            "r" => SweepParam::DetectorResolution,
            "loss" => SweepParam::Loss,
            other => return Err(Error::invalid("sweep parameter", "one of k, g, I, s, r, loss", other)),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: SweepParam,
    pub grid: Vec<f64>,
    pub session: SessionSpec,
    pub template: RoundConfig,
}

/// Photon bounds attached to rows of an `s` sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundColumns {
    pub min_photons_info_bound: u64,
    pub detector_bank_eve_photons: u64,
    pub detector_bank_source_intensity: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub stats: SessionStats,
    pub bounds: Option<BoundColumns>,
}

fn integral(value: f64, min: f64) -> Option<u64> {
    (value.fract() == 0.0 && value >= min && value <= u32::MAX as f64).then_some(value as u64)
}

/// The template with `param` set to `value`, validated.
pub fn apply_param(template: &RoundConfig, param: SweepParam, value: f64) -> Result<RoundConfig> {
    let bad = |reason: String| Error::Config(format!("grid value {value} for {param} is invalid: {reason}"));
    let mut cfg = template.clone();
    match param {
        SweepParam::TapFraction => cfg.tap_fraction = value,
        SweepParam::SiphonFraction => {
            if !(0.0..=1.0).contains(&value) {
                return Err(bad(format!("{} must be in [0, 1]", param.field())));
            }
            cfg.adversary.strategy = match cfg.adversary.strategy {
                Strategy::SiphonInject { inject, .. } => Strategy::SiphonInject {
                    take: Take::Fraction(value),
                    inject,
                },
                _ => Strategy::Siphon {
                    take: Take::Fraction(value),
                },
            };
        }
        SweepParam::SourceIntensity => {
            cfg.source_intensity =
                integral(value, 1.0).ok_or_else(|| bad("source_intensity must be an integer >= 1".into()))?;
        }
        SweepParam::AngleSetSize => {
            let s = integral(value, 2.0).ok_or_else(|| bad("angle_set_size must be an integer >= 2".into()))? as usize;
            if cfg.custom_angles.is_some() {
                return Err(bad("cannot sweep angle_set_size with custom_angles set".into()));
            }
            cfg.angle_set_size = s;
            cfg.alice_angle %= s;
            cfg.bob_angle %= s;
        }
        SweepParam::DetectorResolution => cfg.detector_resolution = value,
        SweepParam::Loss => cfg.loss = value,
    }
    cfg.validate().map_err(|e| bad(e.to_string()))?;
    Ok(cfg)
}

/// Runs a session at every grid point. Point `p` uses the child seed
/// `(seed, p)`, so rows are reproducible and independent of each other.
pub fn run_sweep(spec: &SweepSpec, seed: u64) -> Result<Vec<SweepRow>> {
    if spec.grid.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    spec.session.validate()?;
    let configs = spec
        .grid
        .iter()
        .map(|&v| apply_param(&spec.template, spec.parameter, v))
        .collect::<Result<Vec<_>>>()?;

    configs
        .iter()
        .zip(&spec.grid)
        .enumerate()
        .map(|(p, (cfg, &value))| {
            let stats = run_session(cfg, &spec.session, child_seed(seed, p as u64))?;
            let bounds = if spec.parameter == SweepParam::AngleSetSize {
                let s = cfg.angle_set_size as u64;
                let bank = detector_bank_budget(s)?;
                Some(BoundColumns {
                    min_photons_info_bound: min_photons_info_bound(s)?,
                    detector_bank_eve_photons: bank.eve_photons,
                    detector_bank_source_intensity: bank.safe_source_intensity,
                })
            } else {
                None
            };
            Ok(SweepRow { value, stats, bounds })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::AnglePolicy;

    fn spec(parameter: SweepParam, grid: Vec<f64>) -> SweepSpec {
        SweepSpec {
            parameter,
            grid,
            session: SessionSpec::new(50, AnglePolicy::FreshAnglesPerRound),
            template: RoundConfig {
                source_intensity: 100,
                ..RoundConfig::default()
            },
        }
    }

    #[test]
    fn honest_tap_sweep_never_detects() {
        let rows = run_sweep(&spec(SweepParam::TapFraction, vec![0.0, 0.05, 0.1]), 3).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.stats.detection_rate == 0.0));
    }

    #[test]
    fn angle_sweep_carries_bounds() {
        let rows = run_sweep(&spec(SweepParam::AngleSetSize, vec![2.0, 4.0, 8.0]), 3).unwrap();
        let info: Vec<u64> = rows.iter().map(|r| r.bounds.unwrap().min_photons_info_bound).collect();
        let bank: Vec<u64> = rows
            .iter()
            .map(|r| r.bounds.unwrap().detector_bank_eve_photons)
            .collect();
        assert_eq!(info, vec![3, 6, 9]);
        assert_eq!(bank, vec![6, 12, 24]);
    }

    #[test]
    fn invalid_grid_value_is_named() {
        let err = run_sweep(&spec(SweepParam::TapFraction, vec![0.1, 1.5]), 0).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("1.5") && msg.contains("tap_fraction"), "{msg}");
        assert!(run_sweep(&spec(SweepParam::AngleSetSize, vec![2.5]), 0).is_err());
        assert!(run_sweep(&spec(SweepParam::SourceIntensity, vec![0.0]), 0).is_err());
        assert!(run_sweep(&spec(SweepParam::Loss, vec![]), 0).is_err());
    }

    #[test]
    fn deterministic() {
        let s = spec(SweepParam::SiphonFraction, vec![0.0, 0.01]);
        assert_eq!(run_sweep(&s, 8).unwrap(), run_sweep(&s, 8).unwrap());
    }

    #[test]
    fn param_names_round_trip() {
        for p in ["k", "g", "I", "s", "r", "loss"] {
            assert_eq!(p.parse::<SweepParam>().unwrap().symbol(), p);
        }
        assert!("x".parse::<SweepParam>().is_err());
    }
}
