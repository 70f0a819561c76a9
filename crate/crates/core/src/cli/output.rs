use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{SessionStats, SweepParam, SweepRow};
use crate::channel::TapStage;
use crate::error::{Error, Result};
use crate::protocol::RoundSummary;
use crate::quantum::Bit;

use super::config::ExperimentConfig;

/// Everything needed to reproduce a `run` or `sweep` invocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    /// Seconds since the Unix epoch when the run finished.
    pub timestamp: u64,
    pub config: ExperimentConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSettings>,
    pub outputs: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSettings {
    pub parameter: SweepParam,
    pub grid: Vec<f64>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, config: ExperimentConfig, sweep: Option<SweepSettings>) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            timestamp,
            config,
            sweep,
            outputs: Vec::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// `x` rounded to 9 significant digits, printed in its shortest form.
pub fn fmt_float(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    let mag = rounded.abs();
    if mag != 0.0 && !(1e-6..1e15).contains(&mag) {
        format!("{rounded:e}")
    } else {
        rounded.to_string()
    }
}

fn opt_float(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

fn opt_bit(b: Option<Bit>) -> String {
    b.map(|b| b.to_string()).unwrap_or_default()
}

fn flag(b: bool) -> String {
    (b as u8).to_string()
}

fn stage_prefix(stage: TapStage) -> &'static str {
    match stage {
        TapStage::BobFirst => "tap1_bob",
        TapStage::AliceSecond => "tap2_alice",
        TapStage::BobThird => "tap3_bob",
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

fn write_csv(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_transcripts(path: &Path, rounds: &[RoundSummary]) -> Result<()> {
    let mut header: Vec<String> = ["round", "theta", "phi", "bit"].map(String::from).to_vec();
    for stage in TapStage::ALL {
        let p = stage_prefix(stage);
        header.push(format!("{p}_expected"));
        header.push(format!("{p}_observed"));
    }
    header.extend(
        [
            "final_intensity",
            "zeros",
            "ones",
            "recovered",
            "intensity_alarm",
            "alignment_alarm",
            "eve_siphoned",
            "eve_injected",
            "eve_reconstructed",
            "eve_guess",
        ]
        .map(String::from),
    );

    let rows = rounds.iter().map(|r| {
        let mut row = vec![
            r.round.to_string(),
            fmt_float(r.theta),
            fmt_float(r.phi),
            r.bit.to_string(),
        ];
        for stage in TapStage::ALL {
            let tap = r.taps.iter().find(|t| t.stage == stage);
            row.push(opt_float(tap.map(|t| t.expected)));
            row.push(opt_float(tap.map(|t| t.observed)));
        }
        row.extend([
            fmt_float(r.final_intensity),
            r.zeros.to_string(),
            r.ones.to_string(),
            opt_bit(r.recovered),
            flag(r.intensity_alarm),
            flag(r.alignment_alarm),
            r.eve_siphoned.to_string(),
            r.eve_injected.to_string(),
            opt_bit(r.eve_reconstructed),
            opt_bit(r.eve_guess),
        ]);
        row
    });
    write_csv(path, &header, rows)
}

pub fn write_sweep(path: &Path, parameter: SweepParam, rows: &[SweepRow]) -> Result<()> {
    let header: Vec<String> = [
        "parameter",
        "value",
        "rounds",
        "detection_rate",
        "intensity_alarm_rate",
        "alignment_alarm_rate",
        "bit_error_rate_undetected",
        "undetermined_rate",
        "eve_accuracy",
        "eve_reconstruction_rate",
        "eve_zero_outcome_rate",
        "mean_final_intensity",
        "hw_detection_rate",
        "hw_intensity_alarm_rate",
        "hw_alignment_alarm_rate",
        "hw_bit_error_rate_undetected",
        "hw_undetermined_rate",
        "hw_eve_accuracy",
        "min_photons_info_bound",
        "detector_bank_eve_photons",
        "detector_bank_source_intensity",
    ]
    .map(String::from)
    .to_vec();

    let body = rows.iter().map(|row| {
        let s = &row.stats;
        let h = &s.halfwidths;
        let bound = |f: fn(&crate::analysis::BoundColumns) -> u64| {
            row.bounds.as_ref().map(|b| f(b).to_string()).unwrap_or_default()
        };
        vec![
            parameter.symbol().to_string(),
            fmt_float(row.value),
            s.rounds.to_string(),
            fmt_float(s.detection_rate),
            fmt_float(s.intensity_alarm_rate),
            fmt_float(s.alignment_alarm_rate),
            fmt_float(s.bit_error_rate_undetected),
            fmt_float(s.undetermined_rate),
            opt_float(s.eve_accuracy),
            opt_float(s.eve_reconstruction_rate),
            opt_float(s.eve_zero_outcome_rate),
            fmt_float(s.mean_final_intensity),
            fmt_float(h.detection_rate),
            fmt_float(h.intensity_alarm_rate),
            fmt_float(h.alignment_alarm_rate),
            fmt_float(h.bit_error_rate_undetected),
            fmt_float(h.undetermined_rate),
            opt_float(h.eve_accuracy),
            bound(|b| b.min_photons_info_bound),
            bound(|b| b.detector_bank_eve_photons),
            bound(|b| b.detector_bank_source_intensity),
        ]
    });
    write_csv(path, &header, body)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// One-screen summary of a session.
pub fn summary(stats: &SessionStats) -> String {
    let h = &stats.halfwidths;
    let mut lines = vec![
        format!("rounds                     {}", stats.rounds),
        format!(
            "detection_rate             {} ± {}",
            fmt_float(stats.detection_rate),
            fmt_float(h.detection_rate)
        ),
        format!(
            "intensity_alarm_rate       {} ± {}",
            fmt_float(stats.intensity_alarm_rate),
            fmt_float(h.intensity_alarm_rate)
        ),
        format!(
            "alignment_alarm_rate       {} ± {}",
            fmt_float(stats.alignment_alarm_rate),
            fmt_float(h.alignment_alarm_rate)
        ),
        format!(
            "BER (undetected rounds)    {} ± {}",
            fmt_float(stats.bit_error_rate_undetected),
            fmt_float(h.bit_error_rate_undetected)
        ),
        format!("undetermined_rate          {}", fmt_float(stats.undetermined_rate)),
        format!("mean_final_intensity       {}", fmt_float(stats.mean_final_intensity)),
    ];
    if let Some(a) = stats.eve_accuracy {
        lines.push(format!(
            "eve_accuracy               {} ± {}",
            fmt_float(a),
            opt_float(h.eve_accuracy)
        ));
    }
    if let Some(r) = stats.eve_reconstruction_rate {
        lines.push(format!("eve_reconstruction_rate    {}", fmt_float(r)));
    }
    lines.join("\n")
}

pub fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
