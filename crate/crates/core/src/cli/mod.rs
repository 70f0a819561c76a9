//! The `iaqc` command-line front end.

mod config;
mod output;

pub use config::{parse_grid, ExperimentConfig};
pub use output::{fmt_float, RunManifest, SweepSettings};

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;

use crate::adversary::{AdversarySpec, InjectPolicy, PassSet, Strategy, Take};
use crate::analysis::{
    detector_bank_budget, min_photons_info_bound, run_sweep, siphon_budget, SessionStats, SweepParam, SweepSpec,
};
use crate::channel::IntensityMode;
use crate::error::{Error, Result};
use crate::protocol::{ledger, run_round_traced, run_session_rounds, RoundConfig, RoundTranscript};
use crate::quantum::Bit;
use crate::rng::substream;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "iaqc",
    version,
    about = "Photon-level simulator for three-pass rotation key exchange"
)]
struct Cli {
    /// Master seed; drawn from system entropy when absent.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (defaults to one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the intensity mode of the config.
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Photon,
    Expected,
}

impl From<ModeArg> for IntensityMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Photon => IntensityMode::PhotonCount,
            ModeArg::Expected => IntensityMode::ExpectedValue,
        }
    }
}

#[derive(Args, Debug)]
struct Source {
    /// TOML config file.
    #[arg(long, conflicts_with = "manifest")]
    config: Option<PathBuf>,
    /// Replays the config and seed recorded in a manifest.json.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Overrides the number of rounds.
    #[arg(long)]
    rounds: Option<usize>,
    /// Dotted-key override, e.g. `--set round.tap_fraction=0.05`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a session and write stats.json, transcripts.csv and manifest.json.
    Run(Source),
    /// Run a session per grid value of one parameter and write sweep.csv.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// Parameter to sweep: k, g, I, s, r or loss.
        #[arg(long)]
        sweep: Option<String>,
        /// `start:stop:step` or a comma-separated list.
        #[arg(long)]
        grid: Option<String>,
    },
    /// Print the photon ledger of a six-photon round under siphon-and-inject.
    Table1 {
        /// Run without Eve.
        #[arg(long)]
        no_eve: bool,
    },
    /// Print the photon-count bounds for `s` angles and `m` photons per pass.
    Bounds {
        /// Size of the angle set
        #[arg(long)]
        s: u64,
        /// Photons Eve siphons per pass
        #[arg(long)]
        m: u64,
    },
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let pool = match cli.threads {
        Some(0) => {
            eprintln!("error: --threads must be >= 1");
            return EXIT_CONFIG;
        }
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_IO;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                EXIT_CONFIG
            } else {
                EXIT_IO
            }
        }
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run(source) => cmd_run(cli, source),
        Command::Sweep { source, sweep, grid } => cmd_sweep(cli, source, sweep.as_deref(), grid.as_deref()),
        Command::Table1 { no_eve } => {
            print!(
                "{}",
                table1(cli.seed.unwrap_or_else(|| rand::thread_rng().gen()), *no_eve)?
            );
            Ok(())
        }
        Command::Bounds { s, m } => {
            print!("{}", bounds_report(*s, *m)?);
            Ok(())
        }
    }
}

struct Resolved {
    config: ExperimentConfig,
    seed: u64,
    manifest: Option<RunManifest>,
}

fn resolve(cli: &Cli, source: &Source) -> Result<Resolved> {
    let (mut config, manifest) = match (&source.config, &source.manifest) {
        (_, Some(path)) => {
            let m = RunManifest::load(path)?;
            let text = m.config.to_toml()?;
            (ExperimentConfig::from_toml_with(&text, &source.overrides)?, Some(m))
        }
        (Some(path), None) => (ExperimentConfig::load(path, &source.overrides)?, None),
        (None, None) => (ExperimentConfig::from_toml_with("", &source.overrides)?, None),
    };
    if let Some(n) = source.rounds {
        config.session.rounds = n;
    }
    if let Some(mode) = cli.mode {
        config.round.mode = mode.into();
    }
    config.validate()?;
    let seed = cli
        .seed
        .or(manifest.as_ref().map(|m| m.seed))
        .unwrap_or_else(|| rand::thread_rng().gen());
    Ok(Resolved { config, seed, manifest })
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn cmd_run(cli: &Cli, source: &Source) -> Result<()> {
    let Resolved { config, seed, .. } = resolve(cli, source)?;
    let rounds = run_session_rounds(&config.round, &config.session, seed)?;
    let stats = SessionStats::from_rounds(&rounds);

    prepare_out(&cli.out)?;
    let stats_path = output::out_path(&cli.out, "stats.json");
    let csv_path = output::out_path(&cli.out, "transcripts.csv");
    output::write_json(&stats_path, &stats)?;
    output::write_transcripts(&csv_path, &rounds)?;
    let mut manifest = RunManifest::new("run", seed, config, None);
    manifest.outputs = vec![stats_path.display().to_string(), csv_path.display().to_string()];
    output::write_json(&output::out_path(&cli.out, "manifest.json"), &manifest)?;

    println!("seed                       {seed}");
    println!("{}", output::summary(&stats));
    println!("wrote {}", cli.out.display());
    Ok(())
}

fn cmd_sweep(cli: &Cli, source: &Source, sweep: Option<&str>, grid: Option<&str>) -> Result<()> {
    let Resolved { config, seed, manifest } = resolve(cli, source)?;
    let recorded = manifest.and_then(|m| m.sweep);
    let parameter: SweepParam = match (sweep, &recorded) {
        (Some(p), _) => p.parse().map_err(|e: Error| Error::Config(e.to_string()))?,
        (None, Some(s)) => s.parameter,
        (None, None) => return Err(Error::Config("--sweep is required".into())),
    };
    let grid = match (grid, &recorded) {
        (Some(g), _) => parse_grid(g)?,
        (None, Some(s)) => s.grid.clone(),
        (None, None) => return Err(Error::Config("--grid is required".into())),
    };
    let spec = SweepSpec {
        parameter,
        grid: grid.clone(),
        session: config.session,
        template: config.round.clone(),
    };
    let rows = run_sweep(&spec, seed)?;

    prepare_out(&cli.out)?;
    let csv_path = output::out_path(&cli.out, "sweep.csv");
    output::write_sweep(&csv_path, parameter, &rows)?;
    let mut manifest = RunManifest::new("sweep", seed, config, Some(SweepSettings { parameter, grid }));
    manifest.outputs = vec![csv_path.display().to_string()];
    output::write_json(&output::out_path(&cli.out, "manifest.json"), &manifest)?;

    println!("seed {seed}, {} rows over {parameter}", rows.len());
    for row in &rows {
        println!(
            "{parameter} = {:<10} detection_rate = {} ± {}",
            fmt_float(row.value),
            fmt_float(row.stats.detection_rate),
            fmt_float(row.stats.halfwidths.detection_rate)
        );
    }
    println!("wrote {}", csv_path.display());
    Ok(())
}

/// Round configuration for the six-photon ledger: θ, ϕ and X drawn from
/// `seed`, Eve swapping one photon per link unless `no_eve`.
pub fn table1_config(seed: u64, no_eve: bool) -> RoundConfig {
    let mut rng = substream(seed, 0);
    let s = 4;
    RoundConfig {
        source_intensity: 6,
        tap_fraction: 0.0,
        angle_set_size: s,
        alice_angle: rng.gen_range(0..s),
        bob_angle: rng.gen_range(0..s),
        bit: if rng.gen::<bool>() { Bit::One } else { Bit::Zero },
        adversary: if no_eve {
            AdversarySpec::none()
        } else {
            AdversarySpec::new(
                Strategy::SiphonInject {
                    take: Take::Count(1),
                    inject: InjectPolicy::Uniform,
                },
                PassSet::ALL,
            )
        },
        ..RoundConfig::default()
    }
}

/// The traced round behind `table1`.
pub fn table1_transcript(seed: u64, no_eve: bool) -> Result<RoundTranscript> {
    run_round_traced(&table1_config(seed, no_eve), &mut substream(seed, 1))
}

/// Rendered ledger for [`table1_config`].
pub fn table1(seed: u64, no_eve: bool) -> Result<String> {
    let cfg = table1_config(seed, no_eve);
    let t = table1_transcript(seed, no_eve)?;
    let angles = cfg.angle_set()?;
    let theta = angles.angles()[cfg.alice_angle];
    let phi = angles.angles()[cfg.bob_angle];
    Ok(format!(
        "seed = {seed}, θ = {}, ϕ = {}\n\n{}",
        fmt_float(theta.radians()),
        fmt_float(phi.radians()),
        ledger::render(&t)
    ))
}

pub fn bounds_report(s: u64, m: u64) -> Result<String> {
    if s < 2 {
        return Err(Error::invalid("s", ">= 2", s));
    }
    if m < 1 {
        return Err(Error::invalid("m", ">= 1", m));
    }
    let info = min_photons_info_bound(s)?;
    let bank = detector_bank_budget(s)?;
    let siphon = siphon_budget(m)?;
    Ok(format!(
        "min_photons_info_bound(s={s}) = {info}\n\
         detector_bank_budget(s={s}) = ({}, {})\n\
         siphon_budget(m={m}) = ({}, {})\n",
        bank.eve_photons, bank.safe_source_intensity, siphon.eve_photons, siphon.safe_source_intensity
    ))
}
