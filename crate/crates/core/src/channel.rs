//! Beams, beam-splitter taps, link loss and intensity checks.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::PolarizationState;

/// Relative tolerance when comparing tap readings against expectations.
pub const INTENSITY_RTOL: f64 = 1e-12;

/// Where a photon came from. Only the simulator's bookkeeping reads this;
/// protocol parties never branch on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    Legitimate,
    /// Injected by the eavesdropper on the given pass (1, 2 or 3).
    EveInjected {
        pass: u8,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Photon {
    pub state: PolarizationState,
    origin: Origin,
    /// Intensity carried by this photon: always 1 in photon-count mode,
    /// fractional in expected-value mode.
    weight: f64,
}

impl Photon {
    pub fn new(state: PolarizationState, origin: Origin) -> Self {
        Photon {
            state,
            origin,
            weight: 1.0,
        }
    }

    pub fn with_weight(state: PolarizationState, origin: Origin, weight: f64) -> Self {
        Photon { state, origin, weight }
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn is_legitimate(&self) -> bool {
        self.origin == Origin::Legitimate
    }

    fn scaled(mut self, factor: f64) -> Self {
        self.weight *= factor;
        self
    }
}

/// How intensities are accounted for within a session.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntensityMode {
    /// Integer photons; splitters and loss act per photon.
    #[default]
    PhotonCount,
    /// Every photon is kept and carries a real-valued weight, reproducing the
    /// deterministic `I(1-k)^n` bookkeeping.
    ExpectedValue,
}

/// An ordered collection of photons.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Beam {
    pub photons: Vec<Photon>,
}

impl Beam {
    pub fn new(photons: Vec<Photon>) -> Self {
        Beam { photons }
    }

    /// `n` legitimate photons, all in `state`.
    pub fn uniform(state: PolarizationState, n: usize) -> Self {
        Beam {
            photons: vec![Photon::new(state, Origin::Legitimate); n],
        }
    }

    pub fn len(&self) -> usize {
        self.photons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.photons.is_empty()
    }

    /// Total carried intensity: the photon count in photon-count mode.
    pub fn intensity(&self) -> f64 {
        self.photons.iter().map(|p| p.weight).sum()
    }

    pub fn map_states(&mut self, f: impl Fn(PolarizationState) -> PolarizationState) {
        for p in &mut self.photons {
            p.state = f(p.state);
        }
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Photon> {
        self.photons.iter()
    }
}

fn check_fraction(field: &str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::invalid(field, "[0, 1]", value))
    }
}

/// Beam splitter: diverts fraction `k` of the beam into the tapped arm.
///
/// In photon-count mode every photon independently goes to the tapped arm
/// with probability `k`. In expected-value mode both arms keep every photon,
/// with weights scaled by `k` and `1 - k`.
pub fn split<R: Rng + ?Sized>(beam: Beam, k: f64, mode: IntensityMode, rng: &mut R) -> Result<(Beam, Beam)> {
    check_fraction("tap_fraction", k)?;
    if k == 0.0 {
        return Ok((Beam::default(), beam));
    }
    if k == 1.0 {
        return Ok((beam, Beam::default()));
    }
    Ok(match mode {
        IntensityMode::PhotonCount => {
            let (tapped, through) = beam.photons.into_iter().partition(|_| rng.gen::<f64>() < k);
            (Beam::new(tapped), Beam::new(through))
        }
        IntensityMode::ExpectedValue => {
            let tapped = beam.photons.iter().map(|p| p.scaled(k)).collect();
            let through = beam.photons.into_iter().map(|p| p.scaled(1.0 - k)).collect();
            (Beam::new(tapped), Beam::new(through))
        }
    })
}

/// Lossy link: each photon survives with probability `1 - loss`, or every
/// weight is scaled by `1 - loss`.
pub fn transmit<R: Rng + ?Sized>(beam: Beam, loss: f64, mode: IntensityMode, rng: &mut R) -> Result<Beam> {
    check_fraction("loss", loss)?;
    if loss == 0.0 {
        return Ok(beam);
    }
    if loss == 1.0 {
        return Ok(Beam::default());
    }
    Ok(match mode {
        IntensityMode::PhotonCount => {
            Beam::new(beam.photons.into_iter().filter(|_| rng.gen::<f64>() >= loss).collect())
        }
        IntensityMode::ExpectedValue => Beam::new(beam.photons.into_iter().map(|p| p.scaled(1.0 - loss)).collect()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TapStage {
    BobFirst,
    AliceSecond,
    BobThird,
}

impl TapStage {
    pub const ALL: [TapStage; 3] = [TapStage::BobFirst, TapStage::AliceSecond, TapStage::BobThird];
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TapReading {
    pub stage: TapStage,
    pub expected: f64,
    pub observed: f64,
}

/// Returns `true` when the reading passes.
///
/// A detector of resolution `r` flags a beam that is short of its expected
/// intensity by a factor of `r` or more; `r = 1` is an ideal detector that
/// flags any shortfall.
pub fn intensity_check(reading: &TapReading, resolution: f64) -> bool {
    debug_assert!(resolution >= 1.0);
    let tol = INTENSITY_RTOL * reading.expected.abs();
    let short = reading.observed < reading.expected - tol;
    let resolvable = reading.observed * resolution <= reading.expected + tol;
    !(short && resolvable)
}
