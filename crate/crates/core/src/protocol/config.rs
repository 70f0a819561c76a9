use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::adversary::AdversarySpec;
use crate::channel::IntensityMode;
use crate::error::{Error, Result};
use crate::quantum::{Angle, Bit};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    K06,
    #[default]
    Iaqc,
}

/// The finite set of secret rotation angles Alice and Bob draw from.
#[derive(Clone, Debug, PartialEq)]
pub struct AngleSet {
    angles: Vec<Angle>,
}

impl AngleSet {
    /// The uniform grid `j·π/s`, `j = 0..s`.
    pub fn uniform(s: usize) -> Result<Self> {
        if s < 2 {
            return Err(Error::invalid("angle_set_size", ">= 2", s));
        }
        Ok(AngleSet {
            angles: (0..s).map(|j| Angle::new(j as f64 * PI / s as f64)).collect(),
        })
    }

    /// An explicit angle list; members must be pairwise distinct modulo π.
    pub fn custom(angles: &[f64]) -> Result<Self> {
        if angles.len() < 2 {
            return Err(Error::invalid("custom_angles", "at least 2 angles", angles.len()));
        }
        let angles: Vec<Angle> = angles.iter().map(|&a| Angle::new(a)).collect();
        for (i, a) in angles.iter().enumerate() {
            if angles[..i].iter().any(|b| a.polarization_eq(*b)) {
                return Err(Error::invalid(
                    "custom_angles",
                    "angles pairwise distinct modulo pi",
                    a.radians(),
                ));
            }
        }
        Ok(AngleSet { angles })
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn angles(&self) -> &[Angle] {
        &self.angles
    }

    pub fn get(&self, i: usize) -> Option<Angle> {
        self.angles.get(i).copied()
    }

    /// Every polarization a transmitted photon can carry: `X + angle` for
    /// `X ∈ {0, π/2}`, reduced modulo π and sorted ascending. This is the
    /// hypothesis space for an eavesdropper estimating a pass's state.
    pub fn state_candidates(&self) -> AngleSet {
        let mut reps: Vec<f64> = Vec::with_capacity(2 * self.len());
        for a in &self.angles {
            for shift in [0.0, FRAC_PI_2] {
                let r = Angle::new(a.radians() + shift).mod_pi();
                if !reps.iter().any(|&x| Angle::new(x).polarization_eq(Angle::new(r))) {
                    reps.push(r);
                }
            }
        }
        reps.sort_by(f64::total_cmp);
        AngleSet {
            angles: reps.into_iter().map(Angle::new).collect(),
        }
    }
}

/// Every knob for one protocol round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoundConfig {
    pub variant: Variant,
    /// Publicly announced source intensity, in photons.
    pub source_intensity: u64,
    pub tap_fraction: f64,
    /// Alice's tap fraction when it differs from Bob's.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alice_tap_fraction: Option<f64>,
    pub angle_set_size: usize,
    /// Overrides the uniform grid; must have `angle_set_size` entries.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub custom_angles: Option<Vec<f64>>,
    /// Index of Alice's rotation in the angle set.
    pub alice_angle: usize,
    pub bob_angle: usize,
    pub bit: Bit,
    /// Loss per link.
    pub loss: f64,
    pub detector_resolution: f64,
    pub mode: IntensityMode,
    /// With `false` no taps are taken and the round reduces to K06.
    pub track_intensity: bool,
    pub adversary: AdversarySpec,
}

impl Default for RoundConfig {
    fn default() -> Self {
        RoundConfig {
            variant: Variant::Iaqc,
            source_intensity: 1000,
            tap_fraction: 0.1,
            alice_tap_fraction: None,
            angle_set_size: 4,
            custom_angles: None,
            alice_angle: 0,
            bob_angle: 0,
            bit: Bit::Zero,
            loss: 0.0,
            detector_resolution: 1.0,
            mode: IntensityMode::PhotonCount,
            track_intensity: true,
            adversary: AdversarySpec::default(),
        }
    }
}

fn check_tap(field: &str, k: f64) -> Result<()> {
    if (0.0..1.0).contains(&k) {
        Ok(())
    } else {
        Err(Error::invalid(field, "[0, 1)", k))
    }
}

impl RoundConfig {
    pub fn validate(&self) -> Result<()> {
        if self.source_intensity < 1 {
            return Err(Error::invalid("source_intensity", ">= 1", self.source_intensity));
        }
        check_tap("tap_fraction", self.tap_fraction)?;
        if let Some(k) = self.alice_tap_fraction {
            check_tap("alice_tap_fraction", k)?;
        }
        let set = self.angle_set()?;
        if self.alice_angle >= set.len() {
            return Err(Error::invalid(
                "alice_angle",
                format!("[0, {})", set.len()),
                self.alice_angle,
            ));
        }
        if self.bob_angle >= set.len() {
            return Err(Error::invalid(
                "bob_angle",
                format!("[0, {})", set.len()),
                self.bob_angle,
            ));
        }
        if !(0.0..=1.0).contains(&self.loss) {
            return Err(Error::invalid("loss", "[0, 1]", self.loss));
        }
        if !(self.detector_resolution >= 1.0 && self.detector_resolution.is_finite()) {
            return Err(Error::invalid(
                "detector_resolution",
                "[1, inf)",
                self.detector_resolution,
            ));
        }
        self.adversary.validate()
    }

    pub fn angle_set(&self) -> Result<AngleSet> {
        match &self.custom_angles {
            None => AngleSet::uniform(self.angle_set_size),
            Some(angles) => {
                if angles.len() != self.angle_set_size {
                    return Err(Error::invalid(
                        "custom_angles",
                        format!("exactly angle_set_size = {} entries", self.angle_set_size),
                        angles.len(),
                    ));
                }
                AngleSet::custom(angles)
            }
        }
    }

    pub fn bob_tap(&self) -> f64 {
        self.tap_fraction
    }

    pub fn alice_tap(&self) -> f64 {
        self.alice_tap_fraction.unwrap_or(self.tap_fraction)
    }
}
