//! Linear-polarization qubits, planar rotations and Born-rule measurement.
//!
//! A state is carried as a single real angle ψ standing for
//! `cos ψ |0⟩ + sin ψ |1⟩`. Every operator the protocols use is a rotation in
//! the same plane, so composition is angle addition and inverses are exact.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Tolerance for angle comparisons after canonicalization.
pub const ANGLE_EPS: f64 = 1e-12;

/// Born probabilities below this are treated as exactly zero, so a state that
/// is orthogonal up to round-off never yields the forbidden outcome.
const BORN_FLOOR: f64 = ANGLE_EPS * ANGLE_EPS;

/// An angle in radians, canonicalized to `[0, 2π)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(from = "f64", into = "f64")]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);
    pub const QUARTER_TURN: Angle = Angle(FRAC_PI_2);

    pub fn new(radians: f64) -> Self {
        let r = radians.rem_euclid(TAU);
        // rem_euclid can round up to exactly 2π for tiny negative inputs.
        Angle(if r >= TAU { 0.0 } else { r })
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    /// Shortest distance on the circle modulo `period`.
    fn circular_distance(self, other: Angle, period: f64) -> f64 {
        let d = (self.0 - other.0).rem_euclid(period);
        d.min(period - d)
    }

    /// Equality modulo 2π, within [`ANGLE_EPS`].
    pub fn approx_eq(self, other: Angle) -> bool {
        self.circular_distance(other, TAU) <= ANGLE_EPS
    }

    /// Equality modulo π: the two angles describe the same polarization and
    /// have identical measurement statistics.
    pub fn polarization_eq(self, other: Angle) -> bool {
        self.circular_distance(other, PI) <= ANGLE_EPS
    }

    /// Representative of the angle modulo π, in `[0, π)`.
    pub fn mod_pi(self) -> f64 {
        let r = self.0.rem_euclid(PI);
        if PI - r <= ANGLE_EPS {
            0.0
        } else {
            r
        }
    }
}

impl From<f64> for Angle {
    fn from(radians: f64) -> Self {
        Angle::new(radians)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

impl Neg for Angle {
    type Output = Angle;

    fn neg(self) -> Angle {
        Angle::new(-self.0)
    }
}

impl Add for Angle {
    type Output = Angle;

    fn add(self, other: Angle) -> Angle {
        Angle::new(self.0 + other.0)
    }
}

impl Sub for Angle {
    type Output = Angle;

    fn sub(self, other: Angle) -> Angle {
        Angle::new(self.0 - other.0)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A classical bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Bit {
    Zero,
    One,
}

impl Bit {
    pub fn as_u8(self) -> u8 {
        match self {
            Bit::Zero => 0,
            Bit::One => 1,
        }
    }

    pub fn flip(self) -> Bit {
        match self {
            Bit::Zero => Bit::One,
            Bit::One => Bit::Zero,
        }
    }
}

impl TryFrom<u8> for Bit {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            0 => Ok(Bit::Zero),
            1 => Ok(Bit::One),
            other => Err(format!("bit must be 0 or 1, got {other}")),
        }
    }
}

impl From<Bit> for u8 {
    fn from(b: Bit) -> u8 {
        b.as_u8()
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// A pure linear-polarization state `cos ψ |0⟩ + sin ψ |1⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarizationState {
    psi: Angle,
}

impl PolarizationState {
    pub fn new(psi: Angle) -> Self {
        PolarizationState { psi }
    }

    pub fn psi(self) -> Angle {
        self.psi
    }

    pub fn rotate(self, op: RotationOp) -> Self {
        rotate(self, op)
    }

    pub fn approx_eq(self, other: PolarizationState) -> bool {
        self.psi.approx_eq(other.psi)
    }
}

/// The planar rotation `R(θ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationOp {
    pub theta: Angle,
}

impl RotationOp {
    pub fn new(theta: Angle) -> Self {
        RotationOp { theta }
    }

    pub fn inverse(self) -> Self {
        RotationOp { theta: -self.theta }
    }

    /// `R(θ)·R(φ) = R(θ + φ)`.
    pub fn compose(self, other: RotationOp) -> Self {
        RotationOp {
            theta: self.theta + other.theta,
        }
    }

    /// The 2×2 matrix form, used only to cross-check the angle algebra.
    pub fn matrix(self) -> [[f64; 2]; 2] {
        let (s, c) = self.theta.radians().sin_cos();
        [[c, -s], [s, c]]
    }
}

pub fn rotate(state: PolarizationState, op: RotationOp) -> PolarizationState {
    PolarizationState::new(state.psi + op.theta)
}

/// The orthogonal encoding: 0 ↦ ψ = 0, 1 ↦ ψ = π/2.
pub fn bit_to_state(x: Bit) -> PolarizationState {
    match x {
        Bit::Zero => PolarizationState::new(Angle::ZERO),
        Bit::One => PolarizationState::new(Angle::QUARTER_TURN),
    }
}

/// Probability that measuring `state` in `basis` yields 0, i.e. `cos²(ψ − α)`.
pub fn prob_zero(state: PolarizationState, basis: Angle) -> f64 {
    let c = (state.psi.radians() - basis.radians()).cos();
    let p = c * c;
    if p < BORN_FLOOR {
        0.0
    } else if 1.0 - p < BORN_FLOOR {
        1.0
    } else {
        p
    }
}

/// Born-rule measurement consuming exactly one uniform draw.
pub fn measure<R: Rng + ?Sized>(state: PolarizationState, basis: Angle, rng: &mut R) -> Bit {
    let u: f64 = rng.gen();
    if u < prob_zero(state, basis) {
        Bit::Zero
    } else {
        Bit::One
    }
}

/// As [`measure`], also returning the collapsed state (aligned to `basis` or
/// `basis + π/2`).
pub fn measure_collapse<R: Rng + ?Sized>(
    state: PolarizationState,
    basis: Angle,
    rng: &mut R,
) -> (Bit, PolarizationState) {
    let bit = measure(state, basis, rng);
    let post = match bit {
        Bit::Zero => basis,
        Bit::One => basis + Angle::QUARTER_TURN,
    };
    (bit, PolarizationState::new(post))
}
