//! Closed-form photon budgets for the eavesdropper and the source.

use serde::Serialize;

use crate::error::{Error, Result};

/// Eve's photon requirement and the source intensity at which siphoning
/// that many photons halves the beam.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Budget {
    pub eve_photons: u64,
    pub safe_source_intensity: u64,
}

fn check_s(s: u64) -> Result<()> {
    if s < 2 {
        return Err(Error::invalid("s", ">= 2", s));
    }
    Ok(())
}

/// `⌈3·log₂ s⌉`: the information-theoretic minimum number of photons Eve must
/// siphon over the three passes to tell `s` rotation angles apart.
pub fn min_photons_info_bound(s: u64) -> Result<u64> {
    check_s(s)?;
    // ⌈log₂ s³⌉ in integers, exact for every s whose cube fits in u128.
    if let Some(cube) = (s as u128).checked_pow(3) {
        return Ok(u128::BITS as u64 - (cube - 1).leading_zeros() as u64);
    }
    Ok((3.0 * (s as f64).log2()).ceil() as u64)
}

/// One detector per polarization: Eve needs `3s` photons, and a source of
/// `6s` photons makes that loss a halving.
pub fn detector_bank_budget(s: u64) -> Result<Budget> {
    check_s(s)?;
    Ok(Budget {
        eve_photons: 3 * s,
        safe_source_intensity: 6 * s,
    })
}

/// `m` photons per pass: `3m` in total against a source of `6m`.
pub fn siphon_budget(m: u64) -> Result<Budget> {
    if m < 1 {
        return Err(Error::invalid("m", ">= 1", m));
    }
    Ok(Budget {
        eve_photons: 3 * m,
        safe_source_intensity: 6 * m,
    })
}
