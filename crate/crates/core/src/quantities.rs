//! Physical constants, meV ↔ rad/s conversion and the Matsubara ladder.
//!
//! Frequencies are carried in energy units (ħω in meV) everywhere in the
//! crate; they become angular frequencies only where the Lifshitz kernel is
//! made dimensionless.

use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// CODATA 2018 values (all exact in the revised SI).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    /// J/K
    pub boltzmann: f64,
    /// J·s
    pub hbar: f64,
    /// m/s
    pub light_speed: f64,
    /// meV per rad/s, i.e. ħ in meV·s.
    pub mev_per_radps: f64,
}

const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

pub const CODATA: Constants = Constants {
    boltzmann: 1.380_649e-23,
    hbar: 1.054_571_817e-34,
    light_speed: 299_792_458.0,
    mev_per_radps: 6.582_119_569e-13,
};

impl Constants {
    /// Boltzmann constant in meV/K.
    pub fn boltzmann_mev(&self) -> f64 {
        self.boltzmann / ELEMENTARY_CHARGE * 1e3
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FrequencyBasis {
    Matsubara { index: u64, temperature_k: f64 },
    Relaxation,
    Plasma,
}

/// An angular frequency expressed as ħω in meV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyValue {
    pub mev: f64,
    pub basis: FrequencyBasis,
}

impl FrequencyValue {
    pub fn relaxation(mev: f64) -> Self {
        FrequencyValue {
            mev,
            basis: FrequencyBasis::Relaxation,
        }
    }

    pub fn plasma(mev: f64) -> Self {
        FrequencyValue {
            mev,
            basis: FrequencyBasis::Plasma,
        }
    }

    pub fn radps(&self) -> f64 {
        convert_energy_frequency(self.mev)
    }
}

/// ζ_m(T) = 2πkmT/ħ, returned in meV.
pub fn matsubara_frequency(m: u64, temperature_k: f64) -> FrequencyValue {
    debug_assert!(temperature_k >= 0.0);
    let first = 2.0 * PI * CODATA.boltzmann_mev() * temperature_k;
    FrequencyValue {
        mev: m as f64 * first,
        basis: FrequencyBasis::Matsubara {
            index: m,
            temperature_k,
        },
    }
}

/// ħω in meV → ω in rad/s.
pub fn convert_energy_frequency(mev: f64) -> f64 {
    mev / CODATA.mev_per_radps
}

/// ω in rad/s → ħω in meV.
pub fn radps_to_mev(radps: f64) -> f64 {
    radps * CODATA.mev_per_radps
}

/// ζ_1 … ζ_count at temperature `temperature_k`.
pub fn matsubara_ladder(temperature_k: f64, count: usize) -> Result<Vec<FrequencyValue>> {
    if !(temperature_k > 0.0) || !temperature_k.is_finite() {
        return Err(invalid(format!(
            "Matsubara ladder needs T > 0 (got {temperature_k}); use the zero-temperature integral instead"
        )));
    }
    if count == 0 {
        return Err(invalid("Matsubara ladder needs at least one frequency"));
    }
    Ok((1..=count as u64)
        .map(|m| matsubara_frequency(m, temperature_k))
        .collect())
}
