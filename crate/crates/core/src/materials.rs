//! Relaxation-frequency models ν(T) and the Drude/plasma permittivities on
//! the imaginary frequency axis.

use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate, Tolerance};
use crate::quantities::FrequencyValue;
use serde::{Deserialize, Serialize};

/// Debye temperature of gold, K.
pub const GOLD_DEBYE_K: f64 = 165.0;
/// Room-temperature relaxation frequency of gold, meV.
pub const GOLD_NU_300K_MEV: f64 = 34.5;
/// Residual relaxation of typical gold samples, meV.
pub const GOLD_NU0_TYPICAL_MEV: f64 = 34.5e-3;
/// Residual relaxation of the purest gold samples, meV.
pub const GOLD_NU0_BEST_MEV: f64 = 34.5e-6;
/// Plasma frequency of gold (9.0 eV), meV.
pub const GOLD_OMEGA_P_MEV: f64 = 9000.0;

// 5! ζ(5): the Bloch–Grüneisen integral over [0, ∞).
#[allow(clippy::excessive_precision)]
const BG_INTEGRAL_INF: f64 = 124.431_330_617_204_39;
const BG_ANALYTIC_TAIL_FROM: f64 = 50.0;
const BG_QUAD_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "variant")]
pub enum RelaxationModel {
    /// Temperature-independent ν₀.
    Constant { nu0_mev: f64 },
    /// Phonon scattering in a perfect lattice, normalized so that
    /// ν(calib_k) = calib_mev.
    BlochGruneisen { debye_k: f64, calib_k: f64, calib_mev: f64 },
    /// Bloch–Grüneisen phonon term plus an impurity floor ν₀
    /// (Matthiessen's rule).
    BlochGruneisenResidual {
        debye_k: f64,
        calib_k: f64,
        calib_mev: f64,
        nu0_mev: f64,
    },
}

impl RelaxationModel {
    /// Perfect gold lattice: T_D = 165 K, ν(300 K) = 34.5 meV.
    pub fn gold_perfect_lattice() -> Self {
        RelaxationModel::BlochGruneisen {
            debye_k: GOLD_DEBYE_K,
            calib_k: 300.0,
            calib_mev: GOLD_NU_300K_MEV,
        }
    }

    pub fn gold_with_residual(nu0_mev: f64) -> Self {
        RelaxationModel::BlochGruneisenResidual {
            debye_k: GOLD_DEBYE_K,
            calib_k: 300.0,
            calib_mev: GOLD_NU_300K_MEV,
            nu0_mev,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite_nonneg = |x: f64| x.is_finite() && x >= 0.0;
        let finite_pos = |x: f64| x.is_finite() && x > 0.0;
        match *self {
            RelaxationModel::Constant { nu0_mev } => {
                if !finite_pos(nu0_mev) {
                    return Err(invalid(format!(
                        "constant relaxation needs ν₀ > 0 (got {nu0_mev}); use bloch_gruneisen for a perfect lattice"
                    )));
                }
            }
            RelaxationModel::BlochGruneisen {
                debye_k,
                calib_k,
                calib_mev,
            }
            | RelaxationModel::BlochGruneisenResidual {
                debye_k,
                calib_k,
                calib_mev,
                ..
            } => {
                if !finite_pos(debye_k) || !finite_pos(calib_k) {
                    return Err(invalid("Debye and calibration temperatures must be > 0"));
                }
                if !finite_pos(calib_mev) {
                    return Err(invalid("calibration relaxation frequency must be > 0"));
                }
            }
        }
        if let RelaxationModel::BlochGruneisenResidual { nu0_mev, .. } = *self {
            if !finite_nonneg(nu0_mev) {
                return Err(invalid(format!("residual ν₀ must be ≥ 0 (got {nu0_mev})")));
            }
        }
        Ok(())
    }

    /// The T → 0 limit ν(0): the residual value, or 0 for a perfect lattice.
    pub fn residual_mev(&self) -> f64 {
        match *self {
            RelaxationModel::Constant { nu0_mev } => nu0_mev,
            RelaxationModel::BlochGruneisen { .. } => 0.0,
            RelaxationModel::BlochGruneisenResidual { nu0_mev, .. } => nu0_mev,
        }
    }

    pub fn is_temperature_dependent(&self) -> bool {
        !matches!(self, RelaxationModel::Constant { .. })
    }
}

/// J₅(x) = ∫₀ˣ t⁵eᵗ/(eᵗ−1)² dt.
pub(crate) fn bloch_gruneisen_integral(x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x > BG_ANALYTIC_TAIL_FROM {
        // ∫ₓ^∞ ≈ Γ(6, x); the next term of the series is O(e^{-2x}).
        let poly = 1.0 + x * (1.0 + x / 2.0 * (1.0 + x / 3.0 * (1.0 + x / 4.0 * (1.0 + x / 5.0))));
        return Ok(BG_INTEGRAL_INF - 120.0 * (-x).exp() * poly);
    }
    let integrand = |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        let em1 = (-t).exp_m1();
        t.powi(5) * (-t).exp() / (em1 * em1)
    };
    let mut points = vec![0.0];
    points.extend([1.0, 4.0, 12.0].into_iter().filter(|&p| p < x));
    points.push(x);
    Ok(integrate(integrand, &points, Tolerance::relative(BG_QUAD_REL_TOL))?.value)
}

fn bloch_gruneisen_shape(debye_k: f64, temperature_k: f64) -> Result<f64> {
    if temperature_k <= 0.0 {
        return Ok(0.0);
    }
    let r = temperature_k / debye_k;
    Ok(r.powi(5) * bloch_gruneisen_integral(debye_k / temperature_k)?)
}

/// Phonon part of ν(T) (plus ν₀ for the residual variant).
pub fn bloch_gruneisen_nu(model: &RelaxationModel, temperature_k: f64) -> Result<FrequencyValue> {
    if !(temperature_k >= 0.0) {
        return Err(invalid(format!("temperature must be ≥ 0 (got {temperature_k})")));
    }
    let (debye_k, calib_k, calib_mev, residual) = match *model {
        RelaxationModel::BlochGruneisen {
            debye_k,
            calib_k,
            calib_mev,
        } => (debye_k, calib_k, calib_mev, 0.0),
        RelaxationModel::BlochGruneisenResidual {
            debye_k,
            calib_k,
            calib_mev,
            nu0_mev,
        } => (debye_k, calib_k, calib_mev, nu0_mev),
        RelaxationModel::Constant { .. } => {
            return Err(invalid("bloch_gruneisen_nu called with a constant relaxation model"));
        }
    };
    let phonon = if temperature_k == calib_k {
        calib_mev
    } else {
        let amplitude = calib_mev / bloch_gruneisen_shape(debye_k, calib_k)?;
        amplitude * bloch_gruneisen_shape(debye_k, temperature_k)?
    };
    Ok(FrequencyValue::relaxation(phonon + residual))
}

/// ν(T) for any relaxation model.
pub fn nu_at(model: &RelaxationModel, temperature_k: f64) -> Result<FrequencyValue> {
    match *model {
        RelaxationModel::Constant { nu0_mev } => Ok(FrequencyValue::relaxation(nu0_mev)),
        _ => bloch_gruneisen_nu(model, temperature_k),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "model")]
pub enum PermittivityModel {
    Drude {
        omega_p_mev: f64,
        relaxation: RelaxationModel,
    },
    Plasma {
        omega_p_mev: f64,
    },
}

impl PermittivityModel {
    pub fn omega_p_mev(&self) -> f64 {
        match *self {
            PermittivityModel::Drude { omega_p_mev, .. } | PermittivityModel::Plasma { omega_p_mev } => omega_p_mev,
        }
    }

    pub fn relaxation(&self) -> Option<&RelaxationModel> {
        match self {
            PermittivityModel::Drude { relaxation, .. } => Some(relaxation),
            PermittivityModel::Plasma { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let wp = self.omega_p_mev();
        if !(wp.is_finite() && wp > 0.0) {
            return Err(invalid(format!("plasma frequency must be > 0 (got {wp})")));
        }
        match self.relaxation() {
            Some(r) => r.validate(),
            None => Ok(()),
        }
    }

    /// ν in meV at temperature T; zero for the plasma model.
    pub fn nu_mev(&self, temperature_k: f64) -> Result<f64> {
        match self {
            PermittivityModel::Drude { relaxation, .. } => Ok(nu_at(relaxation, temperature_k)?.mev),
            PermittivityModel::Plasma { .. } => Ok(0.0),
        }
    }
}

/// ε(iζ) for ζ > 0 (meV).
pub fn permittivity_imag_axis(model: &PermittivityModel, zeta_mev: f64, temperature_k: f64) -> Result<f64> {
    if !(zeta_mev > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "ε(iζ) is evaluated only for ζ > 0 (got {zeta_mev}); the ζ = 0 term uses explicit limits"
        )));
    }
    let wp = model.omega_p_mev();
    Ok(match model {
        PermittivityModel::Drude { relaxation, .. } => {
            let nu = nu_at(relaxation, temperature_k)?.mev;
            1.0 + wp * wp / (zeta_mev * (zeta_mev + nu))
        }
        PermittivityModel::Plasma { .. } => 1.0 + wp * wp / (zeta_mev * zeta_mev),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Trapezoid rule on a fine uniform grid, independent of the adaptive
    /// quadrature used by the implementation.
    fn trapezoid_bg_integral(x: f64, n: usize) -> f64 {
        let h = x / n as f64;
        let f = |t: f64| {
            if t == 0.0 {
                0.0
            } else {
                t.powi(5) * t.exp() / (t.exp() - 1.0).powi(2)
            }
        };
        let mut s = 0.5 * (f(0.0) + f(x));
        for i in 1..n {
            s += f(i as f64 * h);
        }
        s * h
    }

    fn oracle_nu(t: f64) -> f64 {
        let shape = |t: f64| (t / 165.0).powi(5) * trapezoid_bg_integral(165.0 / t, 400_000);
        34.5 * shape(t) / shape(300.0)
    }

    #[test]
    fn integral_matches_trapezoid_oracle() {
        for x in [0.3, 1.1, 5.0, 16.5, 49.0] {
            let got = bloch_gruneisen_integral(x).unwrap();
            let want = trapezoid_bg_integral(x, 400_000);
            assert!((got / want - 1.0).abs() < 1e-9, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn analytic_tail_is_continuous() {
        let below = {
            let pts = [0.0, 1.0, 4.0, 12.0, 50.0];
            let f = |t: f64| {
                if t <= 0.0 {
                    0.0
                } else {
                    t.powi(5) * (-t).exp() / (-t).exp_m1().powi(2)
                }
            };
            integrate(f, &pts, Tolerance::relative(1e-13)).unwrap().value
        };
        let above = bloch_gruneisen_integral(50.0 + 1e-9).unwrap();
        assert!((below / above - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gold_calibration_point_is_exact() {
        let m = RelaxationModel::gold_perfect_lattice();
        assert_eq!(bloch_gruneisen_nu(&m, 300.0).unwrap().mev, 34.5);
    }

    #[test]
    fn t5_law_at_low_temperature() {
        let m = RelaxationModel::gold_perfect_lattice();
        let r = bloch_gruneisen_nu(&m, 2.0).unwrap().mev / bloch_gruneisen_nu(&m, 1.0).unwrap().mev;
        assert!((r / 32.0 - 1.0).abs() < 0.02, "{r}");
    }

    #[test]
    fn near_linear_regime_matches_oracle() {
        // The oracle gives ν(300 K)/ν(150 K) = 2.1019 for T_D = 165 K.
        let m = RelaxationModel::gold_perfect_lattice();
        let r = bloch_gruneisen_nu(&m, 300.0).unwrap().mev / bloch_gruneisen_nu(&m, 150.0).unwrap().mev;
        let want = oracle_nu(300.0) / oracle_nu(150.0);
        assert!((r / want - 1.0).abs() < 1e-6, "{r} vs {want}");
        assert!((1.9..2.11).contains(&r));
        let at10 = bloch_gruneisen_nu(&m, 10.0).unwrap().mev;
        assert!((at10 / oracle_nu(10.0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn t5_ratio_is_stable_below_debye_over_50() {
        let m = RelaxationModel::gold_perfect_lattice();
        let ratio = |t: f64| bloch_gruneisen_nu(&m, t).unwrap().mev / t.powi(5);
        let reference = ratio(0.01);
        for t in [0.05, 0.3, 1.0, 165.0 / 50.0] {
            assert!((ratio(t) / reference - 1.0).abs() < 0.02, "T={t}");
        }
    }

    #[test]
    fn constant_and_residual_variants() {
        let typical = RelaxationModel::Constant { nu0_mev: 34.5e-3 };
        let best = RelaxationModel::Constant { nu0_mev: 34.5e-6 };
        for t in [0.0, 1e-6, 4.0, 300.0] {
            assert_eq!(nu_at(&typical, t).unwrap().mev, 34.5e-3);
            assert_eq!(nu_at(&best, t).unwrap().mev, 34.5e-6);
        }
        let residual = RelaxationModel::gold_with_residual(34.5e-3);
        assert_eq!(nu_at(&residual, 0.0).unwrap().mev, 34.5e-3);
        assert!(bloch_gruneisen_nu(&typical, 1.0).is_err());
    }

    #[test]
    fn validation() {
        assert!(RelaxationModel::Constant { nu0_mev: 0.0 }.validate().is_err());
        assert!(RelaxationModel::gold_with_residual(0.0).validate().is_ok());
        assert!(RelaxationModel::gold_with_residual(-1.0).validate().is_err());
        let bad = RelaxationModel::BlochGruneisen {
            debye_k: 0.0,
            calib_k: 300.0,
            calib_mev: 34.5,
        };
        assert!(bad.validate().is_err());
        assert!(PermittivityModel::Plasma { omega_p_mev: 0.0 }.validate().is_err());
    }

    #[test]
    fn permittivity_examples() {
        let plasma = PermittivityModel::Plasma { omega_p_mev: 9000.0 };
        assert_eq!(permittivity_imag_axis(&plasma, 9000.0, 300.0).unwrap(), 2.0);
        let drude = PermittivityModel::Drude {
            omega_p_mev: 9000.0,
            relaxation: RelaxationModel::Constant { nu0_mev: 34.5 },
        };
        let oracle = 1.0 + 9000.0f64.powi(2) / (161.9 * (161.9 + 34.5));
        let got = permittivity_imag_axis(&drude, 161.9, 300.0).unwrap();
        assert!((got - oracle).abs() < 1e-9 * oracle);
        assert!((got - 2548.1).abs() < 0.5);
        assert!(permittivity_imag_axis(&plasma, 0.0, 1.0).is_err());
        assert!(permittivity_imag_axis(&plasma, -1.0, 1.0).is_err());
    }

    #[test]
    fn drude_tends_to_plasma_as_relaxation_vanishes() {
        let plasma = permittivity_imag_axis(&PermittivityModel::Plasma { omega_p_mev: 9000.0 }, 50.0, 1.0).unwrap();
        let mut prev = f64::INFINITY;
        for nu in [1.0, 1e-3, 1e-6, 1e-9] {
            let d = PermittivityModel::Drude {
                omega_p_mev: 9000.0,
                relaxation: RelaxationModel::Constant { nu0_mev: nu },
            };
            let gap = (permittivity_imag_axis(&d, 50.0, 1.0).unwrap() - plasma).abs();
            assert!(gap < prev);
            prev = gap;
        }
        assert!(prev / plasma < 1e-10);
    }

    proptest::proptest! {
        #[test]
        fn permittivity_exceeds_one_and_decreases(z in 1e-6f64..1e5, dz in 1e-3f64..10.0, nu in 1e-6f64..100.0) {
            let d = PermittivityModel::Drude { omega_p_mev: 9000.0, relaxation: RelaxationModel::Constant { nu0_mev: nu } };
            let p = PermittivityModel::Plasma { omega_p_mev: 9000.0 };
            for m in [d, p] {
                let e1 = permittivity_imag_axis(&m, z, 1.0).unwrap();
                let e2 = permittivity_imag_axis(&m, z * (1.0 + dz), 1.0).unwrap();
                proptest::prop_assert!(e1 > 1.0 && e2 > 1.0);
                proptest::prop_assert!(e2 < e1);
            }
        }

        #[test]
        fn bg_is_monotone_and_additive(t in 0.01f64..800.0, dt in 0.01f64..50.0, nu0 in 0.0f64..1.0) {
            let pure = RelaxationModel::gold_perfect_lattice();
            let a = nu_at(&pure, t).unwrap().mev;
            let b = nu_at(&pure, t + dt).unwrap().mev;
            proptest::prop_assert!(b > a);
            let res = RelaxationModel::gold_with_residual(nu0);
            let extra = nu_at(&res, t).unwrap().mev - nu_at(&res, 0.0).unwrap().mev;
            proptest::prop_assert!((extra - a).abs() <= 1e-12 * a.max(nu0));
        }
    }
}
