//! Regime inequalities between ζ_m and ν, crossover temperatures, and the
//! low-temperature fit ΔF = C₁T²(1 − C₂√T).

use crate::error::{invalid, Error, Result};
use crate::lifshitz::{thermal_correction, PlateSystem};
use crate::lsq;
use crate::materials::{nu_at, PermittivityModel, RelaxationModel, GOLD_OMEGA_P_MEV};
use crate::quantities::{matsubara_frequency, CODATA};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const DEFAULT_STRONG_RATIO: f64 = 0.1;
/// Matsubara frequencies that must lie well below ν₀ inside the fit window.
pub const REGIME_FREQUENCIES: u64 = 10;
pub const MAX_RMS_RESIDUAL: f64 = 1e-2;
/// Default fit window as fractions of the crossover temperature.
pub const FIT_WINDOW_FRACTIONS: (f64, f64) = (1e-4, 1e-3);
pub const DEFAULT_FIT_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    MuchLess,
    Less,
    Greater,
    MuchGreater,
}

impl Relation {
    /// Relation of ζ to ν.
    pub fn classify(zeta: f64, nu: f64, strong_ratio: f64) -> Self {
        if zeta <= strong_ratio * nu {
            Relation::MuchLess
        } else if nu <= strong_ratio * zeta {
            Relation::MuchGreater
        } else if zeta < nu {
            Relation::Less
        } else {
            Relation::Greater
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Relation::MuchLess => "much_less",
            Relation::Less => "less",
            Relation::Greater => "greater",
            Relation::MuchGreater => "much_greater",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeEntry {
    pub m: u64,
    pub zeta_mev: f64,
    pub relation: Relation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub temperature_k: f64,
    pub nu_mev: f64,
    pub strong_ratio: f64,
    pub entries: Vec<RegimeEntry>,
}

impl RegimeReport {
    /// Smallest m with ζ_m ≥ ν, if any.
    pub fn first_not_below(&self) -> Option<u64> {
        self.entries
            .iter()
            .find(|e| matches!(e.relation, Relation::Greater | Relation::MuchGreater))
            .map(|e| e.m)
    }
}

fn check_strong_ratio(strong_ratio: f64) -> Result<()> {
    if !(strong_ratio > 0.0 && strong_ratio <= 0.2) {
        return Err(invalid(format!(
            "strong_ratio must lie in (0, 0.2] (got {strong_ratio})"
        )));
    }
    Ok(())
}

pub fn regime_report(
    nu_model: &RelaxationModel,
    temperature_k: f64,
    m_max: u64,
    strong_ratio: f64,
) -> Result<RegimeReport> {
    if !(temperature_k > 0.0 && temperature_k.is_finite()) {
        return Err(invalid(format!("temperature must be > 0 (got {temperature_k})")));
    }
    if m_max == 0 {
        return Err(invalid("m_max must be ≥ 1"));
    }
    check_strong_ratio(strong_ratio)?;
    nu_model.validate()?;
    let nu = nu_at(nu_model, temperature_k)?.mev;
    let entries = (1..=m_max)
        .map(|m| {
            let zeta = matsubara_frequency(m, temperature_k).mev;
            RegimeEntry {
                m,
                zeta_mev: zeta,
                relation: Relation::classify(zeta, nu, strong_ratio),
            }
        })
        .collect();
    Ok(RegimeReport {
        temperature_k,
        nu_mev: nu,
        strong_ratio,
        entries,
    })
}

/// Largest T with ζ_n(T) ≤ strong_ratio·ν₀.
pub fn crossover_temperature(nu0_mev: f64, n_freq: u64, strong_ratio: f64) -> Result<f64> {
    if !(nu0_mev > 0.0 && nu0_mev.is_finite()) {
        return Err(invalid(format!("ν₀ must be > 0 (got {nu0_mev})")));
    }
    if n_freq == 0 {
        return Err(invalid("n_freq must be ≥ 1"));
    }
    if !(strong_ratio > 0.0 && strong_ratio.is_finite()) {
        return Err(invalid(format!("strong_ratio must be > 0 (got {strong_ratio})")));
    }
    Ok(strong_ratio * nu0_mev / (2.0 * PI * CODATA.boltzmann_mev() * n_freq as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticFit {
    /// J/(m²·K²)
    pub c1: f64,
    /// K^(−1/2)
    pub c2: f64,
    /// Statistical error plus the shift when a T¹ term is added to the model.
    pub c1_error: f64,
    pub c2_error: f64,
    pub fit_window: (f64, f64),
    /// rms of (model − data)/data for ΔF/T².
    pub rms_residual: f64,
    pub separation_m: f64,
    pub nu0_mev: f64,
    pub points: Vec<FitPoint>,
}

impl AsymptoticFit {
    pub fn delta_f(&self, temperature_k: f64) -> f64 {
        self.c1 * temperature_k.powi(2) * (1.0 - self.c2 * temperature_k.sqrt())
    }

    /// S = −∂ΔF/∂T of the fitted form: −2C₁T + (5/2)C₁C₂T^{3/2}.
    pub fn entropy(&self, temperature_k: f64) -> f64 {
        -2.0 * self.c1 * temperature_k + 2.5 * self.c1 * self.c2 * temperature_k.powf(1.5)
    }

    /// Error of `entropy` propagated from c1_error and c2_error.
    pub fn entropy_error(&self, temperature_k: f64) -> f64 {
        let t = temperature_k;
        let d_c1 = (-2.0 * t + 2.5 * self.c2 * t.powf(1.5)) * self.c1_error;
        let d_c2 = 2.5 * self.c1 * t.powf(1.5) * self.c2_error;
        d_c1.hypot(d_c2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub temperature_k: f64,
    pub delta_f: f64,
    pub est_error: f64,
    pub terms_used: u64,
}

fn constant_nu0(system: &PlateSystem) -> Result<f64> {
    match system.permittivity {
        PermittivityModel::Drude {
            relaxation: RelaxationModel::Constant { nu0_mev },
            ..
        } => Ok(nu0_mev),
        _ => Err(invalid("the asymptotic fit needs a Drude model with constant ν₀")),
    }
}

/// `count` log-spaced temperatures spanning FIT_WINDOW_FRACTIONS of the
/// crossover for ν₀, ascending.
pub fn default_fit_temperatures(nu0_mev: f64, strong_ratio: f64, count: usize) -> Result<Vec<f64>> {
    let tc = crossover_temperature(nu0_mev, REGIME_FREQUENCIES, strong_ratio)?;
    let (lo, hi) = (tc * FIT_WINDOW_FRACTIONS.0, tc * FIT_WINDOW_FRACTIONS.1);
    let count = count.max(2);
    Ok((0..count)
        .map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (count - 1) as f64).exp())
        .collect())
}

pub fn fit_asymptotic_coefficients(system: &PlateSystem, temperatures_k: &[f64]) -> Result<AsymptoticFit> {
    fit_asymptotic_coefficients_with(system, temperatures_k, DEFAULT_STRONG_RATIO)
}

/// Least-squares fit of ΔF/T² = C₁ − C₁C₂√T.
pub fn fit_asymptotic_coefficients_with(
    system: &PlateSystem,
    temperatures_k: &[f64],
    strong_ratio: f64,
) -> Result<AsymptoticFit> {
    check_strong_ratio(strong_ratio)?;
    system.validate()?;
    let nu0 = constant_nu0(system)?;
    if temperatures_k.len() < 6 {
        return Err(Error::InsufficientGrid(format!(
            "{} fit points, need at least 6",
            temperatures_k.len()
        )));
    }
    if temperatures_k.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::InsufficientGrid(
            "fit temperatures must be finite and > 0".into(),
        ));
    }
    let t_lo = temperatures_k.iter().copied().fold(f64::INFINITY, f64::min);
    let t_hi = temperatures_k.iter().copied().fold(0.0, f64::max);
    if t_hi < 10.0 * t_lo * (1.0 - 1e-12) {
        return Err(Error::InsufficientGrid(format!(
            "fit points span {:.2} decades, need at least 1",
            (t_hi / t_lo).log10()
        )));
    }
    let limit = crossover_temperature(nu0, REGIME_FREQUENCIES, strong_ratio)?;
    if t_hi > limit {
        return Err(Error::RegimeViolation {
            temperature_k: t_hi,
            limit_k: limit,
        });
    }

    let points = temperatures_k
        .par_iter()
        .map(|&t| {
            thermal_correction(system, t).map(|c| FitPoint {
                temperature_k: t,
                delta_f: c.value,
                est_error: c.est_error,
                terms_used: c.terms_used,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    fit_points(points, system.separation_m, nu0)
}

fn fit_points(points: Vec<FitPoint>, separation_m: f64, nu0_mev: f64) -> Result<AsymptoticFit> {
    let xs: Vec<f64> = points.iter().map(|p| p.temperature_k.sqrt()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.delta_f / p.temperature_k.powi(2)).collect();
    let line = lsq::fit(&xs, &ys, None, &[&|_| 1.0, &|x| x])?;
    let (c0, c1) = (line.coef[0], line.coef[1]);
    let rms = (line
        .residuals
        .iter()
        .zip(&ys)
        .map(|(r, y)| (r / y).powi(2))
        .sum::<f64>()
        / ys.len() as f64)
        .sqrt();
    if rms > MAX_RMS_RESIDUAL {
        return Err(Error::PoorLinearity {
            rms,
            limit: MAX_RMS_RESIDUAL,
        });
    }
    let (big_c1, big_c2) = (c0, -c1 / c0);
    if !(big_c1 > 0.0 && big_c2 > 0.0) {
        return Err(Error::PoorLinearity {
            rms,
            limit: MAX_RMS_RESIDUAL,
        });
    }

    let var_c2 = big_c2.powi(2)
        * (line.covariance(1, 1) / (c1 * c1) + line.covariance(0, 0) / (c0 * c0)
            - 2.0 * line.covariance(0, 1) / (c0 * c1));
    let mut c1_err = line.std_error(0);
    let mut c2_err = var_c2.max(0.0).sqrt();
    // Truncation bias of the two-term form, from a fit with the next power.
    if let Ok(q) = lsq::fit(&xs, &ys, None, &[&|_| 1.0, &|x| x, &|x| x * x]) {
        c1_err = c1_err.hypot(q.coef[0] - big_c1);
        c2_err = c2_err.hypot(-q.coef[1] / q.coef[0] - big_c2);
    }

    let t_lo = points.iter().map(|p| p.temperature_k).fold(f64::INFINITY, f64::min);
    let t_hi = points.iter().map(|p| p.temperature_k).fold(0.0, f64::max);
    Ok(AsymptoticFit {
        c1: big_c1,
        c2: big_c2,
        c1_error: c1_err,
        c2_error: c2_err,
        fit_window: (t_lo, t_hi),
        rms_residual: rms,
        separation_m,
        nu0_mev,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub nu0_mev: f64,
    pub c1: f64,
    pub c2: f64,
    pub c1_nu0: f64,
    pub c2_sqrt_nu0: f64,
    pub c1_error: f64,
    pub c2_error: f64,
    pub rms_residual: f64,
    pub fit_window: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingTable {
    pub separation_m: f64,
    pub rows: Vec<ScalingRow>,
}

impl ScalingTable {
    /// max/min − 1 of C₁·ν₀ and of C₂·√ν₀; zero for a single row.
    pub fn spreads(&self) -> (f64, f64) {
        let spread = |f: fn(&ScalingRow) -> f64| {
            let v: Vec<f64> = self.rows.iter().map(f).collect();
            let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = v.iter().copied().fold(f64::INFINITY, f64::min);
            if v.len() < 2 {
                0.0
            } else {
                max / min - 1.0
            }
        };
        (spread(|r| r.c1_nu0), spread(|r| r.c2_sqrt_nu0))
    }

    pub fn is_invariant(&self, tolerance: f64) -> bool {
        let (a, b) = self.spreads();
        a <= tolerance && b <= tolerance
    }
}

/// Fits for gold (ω_p = 9 eV) at separation `a` over each ν₀.
pub fn scaling_check(separation_m: f64, nu0_list: &[f64]) -> Result<ScalingTable> {
    let template = PlateSystem::new(
        separation_m,
        PermittivityModel::Drude {
            omega_p_mev: GOLD_OMEGA_P_MEV,
            relaxation: RelaxationModel::Constant { nu0_mev: 1.0 },
        },
    )?;
    scaling_check_for(&template, nu0_list, DEFAULT_STRONG_RATIO)
}

/// As `scaling_check`, with ω_p, separation and numerics taken from a
/// Drude template whose ν₀ is replaced in turn.
pub fn scaling_check_for(template: &PlateSystem, nu0_list: &[f64], strong_ratio: f64) -> Result<ScalingTable> {
    if nu0_list.is_empty() {
        return Err(invalid("scaling check needs at least one ν₀"));
    }
    let omega_p_mev = match template.permittivity {
        PermittivityModel::Drude { omega_p_mev, .. } => omega_p_mev,
        PermittivityModel::Plasma { .. } => return Err(invalid("scaling check needs a Drude template")),
    };
    let mut rows = Vec::with_capacity(nu0_list.len());
    for &nu0 in nu0_list {
        let mut system = *template;
        system.permittivity = PermittivityModel::Drude {
            omega_p_mev,
            relaxation: RelaxationModel::Constant { nu0_mev: nu0 },
        };
        let temps = default_fit_temperatures(nu0, strong_ratio, DEFAULT_FIT_POINTS)?;
        let fit = fit_asymptotic_coefficients_with(&system, &temps, strong_ratio)?;
        rows.push(ScalingRow {
            nu0_mev: nu0,
            c1: fit.c1,
            c2: fit.c2,
            c1_nu0: fit.c1 * nu0,
            c2_sqrt_nu0: fit.c2 * nu0.sqrt(),
            c1_error: fit.c1_error,
            c2_error: fit.c2_error,
            rms_residual: fit.rms_residual,
            fit_window: fit.fit_window,
        });
    }
    Ok(ScalingTable {
        separation_m: template.separation_m,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::{bloch_gruneisen_nu, GOLD_NU0_TYPICAL_MEV};

    fn drude_constant(nu0: f64) -> PlateSystem {
        PlateSystem::new(
            1e-6,
            PermittivityModel::Drude {
                omega_p_mev: GOLD_OMEGA_P_MEV,
                relaxation: RelaxationModel::Constant { nu0_mev: nu0 },
            },
        )
        .unwrap()
    }

    /// Leading low-T coefficients of ΔF for the Drude model with constant ν:
    /// C₁ = k²ω_p²(ln2/2 − 1/4)/(12ħc²ν) and
    /// C₂ = (|ζ(−3/2)|/c_TE)·√(ω̃²Δ₁/ν̃) in the dimensionless variables.
    fn analytic_coefficients(nu0_mev: f64, a: f64) -> (f64, f64) {
        let (k, hbar, c) = (1.380_649e-23, 1.054_571_817e-34, 299_792_458.0);
        let radps = 1.602_176_634e-22 / hbar;
        let (wp, nu) = (GOLD_OMEGA_P_MEV * radps, nu0_mev * radps);
        let cte = 2f64.ln() / 2.0 - 0.25;
        let c1 = k * k * wp * wp * cte / (12.0 * hbar * c * c * nu);
        let kappa = 2.0 * a / c;
        let delta1 = 4.0 * PI * a * k / (hbar * c);
        let c2 = 0.025_485_201_889_833_03 / cte * ((kappa * wp).powi(2) * delta1 / (kappa * nu)).sqrt();
        (c1, c2)
    }

    #[test]
    fn regime_examples() {
        let bg = RelaxationModel::gold_perfect_lattice();
        let r = regime_report(&bg, 300.0, 5, 0.1).unwrap();
        assert_eq!(r.entries[0].relation, Relation::Greater);
        assert!(r.entries.iter().all(|e| e.zeta_mev > r.nu_mev));

        let r = regime_report(&bg, 10.0, 3, 0.1).unwrap();
        assert_eq!(r.entries[0].relation, Relation::MuchGreater);
        let oracle = bloch_gruneisen_nu(&bg, 10.0).unwrap().mev;
        assert_eq!(r.nu_mev, oracle);
        let zeta1 = 2.0 * PI * 1.380_649e-23 / 1.602_176_634e-22 * 10.0;
        assert!((r.entries[0].zeta_mev / zeta1 - 1.0).abs() < 1e-12);
        assert!((zeta1 / 5.4 - 1.0).abs() < 0.01);

        let c = RelaxationModel::Constant {
            nu0_mev: GOLD_NU0_TYPICAL_MEV,
        };
        let r = regime_report(&c, 1e-4, 10, 0.1).unwrap();
        assert!(r.entries.iter().all(|e| e.relation == Relation::MuchLess));
        assert_eq!(r.first_not_below(), None);
    }

    #[test]
    fn regime_rejects_bad_input() {
        let c = RelaxationModel::Constant { nu0_mev: 1.0 };
        assert!(regime_report(&c, 0.0, 3, 0.1).is_err());
        assert!(regime_report(&c, 1.0, 0, 0.1).is_err());
        assert!(regime_report(&c, 1.0, 3, 0.3).is_err());
        assert!(regime_report(&c, 1.0, 3, 0.0).is_err());
    }

    #[test]
    fn crossover_examples() {
        let t = crossover_temperature(34.5e-3, 10, 0.1).unwrap();
        assert!((t / 6.4e-4 - 1.0).abs() < 0.01, "{t}");
        let t = crossover_temperature(34.5e-6, 10, 0.1).unwrap();
        assert!((t / 6.4e-7 - 1.0).abs() < 0.01, "{t}");
        let one = crossover_temperature(1.0, 1, 0.1).unwrap();
        let ten = crossover_temperature(1.0, 10, 0.1).unwrap();
        assert!((one / ten - 10.0).abs() < 1e-12);
        // ζ_n at the crossover is exactly strong_ratio·ν₀.
        let z = matsubara_frequency(10, t).mev;
        assert!((z / (0.1 * 34.5e-6) - 1.0).abs() < 1e-12);
        assert!(crossover_temperature(0.0, 10, 0.1).is_err());
        assert!(crossover_temperature(1.0, 0, 0.1).is_err());
    }

    proptest::proptest! {
        #[test]
        fn crossover_is_linear(nu0 in 1e-7f64..10.0, sr in 1e-3f64..0.2, n in 1u64..1000, k in 1e-3f64..1e3) {
            let base = crossover_temperature(nu0, n, sr).unwrap();
            let scaled_nu = crossover_temperature(k * nu0, n, sr).unwrap();
            let scaled_sr = crossover_temperature(nu0, n, k * sr).unwrap();
            let scaled_n = crossover_temperature(nu0, 2 * n, sr).unwrap();
            proptest::prop_assert!((scaled_nu / (k * base) - 1.0).abs() < 1e-12);
            proptest::prop_assert!((scaled_sr / (k * base) - 1.0).abs() < 1e-12);
            proptest::prop_assert!((2.0 * scaled_n / base - 1.0).abs() < 1e-12);
        }

        #[test]
        fn regime_is_monotone_in_m(t in 1e-3f64..500.0, sr in 0.01f64..0.2) {
            let r = regime_report(&RelaxationModel::gold_perfect_lattice(), t, 40, sr).unwrap();
            let rank = |x: Relation| x as u8;
            for w in r.entries.windows(2) {
                proptest::prop_assert!(rank(w[1].relation) >= rank(w[0].relation));
            }
            for e in &r.entries {
                proptest::prop_assert_eq!(e.relation, Relation::classify(e.zeta_mev, r.nu_mev, sr));
            }
        }
    }

    #[test]
    fn fit_rejects_bad_windows() {
        let sys = drude_constant(3.45);
        let good = default_fit_temperatures(3.45, 0.1, 8).unwrap();
        assert!(matches!(
            fit_asymptotic_coefficients(&sys, &good[..5]),
            Err(Error::InsufficientGrid(_))
        ));
        let narrow: Vec<f64> = (0..6).map(|i| good[0] * (1.0 + 0.1 * i as f64)).collect();
        assert!(matches!(
            fit_asymptotic_coefficients(&sys, &narrow),
            Err(Error::InsufficientGrid(_))
        ));
        let hot: Vec<f64> = good.iter().map(|t| t * 1e4).collect();
        assert!(matches!(
            fit_asymptotic_coefficients(&sys, &hot),
            Err(Error::RegimeViolation { .. })
        ));
        let plasma = PlateSystem::new(1e-6, PermittivityModel::Plasma { omega_p_mev: 9000.0 }).unwrap();
        assert!(fit_asymptotic_coefficients(&plasma, &good).is_err());
    }

    #[test]
    fn poor_linearity_is_refused() {
        // Up to the crossover the two-term form no longer describes ΔF/T².
        let sys = drude_constant(3.45);
        let tc = crossover_temperature(3.45, 10, 0.1).unwrap();
        let temps: Vec<f64> = (0..8).map(|i| tc * 10f64.powf(-2.0 + 2.0 * i as f64 / 7.0)).collect();
        assert!(matches!(
            fit_asymptotic_coefficients(&sys, &temps),
            Err(Error::PoorLinearity { .. })
        ));
    }

    #[test]
    fn fit_tracks_analytic_coefficients() {
        let nu0 = 3.45;
        let sys = drude_constant(nu0);
        let temps = default_fit_temperatures(nu0, 0.1, 8).unwrap();
        let fit = fit_asymptotic_coefficients(&sys, &temps).unwrap();
        let (c1, c2) = analytic_coefficients(nu0, 1e-6);
        assert!(fit.rms_residual < 1e-3, "{fit:?}");
        assert!((fit.c1 / c1 - 1.0).abs() < 0.01, "C1 {} vs {c1}", fit.c1);
        assert!((fit.c2 / c2 - 1.0).abs() < 0.15, "C2 {} vs {c2}", fit.c2);
        assert!(fit.delta_f(fit.fit_window.1) > 0.0);
        assert!(fit.entropy(fit.fit_window.1) < 0.0);
    }

    #[test]
    fn fitted_c1_matches_deep_limit_of_delta_f() {
        let nu0 = 3.45;
        let sys = drude_constant(nu0);
        let temps = default_fit_temperatures(nu0, 0.1, 8).unwrap();
        let fit = fit_asymptotic_coefficients(&sys, &temps).unwrap();
        // ΔF/T² one and 1.5 decades below the window, extrapolated linearly
        // in √T to T = 0. The ladder length grows as 1/T, which caps the depth.
        let (t1, t2) = (fit.fit_window.0 / 10.0, fit.fit_window.0 / 30.0);
        let y1 = thermal_correction(&sys, t1).unwrap().value / (t1 * t1);
        let y2 = thermal_correction(&sys, t2).unwrap().value / (t2 * t2);
        let limit = y2 - (y1 - y2) * t2.sqrt() / (t1.sqrt() - t2.sqrt());
        assert!(
            (fit.c1 - limit).abs() <= 2.0 * fit.c1_error,
            "{} vs {limit} ± {}",
            fit.c1,
            fit.c1_error
        );
    }

    #[test]
    fn subsampled_fit_is_stable() {
        let nu0 = 3.45;
        let sys = drude_constant(nu0);
        let temps = default_fit_temperatures(nu0, 0.1, 12).unwrap();
        let full = fit_asymptotic_coefficients(&sys, &temps).unwrap();
        let sub: Vec<f64> = [0, 2, 4, 7, 9, 11].iter().map(|&i| temps[i]).collect();
        let part = fit_asymptotic_coefficients(&sys, &sub).unwrap();
        assert!(
            (full.c1 - part.c1).abs() < full.c1_error,
            "{} vs {} ± {}",
            full.c1,
            part.c1,
            full.c1_error
        );
        assert!(
            (full.c2 - part.c2).abs() < full.c2_error,
            "{} vs {} ± {}",
            full.c2,
            part.c2,
            full.c2_error
        );
    }

    #[test]
    fn single_row_scaling_table_is_vacuous() {
        let t = scaling_check(1e-6, &[3.45]).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.spreads(), (0.0, 0.0));
        assert!((t.rows[0].c1_nu0 / (t.rows[0].c1 * 3.45) - 1.0).abs() < 1e-15);
        assert!(scaling_check(1e-6, &[]).is_err());
    }
}
