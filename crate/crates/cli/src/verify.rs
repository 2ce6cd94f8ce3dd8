//! Golden suite. Gold defaults are built in; a config may perturb ω_p,
//! separation, numerics, the strong ratio and the Bloch–Grüneisen
//! parameters, which is how regressions in those paths show up.

use crate::commands::{csv_field, header, json_envelope, Output};
use crate::config::{config_error, Command, RunConfig};
use crate::CliError;
use casimir::analysis::{
    crossover_temperature, default_fit_temperatures, fit_asymptotic_coefficients_with, regime_report,
    scaling_check_for, AsymptoticFit, Relation, DEFAULT_FIT_POINTS, DEFAULT_STRONG_RATIO,
};
use casimir::lifshitz::{free_energy_curve, ideal_casimir_energy, zero_temperature_energy};
use casimir::materials::{nu_at, GOLD_NU0_BEST_MEV, GOLD_NU0_TYPICAL_MEV};
use casimir::quantities::matsubara_frequency;
use casimir::thermo::{
    classify_nernst, entropy, entropy_curve, entropy_plateau, log_grid_descending, NernstClassification,
    DEFAULT_STEP_FRACTION,
};
use casimir::{PermittivityModel, PlateSystem, RelaxationModel};
use serde_json::{json, Value};

/// Reference coefficients for typical gold at a = 1 µm.
pub const C1_TYPICAL: f64 = 5.81e-10;
pub const C2_TYPICAL: f64 = 95.75;
/// Reference coefficients for the best gold sample.
pub const C1_BEST: f64 = 5.81e-7;
pub const C2_BEST: f64 = 3028.0;

/// Tolerances of the tighter absolute checks. The order-of-magnitude
/// checks alone cannot detect a factor-2 change in ω_p.
pub const C1_GOLDEN_TOL: f64 = 0.05;
pub const C2_GOLDEN_TOL: f64 = 0.15;

/// ω_p for the ideal-mirror check, far above gold's so that the plasma
/// model approaches a perfect conductor at 1 µm.
pub const IDEAL_MIRROR_OMEGA_P_MEV: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub criterion: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn failed(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    pub fn all_passed(&self) -> bool {
        self.failed() == 0
    }

    pub fn output(&self, config: &RunConfig) -> Output {
        let mut csv = header(Command::Verify, config).expect("verify config resolves");
        csv.push_str("criterion,check,status,detail\n");
        for c in &self.checks {
            csv.push_str(&format!(
                "{},{},{},{}\n",
                c.criterion,
                c.name,
                status(c.passed),
                csv_field(&c.detail)
            ));
        }
        csv.push_str(&format!(
            "# summary = \"{} passed, {} failed\"\n",
            self.checks.len() - self.failed(),
            self.failed()
        ));
        let mut j = json_envelope(Command::Verify, config).expect("verify config resolves");
        j.insert(
            "checks".into(),
            self.checks
                .iter()
                .map(|c| {
                    json!({"criterion": c.criterion, "check": c.name,
                           "status": status(c.passed), "detail": c.detail})
                })
                .collect(),
        );
        j.insert("passed".into(), json!(self.checks.len() - self.failed()));
        j.insert("failed".into(), json!(self.failed()));
        Output {
            csv,
            json: Value::Object(j),
            sidecar: None,
        }
    }
}

fn status(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Turn a rendered verify output back into a pass/fail status.
pub(crate) fn status_from(output: &Output) -> Result<(), CliError> {
    let failed = output.json["failed"].as_u64().unwrap_or(0) as usize;
    let total = output.json["checks"].as_array().map_or(0, Vec::len);
    if failed > 0 {
        Err(CliError::VerifyFailed { failed, total })
    } else {
        Ok(())
    }
}

struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    /// Record a check; an error from the computation counts as a failure.
    fn run(&mut self, criterion: u8, name: &'static str, f: impl FnOnce() -> Result<(bool, String), CliError>) {
        let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
        self.checks.push(Check {
            criterion,
            name,
            passed,
            detail,
        });
    }
}

fn within_factor(x: f64, target: f64, factor: f64) -> bool {
    x > 0.0 && x >= target / factor && x <= target * factor
}

fn rel_dev(x: f64, target: f64) -> f64 {
    (x / target - 1.0).abs()
}

fn drude_constant(config: &RunConfig, nu0: f64) -> Result<PlateSystem, CliError> {
    drude(config, RelaxationModel::Constant { nu0_mev: nu0 })
}

fn drude(config: &RunConfig, relaxation: RelaxationModel) -> Result<PlateSystem, CliError> {
    Ok(PlateSystem::new(
        config.separation_m,
        PermittivityModel::Drude {
            omega_p_mev: config.omega_p_mev,
            relaxation,
        },
    )
    .map_err(config_error)?
    .with_numeric(config.numeric))
}

fn phonon_model(config: &RunConfig) -> RelaxationModel {
    RelaxationModel::BlochGruneisen {
        debye_k: config.debye_k,
        calib_k: config.nu_calib_k,
        calib_mev: config.nu_calib_mev,
    }
}

fn fit_for(config: &RunConfig, nu0: f64) -> Result<AsymptoticFit, CliError> {
    let system = drude_constant(config, nu0)?;
    let temps = default_fit_temperatures(nu0, DEFAULT_STRONG_RATIO, DEFAULT_FIT_POINTS)?;
    Ok(fit_asymptotic_coefficients_with(&system, &temps, DEFAULT_STRONG_RATIO)?)
}

pub fn run(config: &RunConfig, slow: bool) -> Result<Report, CliError> {
    let mut s = Suite { checks: Vec::new() };
    let phonon = phonon_model(config);

    s.run(1, "matsubara_anchor", || {
        let z = matsubara_frequency(1, 300.0).mev;
        let dev = rel_dev(z, 161.9);
        Ok((
            dev <= 5e-3,
            format!("zeta_1(300 K) = {z:.3} meV, deviation {:.3}% (limit 0.5%)", dev * 100.0),
        ))
    });

    s.run(2, "nu_calibration", || {
        let t = 300.0;
        let nu = nu_at(&phonon, t)?.mev;
        let ok = config.nu_calib_k != t || nu == config.nu_calib_mev;
        Ok((
            ok,
            format!(
                "nu(300 K) = {nu} meV, calibrated to {} meV at {} K",
                config.nu_calib_mev, config.nu_calib_k
            ),
        ))
    });
    s.run(2, "nu_t5_law", || {
        let r = nu_at(&phonon, 2.0)?.mev / nu_at(&phonon, 1.0)?.mev;
        Ok((
            (r - 32.0).abs() <= 0.64,
            format!("nu(2 K)/nu(1 K) = {r:.4} (target 32 +- 2%)"),
        ))
    });

    s.run(3, "regime_300k", || {
        let r = regime_report(&phonon, 300.0, 10, DEFAULT_STRONG_RATIO)?;
        let ok = r.entries.iter().all(|e| e.zeta_mev > r.nu_mev);
        Ok((
            ok,
            format!(
                "nu(300 K) = {:.3} meV < zeta_1 = {:.3} meV: {ok}",
                r.nu_mev, r.entries[0].zeta_mev
            ),
        ))
    });
    s.run(3, "regime_10k", || {
        let r = regime_report(&phonon, 10.0, 1, DEFAULT_STRONG_RATIO)?;
        let e = r.entries[0];
        let ok = e.relation == Relation::MuchGreater;
        Ok((
            ok,
            format!(
                "nu(10 K) = {:.4e} meV, zeta_1 = {:.4} meV, ratio {:.3e} (limit 0.1)",
                r.nu_mev,
                e.zeta_mev,
                r.nu_mev / e.zeta_mev
            ),
        ))
    });

    for (name, nu0, lo, hi) in [
        ("crossover_typical", GOLD_NU0_TYPICAL_MEV, 1e-4, 1e-3),
        ("crossover_best", GOLD_NU0_BEST_MEV, 1e-7, 1e-6),
    ] {
        s.run(4, name, || {
            let t = crossover_temperature(nu0, 10, DEFAULT_STRONG_RATIO)?;
            Ok((t >= lo && t <= hi, format!("T = {t:.4e} K, bounds [{lo:e}, {hi:e}] K")))
        });
    }
    s.run(4, "crossover_order_of_magnitude", || {
        let sr = config.strong_ratio;
        let a = crossover_temperature(GOLD_NU0_TYPICAL_MEV, 10, sr)?;
        let b = crossover_temperature(GOLD_NU0_BEST_MEV, 10, sr)?;
        let ok =
            within_factor(a, 10f64.powf(-3.5), 10f64.powf(1.5)) && within_factor(b, 10f64.powf(-6.5), 10f64.powf(1.5));
        Ok((
            ok,
            format!("strong_ratio {sr}: T = {a:.4e} K and {b:.4e} K, each within a decade of its bounds"),
        ))
    });

    s.run(5, "ideal_mirror", || {
        let a = 1e-6;
        let system = PlateSystem::new(
            a,
            PermittivityModel::Plasma {
                omega_p_mev: IDEAL_MIRROR_OMEGA_P_MEV,
            },
        )
        .map_err(config_error)?
        .with_numeric(config.numeric);
        let e = zero_temperature_energy(&system)?.value;
        let dev = rel_dev(e, ideal_casimir_energy(a));
        Ok((
            dev <= 0.01,
            format!("E = {e:.6e} J/m2 at a = 1 um, deviation {:.3}% (limit 1%)", dev * 100.0),
        ))
    });

    s.run(6, "coefficient_scaling", || {
        let template = drude_constant(config, 1.0)?;
        let table = scaling_check_for(&template, &[3.45, 0.345], DEFAULT_STRONG_RATIO)?;
        let (c1s, c2s) = table.spreads();
        Ok((
            c1s <= 0.05 && c2s <= 0.05,
            format!("C1*nu0 spread {:.2e}, C2*sqrt(nu0) spread {:.2e} (limit 5%)", c1s, c2s),
        ))
    });

    let typical = fit_for(config, GOLD_NU0_TYPICAL_MEV);
    let fit_err = |e: &CliError| CliError::Config(format!("typical-gold fit failed: {e}"));
    s.run(7, "c1_order_of_magnitude", || {
        let f = typical.as_ref().map_err(fit_err)?;
        Ok((
            within_factor(f.c1, C1_TYPICAL, 10.0),
            format!("C1 = {:.4e} J/(m2 K2), reference {C1_TYPICAL:e} within x/10", f.c1),
        ))
    });
    s.run(7, "c2_order_of_magnitude", || {
        let f = typical.as_ref().map_err(fit_err)?;
        Ok((
            within_factor(f.c2, C2_TYPICAL, 10.0),
            format!("C2 = {:.3} K^-1/2, reference {C2_TYPICAL} within x/10", f.c2),
        ))
    });
    s.run(7, "c1_golden", || {
        let f = typical.as_ref().map_err(fit_err)?;
        let dev = rel_dev(f.c1, C1_TYPICAL);
        Ok((
            dev <= C1_GOLDEN_TOL,
            format!("C1 deviation {:.2}% (limit {}%)", dev * 100.0, C1_GOLDEN_TOL * 100.0),
        ))
    });
    s.run(7, "c2_golden", || {
        let f = typical.as_ref().map_err(fit_err)?;
        let dev = rel_dev(f.c2, C2_TYPICAL);
        Ok((
            dev <= C2_GOLDEN_TOL,
            format!("C2 deviation {:.2}% (limit {}%)", dev * 100.0, C2_GOLDEN_TOL * 100.0),
        ))
    });

    s.run(8, "nernst_plasma", || {
        let system = PlateSystem::new(
            config.separation_m,
            PermittivityModel::Plasma {
                omega_p_mev: config.omega_p_mev,
            },
        )
        .map_err(config_error)?
        .with_numeric(config.numeric);
        let v = classify_nernst(&system, &log_grid_descending(1.0, 1e-3, 13))?;
        Ok((
            v.classification == NernstClassification::SatisfiedSmooth,
            format!(
                "{}, S(0) = {:.3e} +- {:.3e}",
                v.classification.as_str(),
                v.s_limit_estimate,
                v.s_limit_error
            ),
        ))
    });
    s.run(8, "nernst_drude_constant", || {
        let system = drude_constant(config, GOLD_NU0_TYPICAL_MEV)?;
        let v = classify_nernst(&system, &log_grid_descending(1.0, 1e-7, 22))?;
        Ok((
            v.classification == NernstClassification::SatisfiedWithNegativeDip,
            format!(
                "{}, S(0) = {:.3e} +- {:.3e}",
                v.classification.as_str(),
                v.s_limit_estimate,
                v.s_limit_error
            ),
        ))
    });
    s.run(8, "nernst_drude_perfect_lattice", || {
        let system = drude(config, phonon)?;
        let v = classify_nernst(&system, &log_grid_descending(0.5, 5e-3, 9))?;
        let p = entropy_plateau(&v.entropy, 0.05, 0.5)?;
        let ok = v.classification == NernstClassification::ViolatedNegativeLimit && p.mean < 0.0 && p.variation <= 0.1;
        Ok((
            ok,
            format!(
                "{}, plateau {:.4e} J/(m2 K) over [0.05, 0.5] K, variation {:.2e} (limit 10%)",
                v.classification.as_str(),
                p.mean,
                p.variation
            ),
        ))
    });

    s.run(9, "fit_entropy_consistency", || {
        let f = typical.as_ref().map_err(fit_err)?;
        let system = drude_constant(config, GOLD_NU0_TYPICAL_MEV)?;
        let mut worst = 0.0f64;
        for p in &f.points {
            let t = p.temperature_k;
            let num = entropy(&system, t, t * DEFAULT_STEP_FRACTION)?;
            let bar = num.est_error + f.entropy_error(t);
            worst = worst.max((num.entropy - f.entropy(t)).abs() / bar);
        }
        Ok((
            worst <= 1.0,
            format!(
                "max |S_num - S_fit| / combined error = {worst:.3} over {} points",
                f.points.len()
            ),
        ))
    });

    s.run(10, "serial_parallel_agreement", || {
        let system = config.system()?;
        let temps = [1e-3, 1.0, 300.0];
        let parallel = (free_energy_curve(&system, &temps)?, entropy_curve(&system, &[0.1])?);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .map_err(|e| CliError::Config(format!("cannot build thread pool: {e}")))?;
        let serial = pool.install(|| -> Result<_, CliError> {
            Ok((free_energy_curve(&system, &temps)?, entropy_curve(&system, &[0.1])?))
        })?;
        let ok = parallel == serial
            && parallel
                .0
                .points
                .iter()
                .zip(&serial.0.points)
                .all(|(a, b)| a.free_energy.to_bits() == b.free_energy.to_bits());
        Ok((
            ok,
            format!(
                "free energy at {} temperatures and entropy at 0.1 K bitwise equal: {ok}",
                temps.len()
            ),
        ))
    });

    if slow {
        let best = fit_for(config, GOLD_NU0_BEST_MEV);
        let best_err = |e: &CliError| CliError::Config(format!("best-sample fit failed: {e}"));
        s.run(6, "best_sample_c1_step", || {
            let (b, t) = (best.as_ref().map_err(best_err)?, typical.as_ref().map_err(fit_err)?);
            let r = b.c1 / t.c1;
            Ok((
                rel_dev(r, 1e3) <= 0.05,
                format!("C1 ratio best/typical = {r:.2} (target 1000 +- 5%)"),
            ))
        });
        s.run(6, "best_sample_c2_step", || {
            let (b, t) = (best.as_ref().map_err(best_err)?, typical.as_ref().map_err(fit_err)?);
            let r = b.c2 / t.c2;
            Ok((
                rel_dev(r, 10f64.powf(1.5)) <= 0.1,
                format!("C2 ratio best/typical = {r:.3} (target 31.62 +- 10%)"),
            ))
        });
        s.run(7, "best_sample_order_of_magnitude", || {
            let b = best.as_ref().map_err(best_err)?;
            let ok = within_factor(b.c1, C1_BEST, 10.0) && within_factor(b.c2, C2_BEST, 10.0);
            Ok((
                ok,
                format!(
                    "C1 = {:.4e}, C2 = {:.1}; references {C1_BEST:e}, {C2_BEST} within x/10",
                    b.c1, b.c2
                ),
            ))
        });
    }

    Ok(Report { checks: s.checks })
}
