//! Acceptance criteria 1–10, one PASS/FAIL line each. Reference values are
//! recomputed here from CODATA constants where a closed form exists.

use casimir::analysis::{
    crossover_temperature, default_fit_temperatures, fit_asymptotic_coefficients, regime_report, scaling_check,
    Relation, DEFAULT_FIT_POINTS, DEFAULT_STRONG_RATIO,
};
use casimir::lifshitz::{free_energy_curve, zero_temperature_energy};
use casimir::materials::{nu_at, GOLD_NU0_BEST_MEV, GOLD_NU0_TYPICAL_MEV, GOLD_OMEGA_P_MEV};
use casimir::quantities::matsubara_frequency;
use casimir::thermo::{
    classify_nernst, entropy, entropy_curve, entropy_plateau, log_grid_descending, NernstClassification,
    DEFAULT_STEP_FRACTION,
};
use casimir::{PermittivityModel, PlateSystem, RelaxationModel};
use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

const K_B: f64 = 1.380_649e-23;
const HBAR: f64 = 1.054_571_817e-34;
const E_CHARGE: f64 = 1.602_176_634e-19;
const C_LIGHT: f64 = 299_792_458.0;

type Outcome = Result<String, String>;
type Criterion = (u8, &'static str, fn() -> Outcome, Duration);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// ζ₁ = 2πkT/ħ in meV.
fn zeta1_mev(t: f64) -> f64 {
    2.0 * PI * K_B * t / E_CHARGE * 1e3
}

fn drude(relaxation: RelaxationModel) -> PlateSystem {
    PlateSystem::new(
        1e-6,
        PermittivityModel::Drude {
            omega_p_mev: GOLD_OMEGA_P_MEV,
            relaxation,
        },
    )
    .unwrap()
}

fn phonon() -> RelaxationModel {
    RelaxationModel::gold_perfect_lattice()
}

fn c1_matsubara() -> Outcome {
    let z = matsubara_frequency(1, 300.0).mev;
    let oracle = zeta1_mev(300.0);
    ensure(
        (z / 161.9 - 1.0).abs() <= 5e-3 && (z / oracle - 1.0).abs() < 1e-12,
        format!("zeta_1(300 K) = {z:.4} meV (oracle {oracle:.4})"),
    )
}

fn c2_relaxation() -> Outcome {
    let m = phonon();
    let nu300 = nu_at(&m, 300.0).map_err(err)?.mev;
    let r = nu_at(&m, 2.0).map_err(err)?.mev / nu_at(&m, 1.0).map_err(err)?.mev;
    ensure(
        nu300 == 34.5 && (r / 32.0 - 1.0).abs() <= 0.02,
        format!("nu(300 K) = {nu300} meV, nu(2 K)/nu(1 K) = {r:.4}"),
    )
}

fn c3_regimes() -> Outcome {
    let m = phonon();
    let hot = regime_report(&m, 300.0, 50, DEFAULT_STRONG_RATIO).map_err(err)?;
    let all_above = hot.entries.iter().all(|e| e.zeta_mev > hot.nu_mev);
    let cold = regime_report(&m, 10.0, 1, DEFAULT_STRONG_RATIO).map_err(err)?;
    let ratio = cold.nu_mev / zeta1_mev(10.0);
    ensure(
        all_above && cold.entries[0].relation == Relation::MuchGreater && ratio <= 0.1,
        format!("300 K: nu below all zeta_m: {all_above}; 10 K: nu/zeta_1 = {ratio:.3e}"),
    )
}

fn c4_crossover() -> Outcome {
    let oracle = |nu0: f64| 0.1 * nu0 / (10.0 * zeta1_mev(1.0));
    let a = crossover_temperature(GOLD_NU0_TYPICAL_MEV, 10, 0.1).map_err(err)?;
    let b = crossover_temperature(GOLD_NU0_BEST_MEV, 10, 0.1).map_err(err)?;
    ensure(
        (1e-4..=1e-3).contains(&a)
            && (1e-7..=1e-6).contains(&b)
            && (a / oracle(GOLD_NU0_TYPICAL_MEV) - 1.0).abs() < 1e-9
            && (b / oracle(GOLD_NU0_BEST_MEV) - 1.0).abs() < 1e-9,
        format!("T = {a:.4e} K and {b:.4e} K"),
    )
}

fn c5_ideal_mirror() -> Outcome {
    let a = 1e-6;
    let system = PlateSystem::new(a, PermittivityModel::Plasma { omega_p_mev: 1e6 }).map_err(err)?;
    let e = zero_temperature_energy(&system).map_err(err)?.value;
    let ideal = -PI.powi(2) * HBAR * C_LIGHT / (720.0 * a.powi(3));
    let dev = (e / ideal - 1.0).abs();
    ensure(
        dev <= 0.01,
        format!("E = {e:.6e} J/m2, ideal {ideal:.6e}, deviation {:.3}%", dev * 100.0),
    )
}

fn c6_scaling() -> Outcome {
    let table = scaling_check(1e-6, &[3.45, 0.345]).map_err(err)?;
    let (a, b) = table.spreads();
    ensure(
        a <= 0.05 && b <= 0.05,
        format!("C1*nu0 spread {a:.2e}, C2*sqrt(nu0) spread {b:.2e}"),
    )
}

fn c7_absolute() -> Outcome {
    let system = drude(RelaxationModel::Constant {
        nu0_mev: GOLD_NU0_TYPICAL_MEV,
    });
    let temps =
        default_fit_temperatures(GOLD_NU0_TYPICAL_MEV, DEFAULT_STRONG_RATIO, DEFAULT_FIT_POINTS).map_err(err)?;
    let f = fit_asymptotic_coefficients(&system, &temps).map_err(err)?;
    let within = |x: f64, t: f64| x >= t / 10.0 && x <= t * 10.0;
    ensure(
        within(f.c1, 5.81e-10) && within(f.c2, 95.75),
        format!("C1 = {:.4e} J/(m2 K2), C2 = {:.3} K^-1/2", f.c1, f.c2),
    )
}

fn c8_nernst() -> Outcome {
    let plasma = PlateSystem::new(
        1e-6,
        PermittivityModel::Plasma {
            omega_p_mev: GOLD_OMEGA_P_MEV,
        },
    )
    .map_err(err)?;
    let p = classify_nernst(&plasma, &log_grid_descending(1.0, 1e-3, 13)).map_err(err)?;
    let impure = drude(RelaxationModel::Constant {
        nu0_mev: GOLD_NU0_TYPICAL_MEV,
    });
    let d = classify_nernst(&impure, &log_grid_descending(1.0, 1e-7, 22)).map_err(err)?;
    let perfect = drude(phonon());
    let b = classify_nernst(&perfect, &log_grid_descending(0.5, 5e-3, 9)).map_err(err)?;
    let plateau = entropy_plateau(&b.entropy, 0.05, 0.5).map_err(err)?;
    ensure(
        p.classification.satisfied()
            && p.s_limit_estimate.abs() <= 3.0 * p.s_limit_error
            && d.classification == NernstClassification::SatisfiedWithNegativeDip
            && b.classification == NernstClassification::ViolatedNegativeLimit
            && plateau.mean < 0.0
            && plateau.variation <= 0.1,
        format!(
            "plasma {}, constant nu0 {}, perfect lattice {} (plateau {:.4e} J/(m2 K), variation {:.1e})",
            p.classification.as_str(),
            d.classification.as_str(),
            b.classification.as_str(),
            plateau.mean,
            plateau.variation
        ),
    )
}

fn c9_consistency() -> Outcome {
    let system = drude(RelaxationModel::Constant {
        nu0_mev: GOLD_NU0_TYPICAL_MEV,
    });
    let temps =
        default_fit_temperatures(GOLD_NU0_TYPICAL_MEV, DEFAULT_STRONG_RATIO, DEFAULT_FIT_POINTS).map_err(err)?;
    let f = fit_asymptotic_coefficients(&system, &temps).map_err(err)?;
    let mut worst = 0.0f64;
    for &t in &temps {
        let s = entropy(&system, t, t * DEFAULT_STEP_FRACTION).map_err(err)?;
        let fitted = -2.0 * f.c1 * t + 2.5 * f.c1 * f.c2 * t.powf(1.5);
        worst = worst.max((s.entropy - fitted).abs() / (s.est_error + f.entropy_error(t)));
    }
    ensure(worst <= 1.0, format!("max |S - S_fit| / combined error = {worst:.3}"))
}

fn c10_determinism() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_casimir"))
            .arg("verify")
            .output()
            .map_err(err)
    };
    let (a, b) = (run()?, run()?);
    let identical = a.status.success() && a.stdout == b.stdout && !a.stdout.is_empty();

    let system = drude(RelaxationModel::gold_with_residual(GOLD_NU0_TYPICAL_MEV));
    let temps = [1e-3, 1.0, 300.0];
    let parallel = (
        free_energy_curve(&system, &temps).map_err(err)?,
        entropy_curve(&system, &[0.1]).map_err(err)?,
    );
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(err)?;
    let serial = pool.install(|| -> Result<_, String> {
        Ok((
            free_energy_curve(&system, &temps).map_err(err)?,
            entropy_curve(&system, &[0.1]).map_err(err)?,
        ))
    })?;
    ensure(
        identical && parallel == serial,
        format!(
            "two verify reports identical: {identical} ({} bytes); serial and parallel equal: {}",
            a.stdout.len(),
            parallel == serial
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "Matsubara anchor", c1_matsubara, Duration::from_millis(1)),
        (2, "relaxation anchors", c2_relaxation, Duration::from_secs(1)),
        (3, "regime reproduction", c3_regimes, Duration::from_secs(1)),
        (4, "crossover temperatures", c4_crossover, Duration::from_millis(1)),
        (5, "ideal-mirror limit", c5_ideal_mirror, Duration::from_secs(10)),
        (6, "coefficient scaling", c6_scaling, Duration::from_secs(600)),
        (7, "absolute coefficients", c7_absolute, Duration::from_secs(3600)),
        (8, "Nernst classification triplet", c8_nernst, Duration::from_secs(1800)),
        (9, "fit/entropy consistency", c9_consistency, Duration::from_secs(3600)),
        (10, "determinism", c10_determinism, Duration::from_secs(3600)),
    ];
    let mut failed = 0;
    for (n, name, f, budget) in criteria {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= budget => (true, d),
            Ok(d) => (false, format!("{d}; over time budget {budget:?}")),
            Err(d) => (false, d),
        };
        failed += usize::from(!ok);
        println!(
            "criterion {n:>2} {}: {name}: {detail} [{:.3} s]",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
