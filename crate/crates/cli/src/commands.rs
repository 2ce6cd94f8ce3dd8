//! Subcommand bodies. Each returns an [`Output`] holding both renderings.

use crate::config::{config_error, Command, RunConfig};
use crate::CliError;
use casimir::analysis::{crossover_temperature, fit_asymptotic_coefficients_with, regime_report};
use casimir::lifshitz::free_energy_curve;
use casimir::materials::{nu_at, RelaxationModel};
use casimir::thermo::classify_nernst;
use casimir::{PermittivityModel, PlateSystem};
use serde_json::{json, Map, Value};

/// Below this temperature the Bloch–Grüneisen law is outside its validity
/// range for gold.
pub const BG_VALID_ABOVE_K: f64 = 4.0;

pub struct Output {
    pub csv: String,
    pub json: Value,
    /// Written next to a CSV output file, with extension `verdict.json`.
    pub sidecar: Option<Value>,
}

pub(crate) fn header(command: Command, config: &RunConfig) -> Result<String, CliError> {
    let mut s = format!("# casimir {} {}\n", env!("CARGO_PKG_VERSION"), command.name());
    for (k, v) in config.resolved(command)? {
        s.push_str(&format!("# {k} = {}\n", v.to_toml()));
    }
    Ok(s)
}

pub(crate) fn json_envelope(command: Command, config: &RunConfig) -> Result<Map<String, Value>, CliError> {
    let mut cfg = Map::new();
    for (k, v) in config.resolved(command)? {
        cfg.insert(k.to_string(), v.to_json());
    }
    let mut m = Map::new();
    m.insert("command".into(), json!(command.name()));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert("config".into(), Value::Object(cfg));
    Ok(m)
}

/// Shortest round-trip representation, so outputs are exact and stable.
pub(crate) fn num(x: f64) -> String {
    format!("{x:e}")
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn regime_label(model: &RelaxationModel, t: f64) -> Result<&'static str, CliError> {
    let phonon = match *model {
        RelaxationModel::Constant { .. } => return Ok("constant"),
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
        } => RelaxationModel::BlochGruneisen {
            debye_k,
            calib_k,
            calib_mev,
        },
    };
    let phonon_nu = nu_at(&phonon, t)?.mev;
    Ok(if phonon_nu < model.residual_mev() {
        "residual_dominated"
    } else if t >= BG_VALID_ABOVE_K {
        "bg_valid"
    } else {
        "bg_extrapolated"
    })
}

pub fn nu(config: &RunConfig) -> Result<Output, CliError> {
    let model = config.relaxation_model();
    let mut csv = header(Command::Nu, config)?;
    csv.push_str("T_K,nu_meV,regime_label\n");
    let mut rows = Vec::new();
    for t in config.sweep(Command::Nu)? {
        let nu = nu_at(&model, t)?.mev;
        let label = regime_label(&model, t)?;
        csv.push_str(&format!("{},{},{label}\n", num(t), num(nu)));
        rows.push(json!({"T_K": t, "nu_meV": nu, "regime_label": label}));
    }
    let mut j = json_envelope(Command::Nu, config)?;
    j.insert("rows".into(), Value::Array(rows));
    Ok(Output {
        csv,
        json: Value::Object(j),
        sidecar: None,
    })
}

pub fn regimes(config: &RunConfig) -> Result<Output, CliError> {
    let model = config.relaxation_model();
    let mut csv = header(Command::Regimes, config)?;
    csv.push_str("kind,T_K,nu_meV,m,zeta_meV,relation\n");
    let mut reports = Vec::new();
    for t in config.sweep(Command::Regimes)? {
        let r = regime_report(&model, t, config.m_max, config.strong_ratio)?;
        for e in &r.entries {
            csv.push_str(&format!(
                "regime,{},{},{},{},{}\n",
                num(t),
                num(r.nu_mev),
                e.m,
                num(e.zeta_mev),
                e.relation.as_str()
            ));
        }
        reports.push(json!({
            "T_K": t,
            "nu_meV": r.nu_mev,
            "strong_ratio": r.strong_ratio,
            "first_m_not_below_nu": r.first_not_below(),
            "entries": r.entries.iter().map(|e| json!({
                "m": e.m, "zeta_meV": e.zeta_mev, "relation": e.relation.as_str()
            })).collect::<Vec<_>>(),
        }));
    }
    // Crossover rows: T is the crossover temperature, ν the residual ν₀, m
    // the frequency index that reaches strong_ratio·ν₀ there.
    let mut crossovers = Vec::new();
    for &nu0 in &config.crossover_nu0_mev {
        let tc = crossover_temperature(nu0, config.crossover_n, config.strong_ratio)?;
        csv.push_str(&format!(
            "crossover,{},{},{},{},much_less\n",
            num(tc),
            num(nu0),
            config.crossover_n,
            num(config.strong_ratio * nu0)
        ));
        crossovers.push(json!({"nu0_meV": nu0, "n_freq": config.crossover_n, "T_K": tc}));
    }
    let mut j = json_envelope(Command::Regimes, config)?;
    j.insert("reports".into(), Value::Array(reports));
    j.insert("crossovers".into(), Value::Array(crossovers));
    Ok(Output {
        csv,
        json: Value::Object(j),
        sidecar: None,
    })
}

pub fn free_energy(config: &RunConfig) -> Result<Output, CliError> {
    let system = config.system()?;
    let curve = free_energy_curve(&system, &config.sweep(Command::FreeEnergy)?)?;
    let mut csv = header(Command::FreeEnergy, config)?;
    csv.push_str("T_K,F_J_per_m2,terms_used,est_error\n");
    for p in &curve.points {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            num(p.temperature_k),
            num(p.free_energy),
            p.terms_used,
            num(p.est_error)
        ));
    }
    let mut j = json_envelope(Command::FreeEnergy, config)?;
    j.insert(
        "points".into(),
        curve
            .points
            .iter()
            .map(|p| {
                json!({"T_K": p.temperature_k, "F_J_per_m2": p.free_energy,
                       "terms_used": p.terms_used, "est_error": p.est_error})
            })
            .collect(),
    );
    Ok(Output {
        csv,
        json: Value::Object(j),
        sidecar: None,
    })
}

pub fn entropy(config: &RunConfig) -> Result<Output, CliError> {
    let system = config.system()?;
    let verdict = classify_nernst(&system, &config.sweep(Command::Entropy)?)?;
    let mut csv = header(Command::Entropy, config)?;
    csv.push_str("T_K,S_J_per_m2_K,step_K,est_error\n");
    for p in &verdict.entropy.points {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            num(p.temperature_k),
            num(p.entropy),
            num(p.step_used),
            num(p.est_error)
        ));
    }
    let verdict_json = json!({
        "classification": verdict.classification.as_str(),
        "s_limit_estimate": verdict.s_limit_estimate,
        "s_limit_error": verdict.s_limit_error,
        "evidence_window_K": [verdict.evidence_window.0, verdict.evidence_window.1],
    });
    csv.push_str(&format!(
        "# verdict.classification = {:?}\n",
        verdict.classification.as_str()
    ));
    csv.push_str(&format!(
        "# verdict.s_limit_estimate = {}\n",
        num(verdict.s_limit_estimate)
    ));
    csv.push_str(&format!("# verdict.s_limit_error = {}\n", num(verdict.s_limit_error)));
    csv.push_str(&format!(
        "# verdict.evidence_window_K = [{}, {}]\n",
        num(verdict.evidence_window.0),
        num(verdict.evidence_window.1)
    ));

    let mut j = json_envelope(Command::Entropy, config)?;
    j.insert(
        "points".into(),
        verdict
            .entropy
            .points
            .iter()
            .map(|p| {
                json!({"T_K": p.temperature_k, "S_J_per_m2_K": p.entropy,
                       "step_K": p.step_used, "est_error": p.est_error})
            })
            .collect(),
    );
    j.insert("verdict".into(), verdict_json.clone());

    let mut side = json_envelope(Command::Entropy, config)?;
    side.insert("verdict".into(), verdict_json);
    Ok(Output {
        csv,
        json: Value::Object(j),
        sidecar: Some(Value::Object(side)),
    })
}

pub fn fit(config: &RunConfig) -> Result<Output, CliError> {
    let nu0 = config.fit_nu0()?;
    let system = PlateSystem::new(
        config.separation_m,
        PermittivityModel::Drude {
            omega_p_mev: config.omega_p_mev,
            relaxation: RelaxationModel::Constant { nu0_mev: nu0 },
        },
    )
    .map_err(config_error)?
    .with_numeric(config.numeric);
    let temps = config.sweep(Command::Fit)?;
    let f = fit_asymptotic_coefficients_with(&system, &temps, config.strong_ratio)?;

    let mut csv = header(Command::Fit, config)?;
    for (k, v) in [
        ("fit.C1_J_per_m2_K2", num(f.c1)),
        ("fit.C1_error", num(f.c1_error)),
        ("fit.C2_per_sqrt_K", num(f.c2)),
        ("fit.C2_error", num(f.c2_error)),
        ("fit.rms_residual", num(f.rms_residual)),
        ("fit.nu0_mev", num(f.nu0_mev)),
        ("fit.separation_m", num(f.separation_m)),
    ] {
        csv.push_str(&format!("# {k} = {v}\n"));
    }
    csv.push_str(&format!(
        "# fit.window_K = [{}, {}]\n",
        num(f.fit_window.0),
        num(f.fit_window.1)
    ));
    csv.push_str("T_K,delta_F_J_per_m2,est_error,terms_used,delta_F_over_T2\n");
    for p in &f.points {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            num(p.temperature_k),
            num(p.delta_f),
            num(p.est_error),
            p.terms_used,
            num(p.delta_f / p.temperature_k.powi(2))
        ));
    }

    let mut j = json_envelope(Command::Fit, config)?;
    j.insert(
        "fit".into(),
        json!({
            "C1_J_per_m2_K2": f.c1,
            "C1_error": f.c1_error,
            "C2_per_sqrt_K": f.c2,
            "C2_error": f.c2_error,
            "fit_window_K": [f.fit_window.0, f.fit_window.1],
            "rms_residual": f.rms_residual,
            "separation_m": f.separation_m,
            "nu0_meV": f.nu0_mev,
        }),
    );
    j.insert(
        "points".into(),
        f.points
            .iter()
            .map(|p| {
                json!({"T_K": p.temperature_k, "delta_F_J_per_m2": p.delta_f,
                       "est_error": p.est_error, "terms_used": p.terms_used})
            })
            .collect(),
    );
    Ok(Output {
        csv,
        json: Value::Object(j),
        sidecar: None,
    })
}
