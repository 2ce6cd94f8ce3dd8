//! Run configuration: a TOML file of flat dotted keys with units in the key
//! names, e.g. `material.omega_p_mev = 9000`.
//!
//! Every key has a default, so an empty file (or no file) is the gold
//! configuration. Unknown keys are rejected. Each command resolves its own
//! temperature sweep, and the resolved configuration, defaults included, is
//! embedded in every output.

use crate::CliError;
use casimir::analysis::{default_fit_temperatures, DEFAULT_FIT_POINTS, DEFAULT_STRONG_RATIO};
use casimir::materials::{GOLD_DEBYE_K, GOLD_NU0_BEST_MEV, GOLD_NU0_TYPICAL_MEV, GOLD_NU_300K_MEV, GOLD_OMEGA_P_MEV};
use casimir::thermo::log_grid_descending;
use casimir::{NumericControls, PermittivityModel, PlateSystem, RelaxationModel, TailMethod};
use std::collections::BTreeMap;
use std::path::Path;

pub const OMEGA_P_RANGE_MEV: (f64, f64) = (1e3, 1e5);
pub const SEPARATION_RANGE_M: (f64, f64) = (1e-8, 1e-4);
pub const TEMPERATURE_RANGE_K: (f64, f64) = (1e-8, 1e3);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Nu,
    Regimes,
    FreeEnergy,
    Entropy,
    Fit,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Nu => "nu",
            Command::Regimes => "regimes",
            Command::FreeEnergy => "free-energy",
            Command::Entropy => "entropy",
            Command::Fit => "fit",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(CliError::Config(format!(
                "output.format must be \"csv\" or \"json\" (got {s:?})"
            ))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// A scalar or list config value, printed back as TOML.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(u64),
    Str(String),
    Floats(Vec<f64>),
}

impl Value {
    pub fn to_toml(&self) -> String {
        match self {
            Value::Float(x) => format!("{x:?}"),
            Value::Int(n) => n.to_string(),
            Value::Str(s) => format!("{s:?}"),
            Value::Floats(v) => {
                let items: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
                format!("[{}]", items.join(", "))
            }
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Float(x) => serde_json::json!(x),
            Value::Int(n) => serde_json::json!(n),
            Value::Str(s) => serde_json::json!(s),
            Value::Floats(v) => serde_json::json!(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// "drude" or "plasma".
    pub model: String,
    pub omega_p_mev: f64,
    /// "constant", "bloch_gruneisen" or "bloch_gruneisen_residual".
    pub relaxation: String,
    pub nu0_mev: f64,
    pub debye_k: f64,
    pub nu_calib_k: f64,
    pub nu_calib_mev: f64,
    pub separation_m: f64,
    pub numeric: NumericControls,
    pub strong_ratio: f64,
    pub temperatures_k: Option<Vec<f64>>,
    pub t_min_k: Option<f64>,
    pub t_max_k: Option<f64>,
    pub points: Option<u64>,
    pub m_max: u64,
    pub crossover_n: u64,
    pub crossover_nu0_mev: Vec<f64>,
    pub format: Format,
    pub output_path: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: "drude".into(),
            omega_p_mev: GOLD_OMEGA_P_MEV,
            relaxation: "bloch_gruneisen_residual".into(),
            nu0_mev: GOLD_NU0_TYPICAL_MEV,
            debye_k: GOLD_DEBYE_K,
            nu_calib_k: 300.0,
            nu_calib_mev: GOLD_NU_300K_MEV,
            separation_m: 1e-6,
            numeric: NumericControls::default(),
            strong_ratio: DEFAULT_STRONG_RATIO,
            temperatures_k: None,
            t_min_k: None,
            t_max_k: None,
            points: None,
            m_max: 10,
            crossover_n: 10,
            crossover_nu0_mev: vec![GOLD_NU0_TYPICAL_MEV, GOLD_NU0_BEST_MEV],
            format: Format::Csv,
            output_path: None,
        }
    }
}

/// Flatten nested TOML tables into dotted keys.
fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, toml::Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

fn as_f64(key: &str, v: &toml::Value) -> Result<f64, CliError> {
    match v {
        toml::Value::Float(x) => Ok(*x),
        toml::Value::Integer(n) => Ok(*n as f64),
        _ => Err(CliError::Config(format!("{key} must be a number"))),
    }
}

fn as_u64(key: &str, v: &toml::Value) -> Result<u64, CliError> {
    match v {
        toml::Value::Integer(n) if *n >= 0 => Ok(*n as u64),
        _ => Err(CliError::Config(format!("{key} must be a non-negative integer"))),
    }
}

fn as_str(key: &str, v: &toml::Value) -> Result<String, CliError> {
    match v {
        toml::Value::String(s) => Ok(s.clone()),
        _ => Err(CliError::Config(format!("{key} must be a string"))),
    }
}

fn as_f64_list(key: &str, v: &toml::Value) -> Result<Vec<f64>, CliError> {
    match v {
        toml::Value::Array(items) => items.iter().map(|x| as_f64(key, x)).collect(),
        _ => Err(CliError::Config(format!("{key} must be a list of numbers"))),
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let table: toml::Table = text.parse().map_err(|e| CliError::Config(format!("{e}")))?;
        let mut flat = BTreeMap::new();
        flatten("", &table, &mut flat);
        let mut c = RunConfig::default();
        for (key, v) in &flat {
            let k = key.as_str();
            match k {
                "material.model" => c.model = as_str(k, v)?,
                "material.omega_p_mev" => c.omega_p_mev = as_f64(k, v)?,
                "material.relaxation" => c.relaxation = as_str(k, v)?,
                "material.nu0_mev" => c.nu0_mev = as_f64(k, v)?,
                "material.debye_k" => c.debye_k = as_f64(k, v)?,
                "material.nu_calib_k" => c.nu_calib_k = as_f64(k, v)?,
                "material.nu_calib_mev" => c.nu_calib_mev = as_f64(k, v)?,
                "geometry.separation_m" => c.separation_m = as_f64(k, v)?,
                "numerics.quad_rel_tol" => c.numeric.quad_rel_tol = as_f64(k, v)?,
                "numerics.sum_rel_tol" => c.numeric.sum_rel_tol = as_f64(k, v)?,
                "numerics.max_matsubara_terms" => c.numeric.max_matsubara_terms = as_u64(k, v)?,
                "numerics.tail_method" => {
                    c.numeric.tail_method = match as_str(k, v)?.as_str() {
                        "euler_maclaurin" => TailMethod::EulerMaclaurin,
                        "truncate" => TailMethod::Truncate,
                        other => {
                            return Err(CliError::Config(format!(
                                "numerics.tail_method must be \"euler_maclaurin\" or \"truncate\" (got {other:?})"
                            )))
                        }
                    }
                }
                "numerics.strong_ratio" => c.strong_ratio = as_f64(k, v)?,
                "sweep.temperatures_k" => c.temperatures_k = Some(as_f64_list(k, v)?),
                "sweep.t_min_k" => c.t_min_k = Some(as_f64(k, v)?),
                "sweep.t_max_k" => c.t_max_k = Some(as_f64(k, v)?),
                "sweep.points" => c.points = Some(as_u64(k, v)?),
                "regimes.m_max" => c.m_max = as_u64(k, v)?,
                "regimes.crossover_n" => c.crossover_n = as_u64(k, v)?,
                "regimes.crossover_nu0_mev" => c.crossover_nu0_mev = as_f64_list(k, v)?,
                "output.format" => c.format = Format::parse(&as_str(k, v)?)?,
                "output.path" => c.output_path = Some(as_str(k, v)?),
                _ => return Err(CliError::Config(format!("unknown config key {key:?}"))),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let in_range = |name: &str, x: f64, (lo, hi): (f64, f64)| {
            if x.is_finite() && x >= lo && x <= hi {
                Ok(())
            } else {
                Err(CliError::Config(format!("{name} = {x} lies outside [{lo:e}, {hi:e}]")))
            }
        };
        in_range("material.omega_p_mev", self.omega_p_mev, OMEGA_P_RANGE_MEV)?;
        in_range("geometry.separation_m", self.separation_m, SEPARATION_RANGE_M)?;
        if !matches!(self.model.as_str(), "drude" | "plasma") {
            return Err(CliError::Config(format!(
                "material.model must be \"drude\" or \"plasma\" (got {:?})",
                self.model
            )));
        }
        if !matches!(
            self.relaxation.as_str(),
            "constant" | "bloch_gruneisen" | "bloch_gruneisen_residual"
        ) {
            return Err(CliError::Config(format!(
                "material.relaxation must be \"constant\", \"bloch_gruneisen\" or \"bloch_gruneisen_residual\" (got {:?})",
                self.relaxation
            )));
        }
        self.relaxation_model().validate().map_err(config_error)?;
        self.numeric.validate().map_err(config_error)?;
        if !(self.strong_ratio > 0.0 && self.strong_ratio <= 0.2) {
            return Err(CliError::Config(format!(
                "numerics.strong_ratio must lie in (0, 0.2] (got {})",
                self.strong_ratio
            )));
        }
        if self.temperatures_k.is_some() && (self.t_min_k.is_some() || self.t_max_k.is_some() || self.points.is_some())
        {
            return Err(CliError::Config(
                "give either sweep.temperatures_k or sweep.t_min_k/t_max_k/points, not both".into(),
            ));
        }
        if let Some(list) = &self.temperatures_k {
            if list.is_empty() {
                return Err(CliError::Config("sweep.temperatures_k is empty".into()));
            }
            for &t in list {
                // T = 0 is meaningful only for ν(T); the other commands reject it.
                if t != 0.0 {
                    in_range("sweep.temperatures_k entry", t, TEMPERATURE_RANGE_K)?;
                }
            }
        }
        for (name, t) in [("sweep.t_min_k", self.t_min_k), ("sweep.t_max_k", self.t_max_k)] {
            if let Some(t) = t {
                in_range(name, t, TEMPERATURE_RANGE_K)?;
            }
        }
        if let (Some(lo), Some(hi)) = (self.t_min_k, self.t_max_k) {
            if !(lo < hi) {
                return Err(CliError::Config("sweep.t_min_k must be below sweep.t_max_k".into()));
            }
        }
        if let Some(n) = self.points {
            if !(2..=10_000).contains(&n) {
                return Err(CliError::Config(format!(
                    "sweep.points must lie in [2, 10000] (got {n})"
                )));
            }
        }
        if self.m_max == 0 || self.m_max > 100_000 {
            return Err(CliError::Config("regimes.m_max must lie in [1, 100000]".into()));
        }
        if self.crossover_n == 0 {
            return Err(CliError::Config("regimes.crossover_n must be ≥ 1".into()));
        }
        if self.crossover_nu0_mev.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(CliError::Config("regimes.crossover_nu0_mev entries must be > 0".into()));
        }
        Ok(())
    }

    pub fn relaxation_model(&self) -> RelaxationModel {
        match self.relaxation.as_str() {
            "constant" => RelaxationModel::Constant { nu0_mev: self.nu0_mev },
            "bloch_gruneisen" => RelaxationModel::BlochGruneisen {
                debye_k: self.debye_k,
                calib_k: self.nu_calib_k,
                calib_mev: self.nu_calib_mev,
            },
            _ => RelaxationModel::BlochGruneisenResidual {
                debye_k: self.debye_k,
                calib_k: self.nu_calib_k,
                calib_mev: self.nu_calib_mev,
                nu0_mev: self.nu0_mev,
            },
        }
    }

    pub fn permittivity(&self) -> PermittivityModel {
        if self.model == "plasma" {
            PermittivityModel::Plasma {
                omega_p_mev: self.omega_p_mev,
            }
        } else {
            PermittivityModel::Drude {
                omega_p_mev: self.omega_p_mev,
                relaxation: self.relaxation_model(),
            }
        }
    }

    pub fn system(&self) -> Result<PlateSystem, CliError> {
        Ok(PlateSystem::new(self.separation_m, self.permittivity())
            .map_err(config_error)?
            .with_numeric(self.numeric))
    }

    /// The residual ν₀ used as the constant relaxation of the asymptotic fit.
    pub fn fit_nu0(&self) -> Result<f64, CliError> {
        let nu0 = self.relaxation_model().residual_mev();
        if self.model != "drude" || !(nu0 > 0.0) {
            return Err(CliError::Config(
                "fit needs material.model = \"drude\" with a residual material.nu0_mev > 0".into(),
            ));
        }
        Ok(nu0)
    }

    /// Temperatures for `command`: the configured list or log range, else
    /// the command's default. Ascending, except for `entropy`, which needs a
    /// grid descending toward zero.
    pub fn sweep(&self, command: Command) -> Result<Vec<f64>, CliError> {
        let mut temps = if let Some(list) = &self.temperatures_k {
            list.clone()
        } else {
            let (lo, hi, n) = match command {
                Command::Nu => (1e-2, 800.0, 25),
                Command::Regimes => (1e-4, 300.0, 8),
                Command::FreeEnergy => (1e-3, 300.0, 12),
                Command::Entropy => (1e-7, 1.0, 22),
                Command::Fit => {
                    let lo_hi = (self.t_min_k, self.t_max_k);
                    if lo_hi == (None, None) && self.points.is_none() {
                        return default_fit_temperatures(self.fit_nu0()?, self.strong_ratio, DEFAULT_FIT_POINTS)
                            .map_err(config_error);
                    }
                    let tc = casimir::analysis::crossover_temperature(self.fit_nu0()?, 10, self.strong_ratio)
                        .map_err(config_error)?;
                    (tc * 1e-4, tc * 1e-3, DEFAULT_FIT_POINTS as u64)
                }
                Command::Verify => return Ok(Vec::new()),
            };
            let lo = self.t_min_k.unwrap_or(lo);
            let hi = self.t_max_k.unwrap_or(hi);
            if !(lo < hi) {
                return Err(CliError::Config(format!("empty temperature range [{lo:e}, {hi:e}]")));
            }
            let mut g = log_grid_descending(hi, lo, self.points.unwrap_or(n) as usize);
            g.reverse();
            g
        };
        if command != Command::Nu && temps.contains(&0.0) {
            return Err(CliError::Config(format!(
                "T = 0 is only allowed for the nu command, not {}",
                command.name()
            )));
        }
        match command {
            Command::Entropy => temps.sort_by(|a, b| b.total_cmp(a)),
            _ => temps.sort_by(f64::total_cmp),
        }
        temps.dedup();
        Ok(temps)
    }

    /// Fully resolved settings for `command` as (dotted key, value) pairs,
    /// in a fixed order.
    pub fn resolved(&self, command: Command) -> Result<Vec<(&'static str, Value)>, CliError> {
        let mut out = vec![
            ("material.model", Value::Str(self.model.clone())),
            ("material.omega_p_mev", Value::Float(self.omega_p_mev)),
        ];
        if self.model == "drude" || command == Command::Nu {
            out.push(("material.relaxation", Value::Str(self.relaxation.clone())));
            if self.relaxation != "bloch_gruneisen" {
                out.push(("material.nu0_mev", Value::Float(self.nu0_mev)));
            }
            if self.relaxation != "constant" {
                out.push(("material.debye_k", Value::Float(self.debye_k)));
                out.push(("material.nu_calib_k", Value::Float(self.nu_calib_k)));
                out.push(("material.nu_calib_mev", Value::Float(self.nu_calib_mev)));
            }
        }
        out.push(("geometry.separation_m", Value::Float(self.separation_m)));
        out.push(("numerics.quad_rel_tol", Value::Float(self.numeric.quad_rel_tol)));
        out.push(("numerics.sum_rel_tol", Value::Float(self.numeric.sum_rel_tol)));
        out.push((
            "numerics.max_matsubara_terms",
            Value::Int(self.numeric.max_matsubara_terms),
        ));
        out.push((
            "numerics.tail_method",
            Value::Str(
                match self.numeric.tail_method {
                    TailMethod::EulerMaclaurin => "euler_maclaurin",
                    TailMethod::Truncate => "truncate",
                }
                .into(),
            ),
        ));
        out.push(("numerics.strong_ratio", Value::Float(self.strong_ratio)));
        if command != Command::Verify {
            out.push(("sweep.temperatures_k", Value::Floats(self.sweep(command)?)));
        }
        if command == Command::Regimes {
            out.push(("regimes.m_max", Value::Int(self.m_max)));
            out.push(("regimes.crossover_n", Value::Int(self.crossover_n)));
            out.push((
                "regimes.crossover_nu0_mev",
                Value::Floats(self.crossover_nu0_mev.clone()),
            ));
        }
        out.push(("output.format", Value::Str(self.format.as_str().into())));
        Ok(out)
    }
}

pub(crate) fn config_error(e: casimir::Error) -> CliError {
    CliError::Config(e.to_string())
}
