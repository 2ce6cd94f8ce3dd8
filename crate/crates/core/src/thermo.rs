//! Casimir entropy S = −∂F/∂T and the Nernst-theorem verdict.
//!
//! The derivative is taken of the thermal correction ΔF = F − E(ν(0)), which
//! carries the whole temperature dependence of F, including that of ν(T).
//! This avoids differencing two copies of the much larger E.

use crate::error::{Error, Result};
use crate::lifshitz::{thermal_correction_unguarded, PlateSystem};
use crate::lsq;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Step as a fraction of T used when none is given.
pub const DEFAULT_STEP_FRACTION: f64 = 1.0 / 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyPoint {
    pub temperature_k: f64,
    pub entropy: f64,
    pub step_used: f64,
    pub est_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyCurve {
    pub points: Vec<EntropyPoint>,
    pub system: PlateSystem,
}

/// S(T) from central differences with steps h and h/2, combined by
/// Richardson extrapolation.
pub fn entropy(system: &PlateSystem, temperature_k: f64, step_k: f64) -> Result<EntropyPoint> {
    if !(step_k > 0.0 && temperature_k > step_k) {
        return Err(crate::error::invalid(format!(
            "entropy needs T > step > 0 (T = {temperature_k}, step = {step_k})"
        )));
    }
    let h = step_k;
    let nodes = [
        temperature_k - h,
        temperature_k - h / 2.0,
        temperature_k + h / 2.0,
        temperature_k + h,
    ];
    let values = nodes
        .par_iter()
        .map(|&t| thermal_correction_unguarded(system, t))
        .collect::<Result<Vec<_>>>()?;

    let coarse = -(values[3].value - values[0].value) / (2.0 * h);
    let fine = -(values[2].value - values[1].value) / h;
    let s = (4.0 * fine - coarse) / 3.0;
    let noise = ((values[3].est_error + values[0].est_error) / (2.0 * h)
        + 4.0 * (values[2].est_error + values[1].est_error) / h)
        / 3.0;
    let discrepancy = (s - fine).abs();
    if discrepancy > 0.1 * s.abs() && discrepancy > noise {
        return Err(Error::UnconvergedEntropy {
            temperature_k,
            entropy: s,
            discrepancy,
        });
    }
    Ok(EntropyPoint {
        temperature_k,
        entropy: s,
        step_used: h,
        est_error: discrepancy + noise,
    })
}

/// S over a temperature list with step T·DEFAULT_STEP_FRACTION, in input
/// order.
pub fn entropy_curve(system: &PlateSystem, temperatures_k: &[f64]) -> Result<EntropyCurve> {
    let points = temperatures_k
        .par_iter()
        .map(|&t| entropy(system, t, t * DEFAULT_STEP_FRACTION))
        .collect::<Result<Vec<_>>>()?;
    Ok(EntropyCurve {
        points,
        system: *system,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NernstClassification {
    SatisfiedSmooth,
    SatisfiedWithNegativeDip,
    ViolatedNegativeLimit,
    ViolatedPositiveLimit,
}

impl NernstClassification {
    pub fn satisfied(self) -> bool {
        matches!(self, Self::SatisfiedSmooth | Self::SatisfiedWithNegativeDip)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::SatisfiedSmooth => "satisfied_smooth",
            Self::SatisfiedWithNegativeDip => "satisfied_with_negative_dip",
            Self::ViolatedNegativeLimit => "violated_negative_limit",
            Self::ViolatedPositiveLimit => "violated_positive_limit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NernstVerdict {
    pub classification: NernstClassification,
    pub s_limit_estimate: f64,
    pub s_limit_error: f64,
    /// The lowest decade for a limit verdict, the span of significantly
    /// negative points for a dip.
    pub evidence_window: (f64, f64),
    pub entropy: EntropyCurve,
}

/// Extrapolate S to T = 0 over the lowest decade of the grid and classify.
///
/// The limit is the intercept of a weighted straight-line fit. Its error
/// adds the fit uncertainty and the shift of the intercept when a T² term is
/// allowed, which measures the curvature bias of the straight line.
pub fn classify_nernst(system: &PlateSystem, temperatures_k: &[f64]) -> Result<NernstVerdict> {
    check_grid(temperatures_k)?;
    let curve = entropy_curve(system, temperatures_k)?;
    classify_curve(curve)
}

fn check_grid(t: &[f64]) -> Result<()> {
    if t.len() < 8 {
        return Err(Error::InsufficientGrid(format!("{} points, need at least 8", t.len())));
    }
    if t.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::InsufficientGrid("temperatures must be finite and > 0".into()));
    }
    if t.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InsufficientGrid("grid must be strictly decreasing".into()));
    }
    let span = t[0] / t[t.len() - 1];
    if span < 100.0 * (1.0 - 1e-12) {
        return Err(Error::InsufficientGrid(format!(
            "grid spans {:.2} decades, need at least 2",
            span.log10()
        )));
    }
    Ok(())
}

pub(crate) fn classify_curve(curve: EntropyCurve) -> Result<NernstVerdict> {
    let t_min = curve.points.last().map_or(0.0, |p| p.temperature_k);
    let t_top = 10.0 * t_min * (1.0 + 1e-12);
    let low: Vec<&EntropyPoint> = curve.points.iter().filter(|p| p.temperature_k <= t_top).collect();
    if low.len() < 4 {
        return Err(Error::InsufficientGrid(format!(
            "lowest decade holds {} points, need at least 4",
            low.len()
        )));
    }
    let xs: Vec<f64> = low.iter().map(|p| p.temperature_k / t_min).collect();
    let ys: Vec<f64> = low.iter().map(|p| p.entropy).collect();
    let sig: Vec<f64> = low.iter().map(|p| p.est_error.max(f64::MIN_POSITIVE)).collect();
    let line = lsq::fit(&xs, &ys, Some(&sig), &[&|_| 1.0, &|x| x])?;
    let quad = lsq::fit(&xs, &ys, Some(&sig), &[&|_| 1.0, &|x| x, &|x| x * x])?;
    let s0 = line.coef[0];
    let s0_err = line.std_error(0).hypot(s0 - quad.coef[0]);

    let window = (t_min, low.first().map_or(t_min, |p| p.temperature_k));
    let classification;
    let mut evidence_window = window;
    if s0.abs() > 3.0 * s0_err {
        classification = if s0 < 0.0 {
            NernstClassification::ViolatedNegativeLimit
        } else {
            NernstClassification::ViolatedPositiveLimit
        };
    } else {
        let negative: Vec<f64> = curve
            .points
            .iter()
            .filter(|p| p.entropy < -3.0 * p.est_error)
            .map(|p| p.temperature_k)
            .collect();
        if negative.is_empty() {
            classification = NernstClassification::SatisfiedSmooth;
        } else {
            classification = NernstClassification::SatisfiedWithNegativeDip;
            let lo = negative.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = negative.iter().copied().fold(0.0, f64::max);
            evidence_window = (lo, hi);
        }
    }
    Ok(NernstVerdict {
        classification,
        s_limit_estimate: s0,
        s_limit_error: s0_err,
        evidence_window,
        entropy: curve,
    })
}

/// Mean entropy over a window and its spread (max − min)/|mean|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    pub mean: f64,
    pub variation: f64,
    pub window: (f64, f64),
    pub points: usize,
}

pub fn entropy_plateau(curve: &EntropyCurve, t_lo: f64, t_hi: f64) -> Result<Plateau> {
    let s: Vec<f64> = curve
        .points
        .iter()
        .filter(|p| p.temperature_k >= t_lo && p.temperature_k <= t_hi)
        .map(|p| p.entropy)
        .collect();
    if s.len() < 2 {
        return Err(Error::InsufficientGrid(format!(
            "plateau window [{t_lo:e}, {t_hi:e}] K holds {} points",
            s.len()
        )));
    }
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = s.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Plateau {
        mean,
        variation: (max - min) / mean.abs(),
        window: (t_lo, t_hi),
        points: s.len(),
    })
}

/// `count` log-spaced temperatures from `t_hi` down to `t_lo`.
pub fn log_grid_descending(t_hi: f64, t_lo: f64, count: usize) -> Vec<f64> {
    let (a, b) = (t_hi.ln(), t_lo.ln());
    (0..count)
        .map(|i| {
            if i == 0 {
                t_hi
            } else if i + 1 == count {
                t_lo
            } else {
                (a + (b - a) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}
