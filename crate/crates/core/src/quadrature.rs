//! Globally adaptive Gauss–Kronrod (10/21 point) quadrature over a finite
//! interval partitioned by caller-supplied breakpoints.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate drops below `max(abs_tol, rel_tol * |I|)`. Error estimates use the
//! QUADPACK rescaling, which is conservative for smooth integrands.

#![allow(clippy::excessive_precision)]

use crate::summation::CompensatedSum;
use thiserror::Error;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error(
        "quadrature did not converge after {intervals} subintervals: |I| = {value:e}, error estimate {abs_error:e}"
    )]
    NonConvergence {
        value: f64,
        abs_error: f64,
        intervals: usize,
    },
    #[error("integrand returned a non-finite value at x = {x:e}")]
    NonFinite { x: f64 },
}

/// Value and absolute error estimate of a definite integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_error: f64,
}

impl Estimate {
    pub const ZERO: Estimate = Estimate {
        value: 0.0,
        abs_error: 0.0,
    };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Tolerance {
            rel,
            abs: 0.0,
            max_intervals: 2000,
        }
    }

    pub fn with_abs(mut self, abs: f64) -> Self {
        self.abs = abs;
        self
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    /// Roundoff floor of the error estimate; bisecting cannot go below it.
    floor: f64,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<Panel, QuadratureError> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let f_center = f(center);
    if !f_center.is_finite() {
        return Err(QuadratureError::NonFinite { x: center });
    }

    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    let mut res_kronrod = f_center * WGK[10];
    let mut res_gauss = 0.0;
    let mut res_abs = res_kronrod.abs();

    for j in 0..10 {
        let dx = half * XGK[j];
        let (x1, x2) = (center - dx, center + dx);
        let (f1, f2) = (f(x1), f(x2));
        if !f1.is_finite() {
            return Err(QuadratureError::NonFinite { x: x1 });
        }
        if !f2.is_finite() {
            return Err(QuadratureError::NonFinite { x: x2 });
        }
        fv1[j] = f1;
        fv2[j] = f2;
        res_kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let scale = half.abs();
    let error = rescale_error((res_kronrod - res_gauss) * half, res_abs * scale, res_asc * scale);
    Ok(Panel {
        lo,
        hi,
        value: res_kronrod * half,
        error,
        floor: 50.0 * f64::EPSILON * res_abs * scale,
    })
}

/// Integrate `f` over `[points[0], points[last]]`, using every entry of
/// `points` as an initial breakpoint. `points` must be nondecreasing; empty
/// panels are skipped.
pub fn integrate<F>(f: F, points: &[f64], tol: Tolerance) -> Result<Estimate, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    let mut panels = Vec::with_capacity(points.len() + 16);
    for w in points.windows(2) {
        if w[1] > w[0] {
            panels.push(gauss_kronrod(&f, w[0], w[1])?);
        }
    }
    if panels.is_empty() {
        return Ok(Estimate::ZERO);
    }

    loop {
        let total = sum_panels(&panels);
        let limit = tol.abs.max(tol.rel * total.value.abs());
        if total.abs_error <= limit {
            return Ok(total);
        }

        // Bisect the worst panel that can still be split.
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| {
                let mid = 0.5 * (p.lo + p.hi);
                let splittable = mid > p.lo && mid < p.hi && (p.hi - p.lo) > 1e3 * f64::EPSILON * p.hi.abs();
                splittable && p.error > 2.0 * p.floor
            })
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .map(|(i, _)| i);

        let Some(i) = worst else {
            // Nothing left to split: accept if every panel sits at its
            // roundoff floor, otherwise report.
            if panels.iter().all(|p| p.error <= 2.0 * p.floor) {
                return Ok(total);
            }
            return Err(QuadratureError::NonConvergence {
                value: total.value,
                abs_error: total.abs_error,
                intervals: panels.len(),
            });
        };
        if panels.len() >= tol.max_intervals {
            return Err(QuadratureError::NonConvergence {
                value: total.value,
                abs_error: total.abs_error,
                intervals: panels.len(),
            });
        }

        let p = panels[i];
        let mid = 0.5 * (p.lo + p.hi);
        panels[i] = gauss_kronrod(&f, p.lo, mid)?;
        panels.push(gauss_kronrod(&f, mid, p.hi)?);
    }
}

fn sum_panels(panels: &[Panel]) -> Estimate {
    let mut ordered: Vec<&Panel> = panels.iter().collect();
    ordered.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut value = CompensatedSum::default();
    let mut error = 0.0;
    for p in ordered {
        value.add(p.value);
        error += p.error;
    }
    Estimate {
        value: value.total(),
        abs_error: error,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let est = integrate(|x| x * x * x - 2.0 * x, &[0.0, 2.0], Tolerance::relative(1e-14)).unwrap();
        assert!((est.value - 0.0).abs() < 1e-14);
        let est = integrate(|x| x.powi(6), &[-1.0, 1.0], Tolerance::relative(1e-14)).unwrap();
        assert!((est.value - 2.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn log_endpoint_singularity() {
        // ∫₀¹ ln x dx = -1
        let est = integrate(
            |x: f64| if x > 0.0 { x.ln() } else { 0.0 },
            &[0.0, 1.0],
            Tolerance::relative(1e-12),
        )
        .unwrap();
        assert!((est.value + 1.0).abs() < 1e-11, "{est:?}");
    }

    #[test]
    fn breakpoints_and_exponential_decay() {
        let pts = [0.0, 1.0, 4.0, 16.0, 60.0];
        let est = integrate(|x: f64| x * (-x).exp(), &pts, Tolerance::relative(1e-13)).unwrap();
        assert!((est.value - 1.0).abs() < 1e-13);
        assert!(est.abs_error < 1e-12);
    }

    #[test]
    fn empty_and_degenerate_ranges() {
        assert_eq!(
            integrate(|x| x, &[], Tolerance::relative(1e-9)).unwrap(),
            Estimate::ZERO
        );
        assert_eq!(
            integrate(|x| x, &[1.0, 1.0], Tolerance::relative(1e-9)).unwrap(),
            Estimate::ZERO
        );
    }

    #[test]
    fn reports_non_finite_integrand() {
        let err = integrate(|_| f64::NAN, &[0.0, 1.0], Tolerance::relative(1e-9)).unwrap_err();
        assert!(matches!(err, QuadratureError::NonFinite { .. }));
    }

    #[test]
    fn reports_interval_budget_exhaustion() {
        let tol = Tolerance {
            rel: 1e-15,
            abs: 0.0,
            max_intervals: 3,
        };
        let err = integrate(|x: f64| (1.0 / (x + 1e-9)).sin(), &[0.0, 1.0], tol).unwrap_err();
        assert!(matches!(err, QuadratureError::NonConvergence { .. }));
    }
}
