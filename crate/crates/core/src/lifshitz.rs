//! Lifshitz free energy of two identical metal half-spaces.
//!
//! Everything is computed in the dimensionless variables y = 2aq and
//! y_m = 2aζ_m/c, so one kernel
//!
//! ```text
//! G(y_m) = ∫_{y_m}^∞ y [ln(1 − r_TM² e^{−y}) + ln(1 − r_TE² e^{−y})] dy
//! ```
//!
//! serves every separation. With Δ = y_1 the Matsubara sum is
//!
//! ```text
//! F(a,T) = kT/(8πa²) [½G(0) + Σ_{m≥1} G(mΔ)],   E(a) = ħc/(32π²a³) ∫₀^∞ G(x) dx.
//! ```
//!
//! At fixed ν the two differ by kT/(8πa²)·D with
//! D = ½G(0) + Σ G(mΔ) − Δ⁻¹∫₀^∞ G, a trapezoid-minus-integral error that is
//! summed explicitly over a short head [0, NΔ] and closed with the
//! Euler–Maclaurin derivative terms beyond it. This keeps ΔF resolvable when
//! it is ten or more orders of magnitude below |E|.

use crate::error::{invalid, Error, Result};
use crate::materials::PermittivityModel;
use crate::quadrature::{integrate, Estimate, QuadratureError, Tolerance};
use crate::quantities::{convert_energy_frequency, matsubara_frequency, CODATA};
use crate::summation::CompensatedSum;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMethod {
    /// Explicit head sum closed by Euler–Maclaurin corrections.
    EulerMaclaurin,
    /// Brute-force summation until the terms are negligible.
    Truncate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericControls {
    pub quad_rel_tol: f64,
    pub sum_rel_tol: f64,
    pub max_matsubara_terms: u64,
    pub tail_method: TailMethod,
}

impl Default for NumericControls {
    fn default() -> Self {
        NumericControls {
            quad_rel_tol: 1e-9,
            sum_rel_tol: 1e-8,
            max_matsubara_terms: 5_000_000,
            tail_method: TailMethod::EulerMaclaurin,
        }
    }
}

impl NumericControls {
    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x > 0.0 && x <= 1e-3;
        if !ok(self.quad_rel_tol) || !ok(self.sum_rel_tol) {
            return Err(invalid(format!(
                "tolerances must lie in (0, 1e-3] (quad {}, sum {})",
                self.quad_rel_tol, self.sum_rel_tol
            )));
        }
        if self.max_matsubara_terms < 1000 {
            return Err(invalid("max_matsubara_terms must be ≥ 1000"));
        }
        Ok(())
    }

    /// Both tolerances divided by `factor`.
    pub fn tightened(mut self, factor: f64) -> Self {
        self.quad_rel_tol /= factor;
        self.sum_rel_tol /= factor;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateSystem {
    pub separation_m: f64,
    pub permittivity: PermittivityModel,
    pub numeric: NumericControls,
}

impl PlateSystem {
    pub fn new(separation_m: f64, permittivity: PermittivityModel) -> Result<Self> {
        let s = PlateSystem {
            separation_m,
            permittivity,
            numeric: NumericControls::default(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_numeric(mut self, numeric: NumericControls) -> Self {
        self.numeric = numeric;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.separation_m.is_finite() && self.separation_m > 0.0) {
            return Err(invalid(format!("separation must be > 0 (got {})", self.separation_m)));
        }
        self.permittivity.validate()?;
        self.numeric.validate()
    }

    /// 2a/c in seconds: multiplies an angular frequency to give y.
    fn length_scale(&self) -> f64 {
        2.0 * self.separation_m / CODATA.light_speed
    }

    fn dimensionless(&self, mev: f64) -> f64 {
        self.length_scale() * convert_energy_frequency(mev)
    }

    /// Spacing Δ = y_1 of the dimensionless Matsubara ladder.
    pub fn ladder_spacing(&self, temperature_k: f64) -> f64 {
        self.dimensionless(matsubara_frequency(1, temperature_k).mev)
    }

    fn kernel_with_nu(&self, nu_mev: f64) -> Kernel {
        let wp = self.dimensionless(self.permittivity.omega_p_mev());
        match self.permittivity {
            PermittivityModel::Drude { .. } => Kernel {
                wp2: wp * wp,
                nu: self.dimensionless(nu_mev),
                drude: true,
            },
            PermittivityModel::Plasma { .. } => Kernel {
                wp2: wp * wp,
                nu: 0.0,
                drude: false,
            },
        }
    }

    fn kernel_at(&self, temperature_k: f64) -> Result<Kernel> {
        Ok(self.kernel_with_nu(self.permittivity.nu_mev(temperature_k)?))
    }

    fn thermal_prefactor(&self, temperature_k: f64) -> f64 {
        CODATA.boltzmann * temperature_k / (8.0 * PI * self.separation_m.powi(2))
    }

    fn zero_temperature_prefactor(&self) -> f64 {
        CODATA.hbar * CODATA.light_speed / (32.0 * PI * PI * self.separation_m.powi(3))
    }
}

/// Fresnel coefficients at imaginary frequency in the dimensionless form
/// r_TM = (εy − s)/(εy + s), r_TE = (y − s)/(y + s), s = √(y² + (ε−1)y_m²).
pub fn reflection_coeffs(eps: f64, y: f64, y_m: f64) -> Result<(f64, f64)> {
    if !(eps >= 1.0) || !(y_m >= 0.0) || !(y >= y_m) {
        return Err(invalid(format!(
            "reflection coefficients need ε ≥ 1 and y ≥ y_m ≥ 0 (got ε={eps}, y={y}, y_m={y_m})"
        )));
    }
    if y == 0.0 {
        return Ok((if eps > 1.0 { 1.0 } else { 0.0 }, 0.0));
    }
    let mode = Mode {
        eps_minus_one: eps - 1.0,
        k2: (eps - 1.0) * y_m * y_m,
    };
    Ok((mode.tm(y).r, mode.te(y).r))
}

/// Zero-frequency limits of (r_TM, r_TE) at dimensionless momentum y. For the
/// Drude model with ν > 0 the TE wave is not reflected; the plasma model (and
/// the Drude model with ν = 0) keeps a nonzero TE reflection.
pub fn zero_frequency_reflection(system: &PlateSystem, y: f64, temperature_k: f64) -> Result<(f64, f64)> {
    if !(y > 0.0) {
        return Err(invalid("zero-frequency reflection needs y > 0"));
    }
    let mode = system.kernel_at(temperature_k)?.mode(0.0);
    Ok((mode.tm(y).r, mode.te(y).r))
}

#[derive(Debug, Clone, Copy)]
struct Reflection {
    r: f64,
    one_minus_r2: f64,
}

impl Reflection {
    /// r = (1 − ρ)/(1 + ρ) together with an exact 1 − r² = 4ρ/(1 + ρ)².
    fn from_ratio(rho: f64) -> Self {
        if rho.is_infinite() {
            return Reflection {
                r: -1.0,
                one_minus_r2: 0.0,
            };
        }
        let d = 1.0 + rho;
        Reflection {
            r: (1.0 - rho) / d,
            one_minus_r2: 4.0 * rho / (d * d),
        }
    }

    /// 1 − r² e^{−y} without cancellation.
    fn one_minus_q(&self, y: f64) -> f64 {
        let r2 = self.r * self.r;
        let q = r2 * (-y).exp();
        if q < 0.5 {
            1.0 - q
        } else {
            self.one_minus_r2 - r2 * (-y).exp_m1()
        }
    }

    /// ln(1 − r² e^{−y}) without cancellation.
    fn log_term(&self, y: f64) -> f64 {
        let r2 = self.r * self.r;
        let q = r2 * (-y).exp();
        if q < 0.5 {
            (-q).ln_1p()
        } else {
            (self.one_minus_r2 - r2 * (-y).exp_m1()).ln()
        }
    }
}

/// Material response at one dimensionless Matsubara frequency.
#[derive(Debug, Clone, Copy)]
struct Mode {
    /// ε − 1; infinite at zero frequency.
    eps_minus_one: f64,
    /// (ε − 1)y_m², kept finite at zero frequency.
    k2: f64,
}

impl Mode {
    fn tm(&self, y: f64) -> Reflection {
        if self.eps_minus_one.is_infinite() {
            return Reflection {
                r: 1.0,
                one_minus_r2: 0.0,
            };
        }
        let s = (y * y + self.k2).sqrt();
        Reflection::from_ratio(s / ((1.0 + self.eps_minus_one) * y))
    }

    fn te(&self, y: f64) -> Reflection {
        let s = (y * y + self.k2).sqrt();
        Reflection::from_ratio(s / y)
    }

    fn integrand(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        y * (self.tm(y).log_term(y) + self.te(y).log_term(y))
    }
}

/// ln(1 − r_a²e^{−y}) − ln(1 − r_b²e^{−y}) for r = (1 − ρ)/(1 + ρ), given
/// ρ_a, ρ_b and ρ_a − ρ_b computed without cancellation.
fn log_term_difference(rho_a: f64, rho_b: f64, d_rho: f64, y: f64) -> f64 {
    let (ra, rb) = (Reflection::from_ratio(rho_a), Reflection::from_ratio(rho_b));
    let dr = 2.0 * d_rho / ((1.0 + rho_a) * (1.0 + rho_b));
    let num = dr * (rb.r + ra.r) * (-y).exp();
    (num / rb.one_minus_q(y)).ln_1p()
}

/// Dimensionless material parameters: ω̃_p² and ν̃ in units of c/2a.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Kernel {
    wp2: f64,
    nu: f64,
    drude: bool,
}

impl Kernel {
    fn mode(&self, y_m: f64) -> Mode {
        if y_m <= 0.0 {
            let te_screened = self.drude && self.nu > 0.0;
            return Mode {
                eps_minus_one: f64::INFINITY,
                k2: if te_screened { 0.0 } else { self.wp2 },
            };
        }
        if self.drude {
            Mode {
                eps_minus_one: self.wp2 / (y_m * (y_m + self.nu)),
                k2: self.wp2 * y_m / (y_m + self.nu),
            }
        } else {
            Mode {
                eps_minus_one: self.wp2 / (y_m * y_m),
                k2: self.wp2,
            }
        }
    }

    /// Frequency at which the Drude TE reflection switches on: the skin depth
    /// √(ν/ζ)·c/ω_p equals the gap. Zero when there is no such transition.
    fn transition_scale(&self) -> f64 {
        if self.drude && self.nu > 0.0 {
            self.nu / self.wp2
        } else {
            0.0
        }
    }

    /// Smallest structural scale of G, clamped away from underflow.
    fn smallest_scale(&self) -> f64 {
        let mut s: f64 = 1.0;
        let t = self.transition_scale();
        if t > 0.0 {
            s = s.min(t);
        }
        if self.drude && self.nu > 0.0 {
            s = s.min(self.nu);
        }
        s.max(1e-30)
    }

    /// G(y_m).
    fn g(&self, y_m: f64, rel_tol: f64) -> Result<Estimate, QuadratureError> {
        let mode = self.mode(y_m);
        let length = cutoff_length(rel_tol);
        let k = mode.k2.sqrt();
        let mut offsets: Vec<f64> = vec![0.5, 1.0, 2.0, 4.0, 8.0, 16.0];
        if k > 0.0 {
            offsets.extend([0.125 * k, 0.5 * k, k, 2.0 * k, 8.0 * k]);
        }
        if y_m > 0.0 && y_m < 1.0 {
            offsets.extend([y_m, 8.0 * y_m, 64.0 * y_m]);
        }
        let mut points: Vec<f64> = offsets
            .into_iter()
            .filter(|&o| o > 0.0 && o < length)
            .map(|o| y_m + o)
            .collect();
        points.push(y_m);
        points.push(y_m + length);
        points.sort_by(f64::total_cmp);
        points.dedup();
        integrate(|y| mode.integrand(y), &points, Tolerance::relative(rel_tol))
    }

    /// G_self(y_m) − G_other(y_m) for two kernels sharing ω_p, integrated
    /// from the algebraic difference of the integrands so that the result is
    /// accurate relative to itself however small it is.
    fn g_difference(&self, other: &Kernel, y_m: f64, rel_tol: f64) -> Result<Estimate, QuadratureError> {
        if y_m <= 0.0 {
            let (a, b) = (self.g(0.0, rel_tol)?, other.g(0.0, rel_tol)?);
            return Ok(Estimate {
                value: a.value - b.value,
                abs_error: a.abs_error + b.abs_error,
            });
        }
        let (ma, mb) = (self.mode(y_m), other.mode(y_m));
        let (nu_a, nu_b) = (self.effective_nu(), other.effective_nu());
        // K² = ω̃²y_m/(y_m + ν̃) and ε − 1 = K²/y_m².
        let d_k2 = self.wp2 * y_m * (nu_b - nu_a) / ((y_m + nu_a) * (y_m + nu_b));
        let d_eps = d_k2 / (y_m * y_m);
        let (eps_a, eps_b) = (1.0 + ma.eps_minus_one, 1.0 + mb.eps_minus_one);
        let integrand = |y: f64| {
            if y <= 0.0 {
                return 0.0;
            }
            let (sa, sb) = ((y * y + ma.k2).sqrt(), (y * y + mb.k2).sqrt());
            let ds = d_k2 / (sa + sb);
            let te = log_term_difference(sa / y, sb / y, ds / y, y);
            let d_rho_tm = (ds * eps_b - sb * d_eps) / (eps_a * eps_b * y);
            let tm = log_term_difference(sa / (eps_a * y), sb / (eps_b * y), d_rho_tm, y);
            y * (tm + te)
        };
        let length = cutoff_length(rel_tol);
        let mut offsets: Vec<f64> = vec![0.5, 1.0, 2.0, 4.0, 8.0, 16.0];
        for k in [ma.k2.sqrt(), mb.k2.sqrt()] {
            if k > 0.0 {
                offsets.extend([0.125 * k, 0.5 * k, k, 2.0 * k, 8.0 * k]);
            }
        }
        if y_m < 1.0 {
            offsets.extend([y_m, 8.0 * y_m, 64.0 * y_m]);
        }
        let mut points: Vec<f64> = offsets
            .into_iter()
            .filter(|&o| o > 0.0 && o < length)
            .map(|o| y_m + o)
            .collect();
        points.push(y_m);
        points.push(y_m + length);
        points.sort_by(f64::total_cmp);
        points.dedup();
        integrate(integrand, &points, Tolerance::relative(rel_tol).with_abs(1e-300))
    }

    /// ν̃ as it enters ε; the plasma model is the ν̃ = 0 Drude model at ζ > 0.
    fn effective_nu(&self) -> f64 {
        if self.drude {
            self.nu
        } else {
            0.0
        }
    }

    /// Breakpoints for integrating G over [lo, hi]: geometric from the
    /// smallest structural scale upward.
    fn outer_points(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut points = vec![lo];
        let mut p = 1e-3 * self.smallest_scale();
        while p < hi {
            if p > lo {
                points.push(p);
            }
            p *= 4.0;
        }
        points.push(hi);
        points
    }
}

/// Length L such that the kernel integrand beyond y_m + L is below the
/// tolerance: the tail is bounded by ≈ 2(1 + L)e^{−L} relative to the head.
fn cutoff_length(rel_tol: f64) -> f64 {
    let target = 1e-3 * rel_tol;
    let mut l: f64 = 20.0;
    while (1.0 + l) * (-l).exp() > target {
        l += 1.0;
    }
    l
}

/// Tolerance used for outer integrals over G, which feed differences.
fn outer_tol(controls: &NumericControls) -> f64 {
    (controls.quad_rel_tol * 1e-3).max(1e-13)
}

/// Inner tolerance for each G evaluation.
fn inner_tol(controls: &NumericControls) -> f64 {
    (controls.quad_rel_tol * 1e-2).max(1e-14)
}

/// The kernel G at frequency ζ (meV) for the system at temperature T.
pub fn per_frequency_integral(system: &PlateSystem, zeta_mev: f64, temperature_k: f64) -> Result<f64> {
    if !(zeta_mev >= 0.0) {
        return Err(invalid(format!("ζ must be ≥ 0 (got {zeta_mev})")));
    }
    system.validate()?;
    let kernel = system.kernel_at(temperature_k)?;
    Ok(kernel
        .g(system.dimensionless(zeta_mev), system.numeric.quad_rel_tol)?
        .value)
}

/// A converged quantity with its absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: f64,
    pub est_error: f64,
    pub terms_used: u64,
}

/// ∫₀^∞ G over [0, x_end], with x_end past which G is negligible.
fn integrate_kernel(kernel: &Kernel, controls: &NumericControls) -> Result<Estimate> {
    let tol = outer_tol(controls);
    let inner = inner_tol(controls);
    let x_end = cutoff_length(tol) + 8.0;
    let points = kernel.outer_points(0.0, x_end);
    integrate_checked(|x| Ok(kernel.g(x, inner)?.value), &points, Tolerance::relative(tol))
}

/// Integrate a fallible integrand, surfacing the first inner failure rather
/// than the NaN it is mapped to.
fn integrate_checked<F>(f: F, points: &[f64], tol: Tolerance) -> Result<Estimate>
where
    F: Fn(f64) -> Result<f64, QuadratureError>,
{
    let first_err = RefCell::new(None);
    let est = integrate(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                first_err.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        points,
        tol,
    );
    if let Some(e) = first_err.into_inner() {
        return Err(e.into());
    }
    Ok(est?)
}

/// ∫₀^∞ [G_a − G_b] for two kernels sharing ω_p.
fn integrate_kernel_difference(a: &Kernel, b: &Kernel, controls: &NumericControls) -> Result<Estimate> {
    let inner = inner_tol(controls);
    let tol = outer_tol(controls);
    let x_end = cutoff_length(tol) + 8.0;
    let finer = if a.smallest_scale() < b.smallest_scale() { a } else { b };
    let mut points = finer.outer_points(0.0, x_end);
    points.extend(a.outer_points(0.0, x_end));
    points.extend(b.outer_points(0.0, x_end));
    points.sort_by(f64::total_cmp);
    points.dedup();
    integrate_checked(
        |x| Ok(a.g_difference(b, x, inner)?.value),
        &points,
        Tolerance::relative(tol).with_abs(1e-300),
    )
}

/// E(a) = ħc/(32π²a³) ∫₀^∞ G(x) dx, with ν = ν(0) for the Drude model.
pub fn zero_temperature_energy(system: &PlateSystem) -> Result<Evaluation> {
    system.validate()?;
    let kernel = system.kernel_at(0.0)?;
    let est = integrate_kernel(&kernel, &system.numeric)?;
    let pre = system.zero_temperature_prefactor();
    Ok(Evaluation {
        value: pre * est.value,
        est_error: pre * est.abs_error,
        terms_used: 0,
    })
}

/// D = ½G(0) + Σ_{m≥1} G(mΔ) − Δ⁻¹∫₀^∞ G for one kernel.
#[derive(Debug, Clone, Copy)]
struct SumMinusIntegral {
    value: f64,
    est_error: f64,
    terms: u64,
}

fn evaluate_terms(kernel: &Kernel, ys: &[f64], rel_tol: f64) -> Result<Vec<f64>> {
    let eval = |&y: &f64| kernel.g(y, rel_tol).map(|e| e.value);
    if ys.len() < 64 {
        ys.iter().map(eval).collect::<Result<Vec<_>, _>>()
    } else {
        ys.par_iter().map(eval).collect::<Result<Vec<_>, _>>()
    }
    .map_err(Error::from)
}

/// Euler–Maclaurin remainder Σ_{m≥N} G(mΔ) − ½G(NΔ) − Δ⁻¹∫_{NΔ}^∞ G using
/// finite-difference derivatives at Y = NΔ with step Y/8.
fn euler_maclaurin_tail(kernel: &Kernel, y: f64, delta: f64, rel_tol: f64) -> Result<(f64, f64)> {
    let h = y / 8.0;
    let g = evaluate_terms(kernel, &[y - 2.0 * h, y - h, y + h, y + 2.0 * h], rel_tol)?;
    let d1 = (g[0] - 8.0 * g[1] + 8.0 * g[2] - g[3]) / (12.0 * h);
    let d3 = (-g[0] + 2.0 * g[1] - 2.0 * g[2] + g[3]) / (2.0 * h.powi(3));
    let first = -delta / 12.0 * d1;
    let third = delta.powi(3) / 720.0 * d3;
    Ok((first + third, third.abs()))
}

fn sum_minus_integral(
    kernel: &Kernel,
    delta: f64,
    temperature_k: f64,
    controls: &NumericControls,
) -> Result<SumMinusIntegral> {
    let inner = inner_tol(controls);
    let outer = outer_tol(controls);
    let x_end = cutoff_length(outer) + 8.0;
    let limit = controls.max_matsubara_terms;

    let start = 32.0 * delta.max(kernel.transition_scale());
    let mut n = ((start / delta).ceil() as u64).max(32);

    // Head fully past the decay of G: plain sum minus integral, no tail.
    let direct = n as f64 * delta >= x_end;
    if direct {
        n = (x_end / delta).ceil() as u64;
    }
    if n > limit {
        return Err(Error::MatsubaraLimit {
            temperature_k,
            needed: n,
            limit,
        });
    }

    let mut ys: Vec<f64> = (0..=n).map(|m| m as f64 * delta).collect();
    let mut g = evaluate_terms(kernel, &ys, inner)?;
    let mut head_integral = {
        let y = n as f64 * delta;
        let mut pts = kernel.outer_points(0.0, y);
        pts.retain(|&p| p < y);
        pts.push(0.5 * y);
        pts.push(y);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        integrate_checked(|x| Ok(kernel.g(x, inner)?.value), &pts, Tolerance::relative(outer))?
    };

    let assemble = |g: &[f64], n: usize, integral: &Estimate| {
        let mut s = CompensatedSum::default();
        s.add(0.5 * g[0]);
        for &v in &g[1..n] {
            s.add(v);
        }
        s.add(0.5 * g[n]);
        s.add(-integral.value / delta);
        let roundoff = 16.0 * f64::EPSILON * s.abs_total();
        (s.total(), roundoff + integral.abs_error / delta)
    };

    if direct {
        let (value, err) = assemble(&g, n as usize, &head_integral);
        return Ok(SumMinusIntegral {
            value,
            est_error: err,
            terms: n + 1,
        });
    }

    let (head, head_err) = assemble(&g, n as usize, &head_integral);
    let (tail, tail_err) = euler_maclaurin_tail(kernel, n as f64 * delta, delta, inner)?;
    let mut previous = head + tail;
    let mut previous_err = head_err + tail_err;

    loop {
        let n2 = 2 * n;
        let y_lo = n as f64 * delta;
        let y_hi = n2 as f64 * delta;
        if n2 > limit {
            return Err(Error::MatsubaraLimit {
                temperature_k,
                needed: n2,
                limit,
            });
        }

        let new_ys: Vec<f64> = (n + 1..=n2).map(|m| m as f64 * delta).collect();
        g.extend(evaluate_terms(kernel, &new_ys, inner)?);
        ys.extend(new_ys);
        let extension = integrate_checked(
            |x| Ok(kernel.g(x, inner)?.value),
            &[y_lo, 0.5 * (y_lo + y_hi), y_hi],
            Tolerance::relative(outer),
        )?;
        head_integral = Estimate {
            value: head_integral.value + extension.value,
            abs_error: head_integral.abs_error + extension.abs_error,
        };

        let (head, head_err) = assemble(&g, n2 as usize, &head_integral);
        let (tail, tail_err) = euler_maclaurin_tail(kernel, y_hi, delta, inner)?;
        let value = head + tail;
        let discrepancy = (value - previous).abs();
        let floor = head_err + tail_err;
        let est_error = discrepancy.max(floor);

        let converged =
            discrepancy <= controls.sum_rel_tol * value.abs() || discrepancy <= 4.0 * (floor + previous_err);
        if converged || y_hi >= x_end {
            return Ok(SumMinusIntegral {
                value,
                est_error,
                terms: n2 + 1,
            });
        }
        previous = value;
        previous_err = floor;
        n = n2;
    }
}

/// Thermal correction ΔF = F(a,T) − E(a) with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalCorrection {
    pub value: f64,
    pub est_error: f64,
    pub terms_used: u64,
    /// false when est_error ≥ |ΔF|/10.
    pub reliable: bool,
}

/// ΔF without the cancellation guard. Used by the entropy, where ΔF itself
/// may be compatible with zero.
pub(crate) fn thermal_correction_unguarded(system: &PlateSystem, temperature_k: f64) -> Result<ThermalCorrection> {
    if !(temperature_k > 0.0) {
        return Err(invalid(format!("temperature must be > 0 (got {temperature_k})")));
    }
    system.validate()?;
    let controls = system.numeric;
    let kernel_t = system.kernel_at(temperature_k)?;
    let kernel_0 = system.kernel_at(0.0)?;
    let pre_t = system.thermal_prefactor(temperature_k);

    let (value, err, terms) = match controls.tail_method {
        TailMethod::EulerMaclaurin => {
            let delta = system.ladder_spacing(temperature_k);
            let d = sum_minus_integral(&kernel_t, delta, temperature_k, &controls)?;
            let mut value = pre_t * d.value;
            let mut err = pre_t * d.est_error;
            if kernel_t != kernel_0 {
                let shift = integrate_kernel_difference(&kernel_t, &kernel_0, &controls)?;
                let pre_0 = system.zero_temperature_prefactor();
                value += pre_0 * shift.value;
                err += pre_0 * shift.abs_error;
            }
            (value, err, d.terms)
        }
        TailMethod::Truncate => {
            let f = truncated_free_energy(system, &kernel_t, temperature_k)?;
            let e = zero_temperature_energy(system)?;
            (f.value - e.value, f.est_error + e.est_error, f.terms_used)
        }
    };
    Ok(ThermalCorrection {
        value,
        est_error: err,
        terms_used: terms,
        reliable: err < value.abs() / 10.0,
    })
}

/// ΔF(T) = F(a,T) − E(a). Fails when the result does not exceed its own
/// error estimate.
pub fn thermal_correction(system: &PlateSystem, temperature_k: f64) -> Result<ThermalCorrection> {
    let tc = thermal_correction_unguarded(system, temperature_k)?;
    if tc.est_error >= tc.value.abs() {
        return Err(Error::Cancellation {
            temperature_k,
            delta_f: tc.value,
            error: tc.est_error,
        });
    }
    Ok(tc)
}

/// Direct Matsubara sum, stopped once a block of terms is below
/// sum_rel_tol of the running total.
fn truncated_free_energy(system: &PlateSystem, kernel: &Kernel, temperature_k: f64) -> Result<Evaluation> {
    let controls = system.numeric;
    let inner = inner_tol(&controls);
    let delta = system.ladder_spacing(temperature_k);
    let block = 256u64;
    let mut sum = CompensatedSum::default();
    sum.add(0.5 * kernel.g(0.0, inner)?.value);
    let mut m = 1u64;
    loop {
        if m > controls.max_matsubara_terms {
            return Err(Error::MatsubaraLimit {
                temperature_k,
                needed: m,
                limit: controls.max_matsubara_terms,
            });
        }
        let ys: Vec<f64> = (m..m + block).map(|k| k as f64 * delta).collect();
        let terms = evaluate_terms(kernel, &ys, inner)?;
        let mut block_sum = 0.0;
        for t in terms {
            sum.add(t);
            block_sum += t;
        }
        m += block;
        // Terms decay at least as e^{−y}; the remaining tail is bounded by
        // the last block times e^{-Δ·block}/(1 − e^{-Δ·block}).
        let ratio = (-delta * block as f64).exp();
        let tail = block_sum.abs() * ratio / (1.0 - ratio);
        if tail <= controls.sum_rel_tol * 1e-2 * sum.total().abs() {
            let pre = system.thermal_prefactor(temperature_k);
            let roundoff = 16.0 * f64::EPSILON * sum.abs_total();
            return Ok(Evaluation {
                value: pre * sum.total(),
                est_error: pre * (tail + roundoff + controls.quad_rel_tol * sum.abs_total()),
                terms_used: m,
            });
        }
    }
}

/// F(a,T) = (kT/8πa²)[½G(0) + Σ_{m≥1} G(ζ_m)].
pub fn free_energy(system: &PlateSystem, temperature_k: f64) -> Result<Evaluation> {
    if !(temperature_k > 0.0) {
        return Err(invalid(format!("temperature must be > 0 (got {temperature_k})")));
    }
    system.validate()?;
    match system.numeric.tail_method {
        TailMethod::Truncate => {
            let kernel = system.kernel_at(temperature_k)?;
            truncated_free_energy(system, &kernel, temperature_k)
        }
        TailMethod::EulerMaclaurin => {
            let e = zero_temperature_energy(system)?;
            let tc = thermal_correction_unguarded(system, temperature_k)?;
            Ok(Evaluation {
                value: e.value + tc.value,
                est_error: e.est_error + tc.est_error,
                terms_used: tc.terms_used,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergyPoint {
    pub temperature_k: f64,
    pub free_energy: f64,
    pub terms_used: u64,
    pub est_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergyCurve {
    pub points: Vec<FreeEnergyPoint>,
    pub system: PlateSystem,
}

/// F(a,T) over a temperature list; evaluated in parallel, returned in input
/// order.
pub fn free_energy_curve(system: &PlateSystem, temperatures_k: &[f64]) -> Result<FreeEnergyCurve> {
    let points = temperatures_k
        .par_iter()
        .map(|&t| {
            free_energy(system, t).map(|e| FreeEnergyPoint {
                temperature_k: t,
                free_energy: e.value,
                terms_used: e.terms_used,
                est_error: e.est_error,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FreeEnergyCurve {
        points,
        system: *system,
    })
}

/// Ideal-metal Casimir energy −π²ħc/(720a³).
pub fn ideal_casimir_energy(separation_m: f64) -> f64 {
    -PI.powi(2) * CODATA.hbar * CODATA.light_speed / (720.0 * separation_m.powi(3))
}
