//! Computable stand-ins for the best approximation error, Jackson bounds,
//! and the scaling experiments.
//!
//! `E_d(f)` itself is never computed. Every bound of the form
//! `error ≤ K · E_d(f)` is tested as `error ≤ K · UB_d(f)`, where `UB_d` is the
//! sup-norm error of the degree-`d` Fourier truncation and so at least
//! `E_d(f)`, up to the slack of evaluating a sup on a grid.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::functions::{lookup, modulus_of_continuity, ModulusGrid, Params, UnitCircleFunction, DEFAULT_GRID_POINTS};
use crate::interpolation::{averaged_interpolant_from_samples, ensure_power_of_two};

/// Points with a measured error below this are saturated at machine precision
/// and left out of slope fits.
pub const SATURATION_FLOOR: f64 = 1e-12;

/// Octaves of `d` used by [`fit_loglog_slope`].
pub const FIT_OCTAVES: u32 = 4;

/// Step for central-difference derivatives.
pub const DERIVATIVE_STEP: f64 = 1e-5;

/// `UB_d(f) ≥ E_d(f)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestErrorBound {
    pub d: usize,
    pub upper: f64,
    pub method: String,
    pub grid_points: usize,
}

/// Smallest power-of-two grid with at least `16 · 3d` and
/// [`DEFAULT_GRID_POINTS`] points.
pub fn default_truncation_grid(d: usize) -> usize {
    (48 * d.max(1)).next_power_of_two().max(DEFAULT_GRID_POINTS)
}

fn fft(buffer: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::new();
    let plan = if inverse {
        planner.plan_fft_inverse(buffer.len())
    } else {
        planner.plan_fft_forward(buffer.len())
    };
    plan.process(buffer);
}

/// Grid sup of `f − Σ_{|j| ≤ d} c_j z^j`, with the `c_j` from an FFT of the
/// samples on `grid_points` roots of unity.
pub fn fourier_truncation_upper_bound(f: &UnitCircleFunction, d: usize, grid_points: usize) -> Result<BestErrorBound> {
    if grid_points < 48 * d || grid_points < 2 * d + 2 {
        return Err(Error::Aliasing(format!("{grid_points} grid points cannot resolve degree {d} (need ≥ {})", 48 * d)));
    }
    let mut spectrum = f.samples_at_roots(grid_points);
    fft(&mut spectrum, false);
    // Keep only |j| > d; the inverse transform is then the remainder itself.
    spectrum[0] = Complex64::new(0.0, 0.0);
    for j in 1..=d {
        spectrum[j] = Complex64::new(0.0, 0.0);
        spectrum[grid_points - j] = Complex64::new(0.0, 0.0);
    }
    fft(&mut spectrum, true);
    let scale = 1.0 / grid_points as f64;
    let upper = spectrum.iter().map(|z| z.norm() * scale).fold(0.0, f64::max);
    Ok(BestErrorBound { d, upper, method: "fourier-truncation".into(), grid_points })
}

pub fn fourier_truncation_upper_bound_default(f: &UnitCircleFunction, d: usize) -> Result<BestErrorBound> {
    fourier_truncation_upper_bound(f, d, default_truncation_grid(d))
}

/// Error of the degree-`(3d − 1)` Fourier (for lifts, Chebyshev) truncation,
/// i.e. of a truncation with the same degree as `f_d`. Reported for
/// comparison only.
pub fn chebyshev_truncation_error(f: &UnitCircleFunction, d: usize) -> Result<f64> {
    let degree = (3 * d).saturating_sub(1);
    Ok(fourier_truncation_upper_bound(f, degree, default_truncation_grid(3 * d))?.upper)
}

/// `‖f − f_d‖` on `grid_points` uniform angles, evaluating `f_d` by an
/// inverse FFT of its coefficients.
pub fn interpolation_error(f: &UnitCircleFunction, d: usize, grid_points: usize) -> Result<f64> {
    ensure_power_of_two(d)?;
    if grid_points < 6 * d || grid_points % (4 * d) != 0 {
        return Err(invalid(format!("{grid_points} grid points must be a multiple of 4d and at least 6d")));
    }
    let fd = averaged_interpolant_from_samples(&f.samples_at_roots(4 * d))?;
    let mut values = vec![Complex64::new(0.0, 0.0); grid_points];
    let bound = fd.degree_bound() as i64;
    for j in -bound..=bound {
        values[j.rem_euclid(grid_points as i64) as usize] += fd.coefficient(j);
    }
    fft(&mut values, true);
    let samples = f.samples_at_roots(grid_points);
    Ok(values.iter().zip(&samples).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
}

pub fn interpolation_error_default(f: &UnitCircleFunction, d: usize) -> Result<f64> {
    interpolation_error(f, d, default_truncation_grid(d))
}

/// `C(r) = (4/π) Σ_{k ≥ 0} (−1)^{k(r+1)} / (2k + 1)^{r+1}`.
///
/// For even `r` the series alternates and is summed with the
/// Cohen–Rodriguez Villegas–Zagier acceleration. For odd `r` all terms are
/// positive; a partial sum is completed with an Euler–Maclaurin tail.
pub fn akf_constant(r: u32) -> f64 {
    let s = r as i32 + 1;
    let series = if r % 2 == 0 {
        accelerated_alternating_sum(|k| (2.0 * k as f64 + 1.0).powi(-s), 40)
    } else {
        odd_power_sum(s)
    };
    4.0 / std::f64::consts::PI * series
}

/// `Σ_{k ≥ 0} (−1)^k a_k` for a completely monotone `a_k`, with error about
/// `5.8^{−n}` relative to the sum.
fn accelerated_alternating_sum(a: impl Fn(usize) -> f64, n: usize) -> f64 {
    let mut d = (3.0 + 8f64.sqrt()).powi(n as i32);
    d = (d + 1.0 / d) / 2.0;
    let (mut b, mut c, mut s) = (-1.0, -d, 0.0);
    for k in 0..n {
        c = b - c;
        s += c * a(k);
        let (kf, nf) = (k as f64, n as f64);
        b *= (kf + nf) * (kf - nf) / ((kf + 0.5) * (kf + 1.0));
    }
    s / d
}

/// `Σ_{k ≥ 0} (2k + 1)^{−s}` for `s ≥ 2`.
fn odd_power_sum(s: i32) -> f64 {
    const K: usize = 1000;
    let head: f64 = (0..K).rev().map(|k| (2.0 * k as f64 + 1.0).powi(-s)).sum();
    let x = 2.0 * K as f64 + 1.0;
    let sf = s as f64;
    let integral = x.powf(1.0 - sf) / (2.0 * (sf - 1.0));
    let g = x.powi(-s);
    let g1 = -2.0 * sf * x.powi(-s - 1);
    let g3 = -8.0 * sf * (sf + 1.0) * (sf + 2.0) * x.powi(-s - 3);
    head + integral + g / 2.0 - g1 / 12.0 + g3 / 720.0
}

/// Where the derivative in a Jackson bound came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeSource {
    None,
    ClosedForm,
    CentralDifference,
}

/// `C(r) · ω(1/d, f̃^{(r)}) / d^r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacksonBound {
    pub r: u32,
    pub d: usize,
    pub c_r: f64,
    pub omega: f64,
    pub value: f64,
    pub derivative: DerivativeSource,
}

/// Points of the modulus-of-continuity scan.
const MODULUS_POINTS: usize = 1 << 14;

/// Jackson bound of order `r ≤ 2`. The first derivative comes from the
/// function's closed form when it has one; anything else is a central
/// difference with step [`DERIVATIVE_STEP`].
pub fn jackson_bound(f: &UnitCircleFunction, r: u32, d: usize) -> Result<JacksonBound> {
    if d == 0 {
        return Err(invalid("Jackson bound needs d ≥ 1"));
    }
    if r > 2 {
        return Err(Error::Precondition(format!("derivatives of order {r} are not supported (r ≤ 2)")));
    }
    let h = DERIVATIVE_STEP;
    let first: Box<dyn Fn(f64) -> Complex64> = match f.theta_derivative() {
        Some(df) => {
            let df = df.clone();
            Box::new(move |t| df(t))
        }
        None => {
            let f = f.clone();
            Box::new(move |t| (f.eval_angle(t + h) - f.eval_angle(t - h)) / (2.0 * h))
        }
    };
    let source = match (r, f.theta_derivative().is_some()) {
        (0, _) => DerivativeSource::None,
        (1, true) => DerivativeSource::ClosedForm,
        _ => DerivativeSource::CentralDifference,
    };
    let grid = ModulusGrid::circle(MODULUS_POINTS);
    let delta = 1.0 / d as f64;
    let omega = match r {
        0 => modulus_of_continuity(|t| f.eval_angle(t), delta, &grid)?,
        1 => modulus_of_continuity(&first, delta, &grid)?,
        _ => modulus_of_continuity(|t| (first(t + h) - first(t - h)) / (2.0 * h), delta, &grid)?,
    };
    if !omega.is_finite() {
        return Err(invalid(format!("derivative of order {r} of {} is not finite", f.name())));
    }
    let c_r = akf_constant(r);
    let value = c_r * omega / (d as f64).powi(r as i32);
    Ok(JacksonBound { r, d, c_r, omega, value, derivative: source })
}

/// One `(d, error)` measurement of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub d: usize,
    pub error: f64,
}

/// Least-squares fit of `log error` against `log d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: Vec<ScalingPoint>,
    /// Points that entered the fit.
    pub fitted: usize,
}

/// Fits over the largest [`FIT_OCTAVES`] octaves of `d`, skipping points
/// below [`SATURATION_FLOOR`].
pub fn fit_loglog_slope(points: &[ScalingPoint]) -> Result<ScalingFit> {
    let d_max = points.iter().map(|p| p.d).max().ok_or_else(|| invalid("no points to fit"))?;
    let d_min = d_max as f64 / 2f64.powi(FIT_OCTAVES as i32);
    let used: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.d as f64 >= d_min && p.error >= SATURATION_FLOOR)
        .map(|p| ((p.d as f64).ln(), p.error.ln()))
        .collect();
    if used.len() < 2 {
        return Err(Error::Precondition(format!("{} usable points; a slope needs two", used.len())));
    }
    let n = used.len() as f64;
    let mx = used.iter().map(|p| p.0).sum::<f64>() / n;
    let my = used.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = used.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = used.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok(ScalingFit { slope, intercept: my - slope * mx, points: points.to_vec(), fitted: used.len() })
}

/// Measures `‖f − f_d‖` over `d_values` and fits the log-log slope.
pub fn scaling_experiment(f: &UnitCircleFunction, d_values: &[usize]) -> Result<ScalingFit> {
    let points = d_values
        .iter()
        .map(|&d| Ok(ScalingPoint { d, error: interpolation_error_default(f, d)? }))
        .collect::<Result<Vec<_>>>()?;
    fit_loglog_slope(&points)
}

/// Slope of `‖f − f_d‖` against `d` for `f(e^{iθ}) = |cos θ|^c`, expected
/// near `−c`.
pub fn abs_power_scaling_experiment(c: f64, d_values: &[usize]) -> Result<ScalingFit> {
    if !(c > 0.0) || (c - c.round()).abs() < 1e-12 {
        return Err(Error::Precondition(format!("c = {c} must be positive and non-integer")));
    }
    let (lo, hi) = match (d_values.iter().min(), d_values.iter().max()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => return Err(Error::Precondition("empty d sweep".into())),
    };
    for &d in d_values {
        ensure_power_of_two(d)?;
    }
    if hi < lo << 5 {
        return Err(Error::Precondition(format!("d sweep {lo}..{hi} spans fewer than 5 octaves")));
    }
    let f = lookup("abs_power_c", &Params::from([("c".to_string(), c)]))?.circle();
    scaling_experiment(&f, d_values)
}

/// `(1 + √2)(5/4)(e|t|/2d)^d`, valid for `d ≥ |t| − 1`.
pub fn hamiltonian_simulation_budget(t: f64, d: usize) -> Result<f64> {
    if !t.is_finite() {
        return Err(invalid("t must be finite"));
    }
    if (d as f64) < t.abs() - 1.0 {
        return Err(Error::OutOfRegime(format!("d = {d} < |t| − 1 = {}", t.abs() - 1.0)));
    }
    if d == 0 {
        return Ok((1.0 + std::f64::consts::SQRT_2) * 1.25);
    }
    let base = std::f64::consts::E * t.abs() / (2.0 * d as f64);
    Ok((1.0 + std::f64::consts::SQRT_2) * 1.25 * base.powi(d as i32))
}
