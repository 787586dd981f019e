//! Laurent and Chebyshev polynomial machinery on the roots of unity.
//!
//! The averaged interpolant `f_d` is defined by a triple sum over an index
//! `j ∈ [4d]`, a window `j' ∈ [d, 3d)` and the nodes `z_k`. Grouping terms by
//! `r = j − j'` collapses it to a windowed discrete Fourier transform: the
//! coefficient of `z^r` is `c_r · (1/4d) Σ_k f(z_k) z_k^{−r}`, where `c_r`
//! is a triangular taper that is flat on `|r| ≤ d` and falls linearly to zero
//! at `|r| = 3d`. A single FFT of length `4d` therefore yields `f_d`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::functions::{lift_interval_function, root_of_unity, sup_norm_of, IntervalFunction, SupNormGrid, UnitCircleFunction};

/// Coefficients below this fraction of the largest one count as zero.
pub const ZERO_THRESHOLD: f64 = 1e-13;

const CIRCLE_TOL: f64 = 1e-12;

/// `Σ_{j=−D}^{D} β_j z^j`, stored densely from `β_{−D}` to `β_D`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LaurentJson", into = "LaurentJson")]
pub struct LaurentPolynomial {
    coefficients: Vec<Complex64>,
}

impl LaurentPolynomial {
    /// Builds from `2D + 1` coefficients ordered `β_{−D}, …, β_D`.
    ///
    /// # Panics
    /// If the coefficient count is even.
    pub fn new(coefficients: Vec<Complex64>) -> Self {
        assert!(coefficients.len() % 2 == 1, "need 2D + 1 coefficients");
        Self { coefficients }
    }

    pub fn zero() -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0)])
    }

    /// `c · z^j`.
    pub fn monomial(j: i64, c: Complex64) -> Self {
        let bound = j.unsigned_abs() as usize;
        let mut coefficients = vec![Complex64::new(0.0, 0.0); 2 * bound + 1];
        coefficients[(bound as i64 + j) as usize] = c;
        Self::new(coefficients)
    }

    /// Builds from `(j, β_j)` pairs.
    pub fn from_terms(terms: &[(i64, Complex64)]) -> Self {
        let bound = terms.iter().map(|(j, _)| j.unsigned_abs() as usize).max().unwrap_or(0);
        let mut p = Self::new(vec![Complex64::new(0.0, 0.0); 2 * bound + 1]);
        for &(j, c) in terms {
            p.coefficients[(bound as i64 + j) as usize] += c;
        }
        p
    }

    /// Storage bound `D`; coefficients are held for `|j| ≤ D`.
    pub fn degree_bound(&self) -> usize {
        self.coefficients.len() / 2
    }

    /// Largest `|j|` with `|β_j|` above the relative zero threshold.
    pub fn degree(&self) -> usize {
        let peak = self.coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0;
        }
        let bound = self.degree_bound() as i64;
        (-bound..=bound)
            .filter(|&j| self.coefficient(j).norm() > ZERO_THRESHOLD * peak)
            .map(|j| j.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn coefficient(&self, j: i64) -> Complex64 {
        let bound = self.degree_bound() as i64;
        if j.abs() > bound {
            Complex64::new(0.0, 0.0)
        } else {
            self.coefficients[(bound + j) as usize]
        }
    }

    /// Coefficients `β_{−D}, …, β_D`.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// `p(z)` for `|z| = 1`.
    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        if (z.norm() - 1.0).abs() > CIRCLE_TOL {
            return Err(invalid(format!("|z| = {} is off the unit circle", z.norm())));
        }
        Ok(self.evaluate_unchecked(z))
    }

    /// Horner in `z` for the nonnegative powers and in `z^{−1}` for the
    /// negative ones.
    pub fn evaluate_unchecked(&self, z: Complex64) -> Complex64 {
        let bound = self.degree_bound();
        let mut positive = Complex64::new(0.0, 0.0);
        for c in self.coefficients[bound..].iter().rev() {
            positive = positive * z + c;
        }
        if bound == 0 {
            return positive;
        }
        let w = z.inv();
        let mut negative = Complex64::new(0.0, 0.0);
        for c in self.coefficients[..bound].iter() {
            negative = (negative + c) * w;
        }
        positive + negative
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.coefficients.iter().map(|x| x * c).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let bound = self.degree_bound().max(other.degree_bound()) as i64;
        Self::new((-bound..=bound).map(|j| self.coefficient(j) + other.coefficient(j)).collect())
    }

    /// Largest coefficient-wise difference.
    pub fn max_coefficient_distance(&self, other: &Self) -> f64 {
        let bound = self.degree_bound().max(other.degree_bound()) as i64;
        (-bound..=bound)
            .map(|j| (self.coefficient(j) - other.coefficient(j)).norm())
            .fold(0.0, f64::max)
    }

    pub fn to_circle_function(&self, name: impl Into<String>) -> UnitCircleFunction {
        let p = self.clone();
        let dp = self.clone();
        let bound = self.coefficients.iter().map(|c| c.norm()).sum::<f64>();
        UnitCircleFunction::new(name, bound, move |z| p.evaluate_unchecked(z)).with_theta_derivative(move |theta| {
            let bound = dp.degree_bound() as i64;
            (-bound..=bound)
                .map(|j| dp.coefficient(j) * Complex64::new(0.0, j as f64) * Complex64::from_polar(1.0, j as f64 * theta))
                .sum()
        })
    }
}

/// JSON form: `{"degree": D, "coefficients": [[re, im], …]}` ordered from `β_{−D}`.
#[derive(Serialize, Deserialize)]
struct LaurentJson {
    degree: usize,
    coefficients: Vec<[f64; 2]>,
}

impl From<LaurentPolynomial> for LaurentJson {
    fn from(p: LaurentPolynomial) -> Self {
        Self {
            degree: p.degree_bound(),
            coefficients: p.coefficients.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

impl TryFrom<LaurentJson> for LaurentPolynomial {
    type Error = Error;

    fn try_from(json: LaurentJson) -> Result<Self> {
        if json.coefficients.len() != 2 * json.degree + 1 {
            return Err(invalid(format!(
                "degree {} needs {} coefficients, found {}",
                json.degree,
                2 * json.degree + 1,
                json.coefficients.len()
            )));
        }
        Ok(Self::new(json.coefficients.iter().map(|&[re, im]| Complex64::new(re, im)).collect()))
    }
}

/// The nodes `z_k = e^{2πik/d1}`, their angles, and abscissas `x_k = cos θ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    d: usize,
    nodes: Vec<Complex64>,
    angles: Vec<f64>,
    abscissas: Vec<f64>,
}

impl NodeSet {
    /// The `4d` nodes used by the averaged interpolant.
    pub fn for_degree(d: usize) -> Result<Self> {
        ensure_power_of_two(d)?;
        Ok(Self::with_count(d, 4 * d))
    }

    pub fn with_count(d: usize, count: usize) -> Self {
        let nodes: Vec<Complex64> = (0..count).map(|k| root_of_unity(k, count)).collect();
        Self {
            d,
            angles: (0..count).map(|k| TAU * k as f64 / count as f64).collect(),
            abscissas: nodes.iter().map(|z| z.re).collect(),
            nodes,
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn abscissas(&self) -> &[f64] {
        &self.abscissas
    }
}

pub(crate) fn ensure_power_of_two(d: usize) -> Result<()> {
    if d == 0 || !d.is_power_of_two() {
        return Err(invalid(format!("d = {d} is not a power of two")));
    }
    Ok(())
}

/// `X_r = Σ_k x_k e^{−2πikr/N}`.
fn dft(samples: &[Complex64]) -> Vec<Complex64> {
    let mut buffer = samples.to_vec();
    if buffer.is_empty() {
        return buffer;
    }
    FftPlanner::new().plan_fft_forward(buffer.len()).process(&mut buffer);
    buffer
}

/// Recovers the degree-`d` Laurent polynomial through samples at the `d1`
/// roots of unity, `β_j = (1/d1) Σ_k f(z_k) z_k^{−j}`. Exact whenever the
/// sampled function is a Laurent polynomial of degree at most `d`.
pub fn reconstruct_laurent(samples: &[Complex64], d: usize) -> Result<LaurentPolynomial> {
    let d1 = samples.len();
    if d1 <= 2 * d {
        return Err(Error::Aliasing(format!("{d1} samples cannot resolve degree {d} (need more than {})", 2 * d)));
    }
    let spectrum = dft(samples);
    let scale = 1.0 / d1 as f64;
    let di = d as i64;
    Ok(LaurentPolynomial::new(
        (-di..=di)
            .map(|j| spectrum[j.rem_euclid(d1 as i64) as usize] * scale)
            .collect(),
    ))
}

/// Taper applied to the Fourier coefficient of order `r` in `f_d`.
pub fn triangular_weight(r: i64, d: usize) -> f64 {
    let r = r.unsigned_abs() as usize;
    if r <= d {
        1.0
    } else if r < 3 * d {
        (3 * d - r) as f64 / (2 * d) as f64
    } else {
        0.0
    }
}

/// The averaged interpolant `f_d` from samples at the `4d` roots of unity.
pub fn averaged_interpolant_from_samples(samples: &[Complex64]) -> Result<LaurentPolynomial> {
    let n = samples.len();
    if n % 4 != 0 {
        return Err(invalid(format!("{n} samples is not 4d")));
    }
    let d = n / 4;
    ensure_power_of_two(d)?;
    let spectrum = dft(samples);
    let bound = 3 * d as i64 - 1;
    let scale = 1.0 / n as f64;
    Ok(LaurentPolynomial::new(
        (-bound..=bound)
            .map(|r| spectrum[r.rem_euclid(n as i64) as usize] * (scale * triangular_weight(r, d)))
            .collect(),
    ))
}

/// The averaged interpolant `f_d`, a Laurent polynomial of degree `3d − 1`
/// within `(1 + √2) E_d(f)` of `f`, and exact for `f` of degree at most `d`.
pub fn averaged_interpolant(f: &UnitCircleFunction, d: usize) -> Result<LaurentPolynomial> {
    ensure_power_of_two(d)?;
    averaged_interpolant_from_samples(&f.samples_at_roots(4 * d))
}

/// `Σ_r β_r T_r(x)` on `[−1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevPolynomial {
    coefficients: Vec<Complex64>,
}

impl ChebyshevPolynomial {
    pub fn new(coefficients: Vec<Complex64>) -> Self {
        Self { coefficients }
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// Clenshaw recurrence.
    pub fn evaluate(&self, x: f64) -> Complex64 {
        let mut b1 = Complex64::new(0.0, 0.0);
        let mut b2 = Complex64::new(0.0, 0.0);
        for c in self.coefficients.iter().skip(1).rev() {
            let b0 = c + b1 * (2.0 * x) - b2;
            b2 = b1;
            b1 = b0;
        }
        match self.coefficients.first() {
            Some(&c0) => c0 + b1 * x - b2,
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// `Σ β_r T_r(x)` with `T_r` from the three-term recursion.
    pub fn evaluate_direct(&self, x: f64) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        let (mut t_prev, mut t) = (1.0, x);
        for (r, c) in self.coefficients.iter().enumerate() {
            let tr = match r {
                0 => 1.0,
                1 => x,
                _ => {
                    let next = 2.0 * x * t - t_prev;
                    t_prev = t;
                    t = next;
                    next
                }
            };
            sum += c * tr;
        }
        sum
    }
}

/// Values `T_0(x), …, T_n(x)`.
fn chebyshev_values(x: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n >= 1 {
        out.push(x);
    }
    for r in 2..=n {
        out.push(2.0 * x * out[r - 1] - out[r - 2]);
    }
    out
}

/// Chebyshev form `g_d` of the averaged interpolant of the lift of `g`,
/// computed by direct node sums:
///
/// * `β_0 = (1/4d) Σ_k g(x_k)`
/// * `β_r = (2/4d) Σ_k g(x_k) T_r(x_k)` for `1 ≤ r ≤ d`
/// * `β_r = (2(3d − r)/8d²) Σ_k g(x_k) T_r(x_k)` for `d < r ≤ 3d − 1`
pub fn chebyshev_form(g: &IntervalFunction, d: usize) -> Result<ChebyshevPolynomial> {
    let nodes = NodeSet::for_degree(d)?;
    let top = 3 * d - 1;
    let mut sums = vec![Complex64::new(0.0, 0.0); top + 1];
    for &x in nodes.abscissas() {
        let gx = g.eval(x);
        for (r, t) in chebyshev_values(x, top).into_iter().enumerate() {
            sums[r] += gx * t;
        }
    }
    let n = (4 * d) as f64;
    let coefficients = sums
        .into_iter()
        .enumerate()
        .map(|(r, s)| {
            let weight = if r == 0 {
                1.0 / n
            } else if r <= d {
                2.0 / n
            } else {
                2.0 * (3 * d - r) as f64 / (8 * d * d) as f64
            };
            s * weight
        })
        .collect();
    Ok(ChebyshevPolynomial::new(coefficients))
}

/// `max_θ |f_d(e^{iθ}) − g_d(cos θ)|` over the grid, with `f_d` from the
/// FFT route on the lift of `g` and `g_d` from [`chebyshev_form`].
pub fn consistency_fd_gd(g: &IntervalFunction, d: usize, grid: &SupNormGrid) -> Result<f64> {
    let fd = averaged_interpolant(&lift_interval_function(g), d)?;
    let gd = chebyshev_form(g, d)?;
    sup_norm_of(grid, |t| fd.evaluate_unchecked(Complex64::from_polar(1.0, t)) - gd.evaluate(t.cos()))
}
