//! Named test functions addressable by string plus parameter map.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{lift_interval_function, IntervalFunction, Parity, SupNormGrid, UnitCircleFunction, DEFAULT_GRID_POINTS};
use crate::error::{invalid, Error, Result};
use crate::interpolation::LaurentPolynomial;
use crate::numerics::random::{gaussian_complex, seeded};

pub type Params = BTreeMap<String, f64>;

/// Safety factor applied on top of the grid maximum when normalising random
/// Laurent test polynomials.
const LAURENT_NORMALIZATION_SLACK: f64 = 1.000_000_1;

const NAMES: [&str; 7] = [
    "exp_it_cos",
    "abs_power_c",
    "sign_smooth",
    "gibbs",
    "inverse_capped",
    "monomial_k",
    "laurent_test",
];

pub fn catalog_names() -> &'static [&'static str] {
    &NAMES
}

/// A catalog entry: either an interval function (used through its lift to
/// the circle) or a function given directly on the circle.
#[derive(Debug, Clone)]
pub enum CatalogFunction {
    Interval(IntervalFunction),
    Circle(UnitCircleFunction),
}

impl CatalogFunction {
    pub fn name(&self) -> &str {
        match self {
            CatalogFunction::Interval(g) => g.name(),
            CatalogFunction::Circle(f) => f.name(),
        }
    }

    pub fn circle(&self) -> UnitCircleFunction {
        match self {
            CatalogFunction::Interval(g) => lift_interval_function(g),
            CatalogFunction::Circle(f) => f.clone(),
        }
    }

    pub fn interval(&self) -> Option<&IntervalFunction> {
        match self {
            CatalogFunction::Interval(g) => Some(g),
            CatalogFunction::Circle(_) => None,
        }
    }
}

fn take(params: &Params, allowed: &[(&str, f64)]) -> Result<Vec<f64>> {
    if let Some(unknown) = params.keys().find(|k| !allowed.iter().any(|(a, _)| a == k)) {
        return Err(invalid(format!("unknown parameter `{unknown}`")));
    }
    Ok(allowed
        .iter()
        .map(|(k, default)| params.get(*k).copied().unwrap_or(*default))
        .collect())
}

fn positive(name: &str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(invalid(format!("parameter `{name}` must be positive, got {value}")))
    }
}

fn nonnegative_integer(name: &str, value: f64) -> Result<u64> {
    if value >= 0.0 && value.fract() == 0.0 && value < 1e15 {
        Ok(value as u64)
    } else {
        Err(invalid(format!("parameter `{name}` must be a nonnegative integer, got {value}")))
    }
}

/// Looks up a catalog entry by name.
///
/// | name | function | parameters (default) |
/// |---|---|---|
/// | `exp_it_cos` | `e^{itx}` | `t` (1) |
/// | `abs_power_c` | `|x|^c` | `c` (0.5) |
/// | `sign_smooth` | `tanh(κx)` | `kappa` (4) |
/// | `gibbs` | `e^{−βx}/e^{|β|}` | `beta` (1) |
/// | `inverse_capped` | `x/a` for `|x| < a`, `a/x` otherwise | `a` (0.25) |
/// | `monomial_k` | `x^k` | `k` (3) |
/// | `laurent_test` | random Laurent polynomial with `‖f‖_∞ ≤ 1` | `degree` (4), `seed` (0) |
pub fn lookup(name: &str, params: &Params) -> Result<CatalogFunction> {
    let entry = match name {
        "exp_it_cos" => {
            let t = take(params, &[("t", 1.0)])?[0];
            IntervalFunction::new(format!("exp_it_cos(t={t})"), move |x| Complex64::new(0.0, t * x).exp())
                .with_derivative(move |x| Complex64::new(0.0, t) * Complex64::new(0.0, t * x).exp())
        }
        "abs_power_c" => {
            let c = positive("c", take(params, &[("c", 0.5)])?[0])?;
            let g = IntervalFunction::real(format!("abs_power_c(c={c})"), move |x: f64| x.abs().powf(c))
                .with_parity(Parity::Even);
            if c > 1.0 {
                g.with_derivative(move |x: f64| Complex64::new(c * x.abs().powf(c - 1.0) * x.signum(), 0.0))
            } else {
                g
            }
        }
        "sign_smooth" => {
            let kappa = positive("kappa", take(params, &[("kappa", 4.0)])?[0])?;
            IntervalFunction::real(format!("sign_smooth(kappa={kappa})"), move |x: f64| (kappa * x).tanh())
                .with_derivative(move |x: f64| Complex64::new(kappa / (kappa * x).cosh().powi(2), 0.0))
                .with_parity(Parity::Odd)
        }
        "gibbs" => {
            let beta = take(params, &[("beta", 1.0)])?[0];
            let norm = beta.abs();
            IntervalFunction::real(format!("gibbs(beta={beta})"), move |x: f64| (-beta * x - norm).exp())
                .with_derivative(move |x: f64| Complex64::new(-beta * (-beta * x - norm).exp(), 0.0))
        }
        "inverse_capped" => {
            let a = positive("a", take(params, &[("a", 0.25)])?[0])?;
            if a > 1.0 {
                return Err(invalid("parameter `a` of inverse_capped must lie in (0, 1]"));
            }
            IntervalFunction::real(format!("inverse_capped(a={a})"), move |x: f64| {
                if x.abs() < a {
                    x / a
                } else {
                    a / x
                }
            })
            .with_derivative(move |x: f64| Complex64::new(if x.abs() < a { 1.0 / a } else { -a / (x * x) }, 0.0))
            .with_parity(Parity::Odd)
        }
        "monomial_k" => {
            let k = nonnegative_integer("k", take(params, &[("k", 3.0)])?[0])? as i32;
            let parity = if k % 2 == 0 { Parity::Even } else { Parity::Odd };
            IntervalFunction::real(format!("monomial_k(k={k})"), move |x: f64| x.powi(k))
                .with_derivative(move |x: f64| {
                    Complex64::new(if k == 0 { 0.0 } else { k as f64 * x.powi(k - 1) }, 0.0)
                })
                .with_parity(parity)
        }
        "laurent_test" => {
            let values = take(params, &[("degree", 4.0), ("seed", 0.0)])?;
            let degree = nonnegative_integer("degree", values[0])? as usize;
            let seed = nonnegative_integer("seed", values[1])?;
            let p = random_laurent_test(degree, seed);
            return Ok(CatalogFunction::Circle(p.to_circle_function(format!(
                "laurent_test(degree={degree},seed={seed})"
            ))));
        }
        other => return Err(Error::UnknownFunction(other.to_string())),
    };
    Ok(CatalogFunction::Interval(entry))
}

/// Random Laurent polynomial of the given degree with complex Gaussian
/// coefficients, divided by its `2^14`-grid maximum times `1.0000001`.
pub fn random_laurent_test(degree: usize, seed: u64) -> LaurentPolynomial {
    let mut rng = seeded(seed);
    let coefficients = (0..2 * degree + 1).map(|_| gaussian_complex(&mut rng)).collect();
    let raw = LaurentPolynomial::new(coefficients);
    let grid = SupNormGrid::uniform(DEFAULT_GRID_POINTS).expect("non-empty grid");
    let peak = raw.to_circle_function("raw").grid_sup(&grid);
    raw.scale(Complex64::new(1.0 / (peak * LAURENT_NORMALIZATION_SLACK), 0.0))
}

/// One instance of every catalog entry with default parameters.
pub fn default_catalog() -> Vec<CatalogFunction> {
    NAMES
        .iter()
        .map(|name| lookup(name, &Params::new()).expect("default parameters are valid"))
        .collect()
}
