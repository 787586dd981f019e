//! Functions on the unit circle and on `[−1, 1]`, sampled sup norms, and the
//! modulus of continuity.
//!
//! Functions are plain evaluators: all structure the constructions need is
//! obtained by sampling. Sup norms are grid maxima and therefore lower
//! bounds on the true sup norm; [`sup_norm_difference_checked`] reports
//! whether doubling the grid moves the estimate by more than 1%.

mod catalog;

pub use catalog::{catalog_names, default_catalog, lookup, CatalogFunction, Params};

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

pub type CircleEval = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;
pub type RealEval = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Default number of uniform points in a [`SupNormGrid`].
pub const DEFAULT_GRID_POINTS: usize = 1 << 14;

/// `e^{2πik/n}` folded into the first octant so that conjugate and
/// reflected roots are bitwise mirror images and quarter turns are exact.
pub fn root_of_unity(k: usize, n: usize) -> Complex64 {
    let n_f = n as f64;
    let k = (k % n) as f64;
    let (k, im_sign) = if 2.0 * k <= n_f { (k, 1.0) } else { (n_f - k, -1.0) };
    let (k, re_sign) = if 4.0 * k <= n_f { (k, 1.0) } else { (n_f / 2.0 - k, -1.0) };
    let (re, im) = if 8.0 * k <= n_f {
        let t = TAU * k / n_f;
        (t.cos(), t.sin())
    } else {
        let t = TAU * (n_f / 4.0 - k) / n_f;
        (t.sin(), t.cos())
    };
    Complex64::new(re_sign * re, im_sign * im)
}

/// A function `f: S¹ → ℂ` with a declared bound on `‖f‖_∞`.
#[derive(Clone)]
pub struct UnitCircleFunction {
    name: String,
    sup_bound: f64,
    eval: CircleEval,
    theta_derivative: Option<RealEval>,
}

impl fmt::Debug for UnitCircleFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UnitCircleFunction")
            .field("name", &self.name)
            .field("sup_bound", &self.sup_bound)
            .finish_non_exhaustive()
    }
}

impl UnitCircleFunction {
    pub fn new(
        name: impl Into<String>,
        sup_bound: f64,
        eval: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            sup_bound,
            eval: Arc::new(eval),
            theta_derivative: None,
        }
    }

    /// Attaches a closed form for `d/dθ f(e^{iθ})`.
    pub fn with_theta_derivative(mut self, derivative: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        self.theta_derivative = Some(Arc::new(derivative));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn declared_sup_bound(&self) -> f64 {
        self.sup_bound
    }

    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.eval)(z)
    }

    /// `f̃(θ) = f(e^{iθ})`.
    #[inline]
    pub fn eval_angle(&self, theta: f64) -> Complex64 {
        (self.eval)(Complex64::from_polar(1.0, theta))
    }

    pub fn theta_derivative(&self) -> Option<&RealEval> {
        self.theta_derivative.as_ref()
    }

    /// Samples at the `count`-th roots of unity, `f(e^{2πik/count})`.
    pub fn samples_at_roots(&self, count: usize) -> Vec<Complex64> {
        (0..count)
            .map(|k| self.eval(root_of_unity(k, count)))
            .collect()
    }

    /// Grid maximum of `|f|`.
    pub fn grid_sup(&self, grid: &SupNormGrid) -> f64 {
        grid.angles()
            .iter()
            .map(|&t| self.eval_angle(t).norm())
            .fold(0.0, f64::max)
    }

    /// Fails with [`Error::NormViolation`] if `|f|` exceeds the declared
    /// bound anywhere on the grid.
    pub fn check_sup_bound(&self, grid: &SupNormGrid) -> Result<f64> {
        let observed = self.grid_sup(grid);
        if observed > self.sup_bound + 1e-12 {
            return Err(Error::NormViolation { observed });
        }
        Ok(observed)
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let inner = self.eval.clone();
        let deriv = self.theta_derivative.clone();
        Self {
            name: format!("{}*{}", factor, self.name),
            sup_bound: self.sup_bound * factor.norm(),
            eval: Arc::new(move |z| factor * inner(z)),
            theta_derivative: deriv.map(|d| Arc::new(move |t| factor * d(t)) as RealEval),
        }
    }
}

/// Parity of a function on `[−1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// A function `g: [−1, 1] → ℂ` with `|g| ≤ 1`.
#[derive(Clone)]
pub struct IntervalFunction {
    name: String,
    eval: RealEval,
    derivative: Option<RealEval>,
    parity: Option<Parity>,
}

impl fmt::Debug for IntervalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IntervalFunction")
            .field("name", &self.name)
            .field("parity", &self.parity)
            .finish_non_exhaustive()
    }
}

impl IntervalFunction {
    pub fn new(name: impl Into<String>, eval: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
            derivative: None,
            parity: None,
        }
    }

    pub fn real(name: impl Into<String>, eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(name, move |x| Complex64::new(eval(x), 0.0))
    }

    pub fn with_derivative(mut self, derivative: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(derivative));
        self
    }

    pub fn with_parity(mut self, parity: Parity) -> Self {
        self.parity = Some(parity);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn parity(&self) -> Option<Parity> {
        self.parity
    }

    pub fn derivative(&self) -> Option<&RealEval> {
        self.derivative.as_ref()
    }

    #[inline]
    pub fn eval(&self, x: f64) -> Complex64 {
        (self.eval)(x)
    }

    /// Grid maximum of `|g(x) − (−1)^p g(−x)|` for the given parity.
    pub fn parity_defect(&self, parity: Parity, points: usize) -> f64 {
        (0..=points)
            .map(|i| {
                let x = -1.0 + 2.0 * i as f64 / points as f64;
                (self.eval(x) - parity.sign() * self.eval(-x)).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Grid maximum of `|g|` on `points + 1` equispaced points.
    pub fn grid_sup(&self, points: usize) -> f64 {
        (0..=points)
            .map(|i| self.eval(-1.0 + 2.0 * i as f64 / points as f64).norm())
            .fold(0.0, f64::max)
    }
}

/// `f(e^{iθ}) = g(cos θ)`. The result is reflection symmetric by construction.
pub fn lift_interval_function(g: &IntervalFunction) -> UnitCircleFunction {
    let eval = g.eval.clone();
    let lifted = UnitCircleFunction::new(format!("lift({})", g.name), 1.0, move |z: Complex64| {
        eval(z.re.clamp(-1.0, 1.0))
    });
    match g.derivative.clone() {
        Some(dg) => lifted.with_theta_derivative(move |theta: f64| -theta.sin() * dg(theta.cos())),
        None => lifted,
    }
}

/// Evaluation angles for sup-norm estimates: a uniform grid on `[0, 2π)`
/// merged with the interpolation nodes `2πk/4d` of the active `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupNormGrid {
    uniform_points: usize,
    node_count: Option<usize>,
    angles: Vec<f64>,
}

impl SupNormGrid {
    pub fn new(uniform_points: usize, d: Option<usize>) -> Result<Self> {
        if uniform_points == 0 {
            return Err(invalid("sup-norm grid must contain at least one point"));
        }
        let mut angles: Vec<f64> = (0..uniform_points)
            .map(|i| TAU * i as f64 / uniform_points as f64)
            .collect();
        let node_count = d.map(|d| 4 * d);
        if let Some(n) = node_count {
            if n > 0 && uniform_points % n != 0 {
                angles.extend((0..n).map(|k| TAU * k as f64 / n as f64));
                angles.sort_by(f64::total_cmp);
                angles.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
            }
        }
        Ok(Self {
            uniform_points,
            node_count,
            angles,
        })
    }

    /// Default `2^14`-point grid including the nodes for `d`.
    pub fn for_degree(d: usize) -> Self {
        Self::new(DEFAULT_GRID_POINTS, Some(d)).expect("non-empty grid")
    }

    pub fn uniform(points: usize) -> Result<Self> {
        Self::new(points, None)
    }

    /// Same node set, twice the uniform resolution.
    pub fn refined(&self) -> Self {
        Self::new(2 * self.uniform_points, self.node_count.map(|n| n / 4)).expect("non-empty grid")
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn uniform_points(&self) -> usize {
        self.uniform_points
    }

    pub fn contains_nodes(&self, d: usize) -> bool {
        let n = 4 * d;
        (0..n).all(|k| {
            let t = TAU * k as f64 / n as f64;
            self.angles.iter().any(|&a| (a - t).abs() < 1e-12)
        })
    }
}

/// `max_grid |f1 − f2|`, a lower bound on `‖f1 − f2‖_∞`.
pub fn sup_norm_difference(f1: &UnitCircleFunction, f2: &UnitCircleFunction, grid: &SupNormGrid) -> Result<f64> {
    sup_norm_of(grid, |t| f1.eval_angle(t) - f2.eval_angle(t))
}

pub(crate) fn sup_norm_of(grid: &SupNormGrid, h: impl Fn(f64) -> Complex64) -> Result<f64> {
    if grid.is_empty() {
        return Err(invalid("empty sup-norm grid"));
    }
    Ok(grid.angles().iter().map(|&t| h(t).norm()).fold(0.0, f64::max))
}

/// A sup-norm estimate together with its value on the doubled grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupNormEstimate {
    pub value: f64,
    pub refined_value: f64,
}

impl SupNormEstimate {
    /// Doubling the grid moved the estimate by less than 1% (or both values
    /// sit at the rounding floor).
    pub fn is_stable(&self) -> bool {
        let hi = self.value.max(self.refined_value);
        hi < 1e-12 || (self.refined_value - self.value).abs() < 0.01 * hi
    }

    pub fn best(&self) -> f64 {
        self.value.max(self.refined_value)
    }
}

pub fn sup_norm_difference_checked(
    f1: &UnitCircleFunction,
    f2: &UnitCircleFunction,
    grid: &SupNormGrid,
) -> Result<SupNormEstimate> {
    Ok(SupNormEstimate {
        value: sup_norm_difference(f1, f2, grid)?,
        refined_value: sup_norm_difference(f1, f2, &grid.refined())?,
    })
}

/// Sampling lattice for [`modulus_of_continuity`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulusGrid {
    pub start: f64,
    pub end: f64,
    pub points: usize,
    /// Treat the interval as one period of a periodic function.
    pub periodic: bool,
}

impl ModulusGrid {
    /// One period `[0, 2π)` of a function on the circle.
    pub fn circle(points: usize) -> Self {
        Self {
            start: 0.0,
            end: TAU,
            points,
            periodic: true,
        }
    }

    pub fn interval(start: f64, end: f64, points: usize) -> Self {
        Self {
            start,
            end,
            points,
            periodic: false,
        }
    }

    pub fn spacing(&self) -> f64 {
        (self.end - self.start) / self.points as f64
    }
}

/// `ω(Δ, f̃) = sup_{|x1 − x2| ≤ Δ} |f̃(x1) − f̃(x2)|`, sampled over all lattice
/// pairs whose separation is at most `Δ`. Nondecreasing in `Δ`.
pub fn modulus_of_continuity(f: impl Fn(f64) -> Complex64, delta: f64, grid: &ModulusGrid) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(invalid(format!("modulus of continuity needs Δ > 0, got {delta}")));
    }
    if grid.points < 2 || !(grid.end > grid.start) {
        return Err(invalid("modulus grid needs at least two points on a non-empty interval"));
    }
    let h = grid.spacing();
    let n = grid.points;
    let values: Vec<Complex64> = (0..n).map(|i| f(grid.start + h * i as f64)).collect();
    let max_lag = ((delta / h) * (1.0 + 1e-12)).floor() as usize;
    let max_lag = if grid.periodic { max_lag.min(n / 2) } else { max_lag.min(n - 1) };
    let mut omega = 0.0_f64;
    for lag in 1..=max_lag {
        if grid.periodic {
            for i in 0..n {
                omega = omega.max((values[i] - values[(i + lag) % n]).norm());
            }
        } else {
            for i in 0..n - lag {
                omega = omega.max((values[i] - values[i + lag]).norm());
            }
        }
    }
    Ok(omega)
}
