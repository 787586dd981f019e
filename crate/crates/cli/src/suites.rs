use std::f64::consts::SQRT_2;

use afqsp_core::analysis::{
    default_truncation_grid, fit_loglog_slope, fourier_truncation_upper_bound, hamiltonian_simulation_budget,
    interpolation_error, jackson_bound, ScalingPoint,
};
use afqsp_core::encoding::build_diagonal_encoding;
use afqsp_core::functions::{lookup, CatalogFunction, IntervalFunction, Params, UnitCircleFunction};
use afqsp_core::interpolation::averaged_interpolant;
use afqsp_core::numerics::random::{random_hermitian, random_scaled_matrix, random_unitary, seeded};
use afqsp_core::numerics::{matrix_function_oracle, operator_norm, CMatrix};
use afqsp_core::qsp::{assemble_qsp_block_encoding, QueryLedger};
use afqsp_core::transforms::{fhm_block_encode, qsvt, self_inverse_block_encoding, svd_oracle, SingularValueProblem};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, MatrixKind, Suite};
use crate::error::CliError;
use crate::output::{Report, Summary};

/// Additive slack on `(1 + √2) UB_d` for circuits on unitaries and for
/// `‖f − f_d‖`.
pub const QSP_SLACK: f64 = 1e-9;
/// Additive slack for circuits on walk operators (FHM and QSVT).
pub const TRANSFORM_SLACK: f64 = 1e-8;
/// Allowed `‖block − f_d(U)‖`, which is zero up to roundoff for every `f`.
pub const FD_IDENTITY_TOL: f64 = 1e-9;
/// The closed-form Hamiltonian simulation budget gets no slack by default.
pub const HAMSIM_SLACK: f64 = 0.0;
/// A fitted slope passes when at most `−c` plus this.
pub const SLOPE_SLACK: f64 = 0.3;
pub const DEFAULT_HERMITIAN_NORM: f64 = 0.9;
pub const DEFAULT_GENERAL_NORM: f64 = 0.8;

/// One row of a verification suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteRow {
    pub suite: &'static str,
    pub function: String,
    pub params: String,
    pub metric: &'static str,
    pub d: Option<usize>,
    pub seed: Option<u64>,
    pub measured_error: f64,
    #[serde(rename = "UB_d")]
    pub ub_d: Option<f64>,
    pub jackson_bound: Option<f64>,
    pub budget: f64,
    pub ratio: Option<f64>,
    /// `c-U/c-U†/U_f` uses of the assembled circuit.
    pub queries: Option<String>,
    pub pass: bool,
}

/// One row of the approximation table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub d: usize,
    pub interpolation_error: f64,
    #[serde(rename = "UB_d")]
    pub ub_d: f64,
    /// `(1 + √2) UB_d`.
    pub budget: f64,
    /// `‖f − f_d‖ / ((1 + √2) UB_d + slack)`.
    pub ratio: f64,
    /// Truncation at degree `3d − 1`, the degree of `f_d`. For comparison only.
    pub chebyshev_truncation_error: f64,
    pub pass: bool,
}

/// `k=v;k=v` in key order.
pub fn format_params(params: &Params) -> String {
    params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

pub fn resolve_function(name: &str, params: &Params) -> Result<CatalogFunction, CliError> {
    lookup(name, params).map_err(CliError::from_lookup)
}

fn summarize(suite: Suite, function: &str, params: &Params, passes: impl Iterator<Item = (bool, Option<f64>)>) -> Summary {
    let mut summary = Summary {
        suite: suite.name().to_string(),
        function: function.to_string(),
        params: format_params(params),
        pass_count: 0,
        fail_count: 0,
        max_ratio: None,
    };
    for (pass, ratio) in passes {
        if pass {
            summary.pass_count += 1;
        } else {
            summary.fail_count += 1;
        }
        if let Some(r) = ratio {
            summary.max_ratio = Some(summary.max_ratio.map_or(r, |m: f64| m.max(r)));
        }
    }
    summary
}

fn grid_for(config_grid: Option<usize>, degree: usize) -> usize {
    config_grid.unwrap_or_else(|| default_truncation_grid(degree))
}

fn op_err(a: &CMatrix, b: &CMatrix) -> Result<f64, CliError> {
    Ok(operator_norm(&(a - b))?)
}

fn queries(ledger: QueryLedger) -> String {
    format!("{}/{}/{}", ledger.cu_uses, ledger.cu_dagger_uses, ledger.uf_uses)
}

/// The approximation table of `f` over `d_list`.
pub fn approx_table(f: &UnitCircleFunction, d_list: &[usize], grid: Option<usize>, slack: f64) -> Result<Vec<TableRow>, CliError> {
    d_list
        .par_iter()
        .map(|&d| {
            let points = grid_for(grid, 3 * d);
            let error = interpolation_error(f, d, points)?;
            let ub_d = fourier_truncation_upper_bound(f, d, points)?.upper;
            let budget = (1.0 + SQRT_2) * ub_d;
            let ratio = error / (budget + slack);
            let chebyshev_truncation_error = fourier_truncation_upper_bound(f, 3 * d - 1, points)?.upper;
            Ok(TableRow { d, interpolation_error: error, ub_d, budget, ratio, chebyshev_truncation_error, pass: ratio <= 1.0 })
        })
        .collect()
}

pub fn approx_table_report(
    name: &str,
    params: &Params,
    d_list: &[usize],
    grid: Option<usize>,
    slack: Option<f64>,
) -> Result<Report<TableRow>, CliError> {
    let f = resolve_function(name, params)?.circle();
    let rows = approx_table(&f, d_list, grid, slack.unwrap_or(QSP_SLACK))?;
    let summary = summarize(Suite::ApproxTable, name, params, rows.iter().map(|r| (r.pass, Some(r.ratio))));
    Ok(Report { rows, summary })
}

/// Rows of a run, one type per table layout.
#[derive(Debug, Clone)]
pub enum SuiteOutput {
    Rows(Report<SuiteRow>),
    Table(Report<TableRow>),
}

impl SuiteOutput {
    pub fn summary(&self) -> &Summary {
        match self {
            SuiteOutput::Rows(r) => &r.summary,
            SuiteOutput::Table(r) => &r.summary,
        }
    }
}

/// Checks the suite against the function and matrix settings, then runs
/// every `(d, seed)` cell. Nothing is written here.
pub fn run_suite(config: &ExperimentConfig) -> Result<SuiteOutput, CliError> {
    let entry = resolve_function(&config.function, &config.params)?;
    check_matrix(config)?;
    if config.suite == Suite::ApproxTable {
        return approx_table_report(&config.function, &config.params, &config.d_list, config.grid, config.tolerance)
            .map(SuiteOutput::Table);
    }
    let cell = Cell::prepare(config, &entry)?;
    let cells: Vec<(usize, u64)> =
        config.d_list.iter().flat_map(|&d| config.seeds().map(move |s| (d, s))).collect();
    let mut rows = if config.suite == Suite::Scaling {
        config.d_list.par_iter().map(|&d| cell.run(d, None)).collect::<Result<Vec<_>, _>>()?
    } else {
        cells.par_iter().map(|&(d, seed)| cell.run(d, Some(seed))).collect::<Result<Vec<_>, _>>()?
    };
    if let Kind::Scaling { c } = cell.kind {
        rows.push(slope_row(config, c, &rows)?);
    }
    let summary = summarize(config.suite, &config.function, &config.params, rows.iter().map(|r| (r.pass, r.ratio)));
    Ok(SuiteOutput::Rows(Report { rows, summary }))
}

fn check_matrix(config: &ExperimentConfig) -> Result<(), CliError> {
    let wanted = config.suite.matrix_kind();
    match (config.matrix, wanted) {
        (Some(kind), None) => {
            return Err(CliError::Unsupported(format!("suite {} takes no {kind:?} matrix", config.suite.name())))
        }
        (Some(kind), Some(w)) if kind != w => {
            return Err(CliError::Unsupported(format!("suite {} needs a {w:?} matrix, not {kind:?}", config.suite.name())))
        }
        _ => {}
    }
    match wanted {
        Some(MatrixKind::Unitary | MatrixKind::Hermitian) => {
            if !config.dimension.is_power_of_two() {
                return Err(CliError::Unsupported(format!("dimension {} is not a power of two", config.dimension)));
            }
            if config.columns.is_some_and(|c| c != config.dimension) {
                return Err(CliError::Unsupported("square matrix suites take no `columns`".into()));
            }
        }
        Some(MatrixKind::General) => {}
        None => {
            if config.columns.is_some() || config.norm.is_some() {
                return Err(CliError::Unsupported(format!("suite {} uses no matrix", config.suite.name())));
            }
        }
    }
    if wanted == Some(MatrixKind::Unitary) && config.norm.is_some() {
        return Err(CliError::Unsupported("unitaries take no `norm`".into()));
    }
    Ok(())
}

enum Kind {
    Qsp(UnitCircleFunction),
    Fhm(IntervalFunction),
    Hamsim { g: IntervalFunction, t: f64 },
    Qsvt(IntervalFunction),
    Scaling { c: f64 },
}

/// Everything a cell needs besides `d` and the seed.
struct Cell<'a> {
    config: &'a ExperimentConfig,
    kind: Kind,
    circle: UnitCircleFunction,
    params: String,
}

fn interval_entry(config: &ExperimentConfig, entry: &CatalogFunction) -> Result<IntervalFunction, CliError> {
    entry.interval().cloned().ok_or_else(|| {
        CliError::Unsupported(format!("suite {} needs a function on [−1, 1]; {} lives on the circle", config.suite.name(), config.function))
    })
}

impl<'a> Cell<'a> {
    fn prepare(config: &'a ExperimentConfig, entry: &CatalogFunction) -> Result<Self, CliError> {
        let kind = match config.suite {
            Suite::QspVerify => Kind::Qsp(entry.circle()),
            Suite::Fhm => Kind::Fhm(interval_entry(config, entry)?),
            Suite::Hamsim => {
                if config.function != "exp_it_cos" {
                    return Err(CliError::Unsupported(format!("hamsim needs exp_it_cos, not {}", config.function)));
                }
                let t = config.params.get("t").copied().unwrap_or(1.0);
                for &d in &config.d_list {
                    hamiltonian_simulation_budget(t, d).map_err(|e| CliError::Unsupported(e.to_string()))?;
                }
                Kind::Hamsim { g: interval_entry(config, entry)?, t }
            }
            Suite::Qsvt => {
                let g = interval_entry(config, entry)?;
                if g.parity().is_none() {
                    return Err(CliError::Unsupported(format!("qsvt needs a function of definite parity; {} has none", g.name())));
                }
                Kind::Qsvt(g)
            }
            Suite::Scaling => {
                if config.function != "abs_power_c" {
                    return Err(CliError::Unsupported(format!("scaling needs abs_power_c, not {}", config.function)));
                }
                let c = config.params.get("c").copied().unwrap_or(0.5);
                if (c - c.round()).abs() < 1e-12 {
                    return Err(CliError::Unsupported(format!("scaling needs a non-integer c, got {c}")));
                }
                let (lo, hi) = (config.d_list.iter().min().unwrap(), config.d_list.iter().max().unwrap());
                if *hi < lo << 5 {
                    return Err(CliError::Unsupported(format!("d_list {lo}..{hi} spans fewer than 5 octaves")));
                }
                Kind::Scaling { c }
            }
            Suite::ApproxTable => unreachable!("handled by the caller"),
        };
        Ok(Self { config, kind, circle: entry.circle(), params: format_params(&config.params) })
    }

    fn slack(&self, default: f64) -> f64 {
        self.config.tolerance.unwrap_or(default)
    }

    fn ub(&self, d: usize) -> Result<f64, CliError> {
        Ok(fourier_truncation_upper_bound(&self.circle, d, grid_for(self.config.grid, d))?.upper)
    }

    fn row(&self, metric: &'static str, d: usize, seed: Option<u64>, measured: f64, ub: Option<f64>, budget: f64) -> SuiteRow {
        SuiteRow {
            suite: self.config.suite.name(),
            function: self.config.function.clone(),
            params: self.params.clone(),
            metric,
            d: Some(d),
            seed,
            measured_error: measured,
            ub_d: ub,
            jackson_bound: None,
            budget,
            ratio: Some(if budget > 0.0 { measured / budget } else if measured == 0.0 { 0.0 } else { f64::INFINITY }),
            queries: None,
            pass: measured <= budget,
        }
    }

    fn hermitian(&self, seed: u64) -> CMatrix {
        random_hermitian(self.config.dimension, self.config.norm.unwrap_or(DEFAULT_HERMITIAN_NORM), &mut seeded(seed))
    }

    fn run(&self, d: usize, seed: Option<u64>) -> Result<SuiteRow, CliError> {
        let seed_value = seed.unwrap_or(self.config.seed);
        match &self.kind {
            Kind::Qsp(f) => {
                let u = random_unitary(self.config.dimension, &mut seeded(seed_value));
                let enc = build_diagonal_encoding(f, d.trailing_zeros() as usize)?;
                let (be, ledger) = assemble_qsp_block_encoding(&u, &enc)?;
                let measured = op_err(&be.encoded(), &matrix_function_oracle(&u, |z| f.eval(z))?)?;
                let fd = averaged_interpolant(f, d)?;
                let fd_error = op_err(&be.encoded(), &matrix_function_oracle(&u, |z| fd.evaluate_unchecked(z))?)?;
                let ub = self.ub(d)?;
                let mut row = self.row("block-error", d, seed, measured, Some(ub), (1.0 + SQRT_2) * ub + self.slack(QSP_SLACK));
                row.pass &= ledger == QueryLedger::expected_for(d) && fd_error <= FD_IDENTITY_TOL;
                row.queries = Some(queries(ledger));
                Ok(row)
            }
            Kind::Fhm(g) => {
                let h = self.hermitian(seed_value);
                let fe = fhm_block_encode(&self_inverse_block_encoding(&h)?, g, d)?;
                let target = matrix_function_oracle(&h, |x| g.eval(x.re))?;
                let measured = op_err(&fe.encoding.encoded(), &target)?;
                let ub = match self.config.grid {
                    Some(_) => self.ub(d)?,
                    None => fe.truncation_bound,
                };
                let mut row = self.row("block-error", d, seed, measured, Some(ub), (1.0 + SQRT_2) * ub + self.slack(TRANSFORM_SLACK));
                row.pass &= fe.ledger == QueryLedger::expected_for(d);
                row.queries = Some(queries(fe.ledger));
                Ok(row)
            }
            Kind::Hamsim { g, t } => {
                let h = self.hermitian(seed_value);
                let fe = fhm_block_encode(&self_inverse_block_encoding(&h)?, g, d)?;
                let target = matrix_function_oracle(&h, |x| Complex64::new(0.0, t * x.re).exp())?;
                let measured = op_err(&fe.encoding.encoded(), &target)?;
                let budget = hamiltonian_simulation_budget(*t, d)? + self.slack(HAMSIM_SLACK);
                let mut row = self.row("block-error", d, seed, measured, Some(fe.truncation_bound), budget);
                row.queries = Some(queries(fe.ledger));
                Ok(row)
            }
            Kind::Qsvt(g) => {
                let rows = self.config.dimension;
                let cols = self.config.columns.unwrap_or(rows);
                let a = random_scaled_matrix(rows, cols, self.config.norm.unwrap_or(DEFAULT_GENERAL_NORM), &mut seeded(seed_value));
                let problem = SingularValueProblem::new(a, g.clone(), g.parity().expect("checked in prepare"))?;
                let out = qsvt(&problem, d)?;
                let measured = op_err(&out.transformed, &svd_oracle(&problem)?)?;
                let ub = match self.config.grid {
                    Some(_) => self.ub(d)?,
                    None => out.truncation_bound,
                };
                let mut row = self.row("svd-error", d, seed, measured, Some(ub), (1.0 + SQRT_2) * ub + self.slack(TRANSFORM_SLACK));
                row.queries = Some(queries(out.ledger));
                Ok(row)
            }
            Kind::Scaling { c } => {
                let measured = interpolation_error(&self.circle, d, grid_for(self.config.grid, d))?;
                let ub = self.ub(d)?;
                let mut row = self.row("interpolation-error", d, None, measured, Some(ub), (1.0 + SQRT_2) * ub + self.slack(QSP_SLACK));
                let r = if *c > 1.0 { 1 } else { 0 };
                row.jackson_bound = Some(jackson_bound(&self.circle, r, d)?.value);
                Ok(row)
            }
        }
    }
}

fn slope_row(config: &ExperimentConfig, c: f64, rows: &[SuiteRow]) -> Result<SuiteRow, CliError> {
    let points: Vec<ScalingPoint> =
        rows.iter().map(|r| ScalingPoint { d: r.d.expect("per-d rows"), error: r.measured_error }).collect();
    let fit = fit_loglog_slope(&points)?;
    let budget = -c + SLOPE_SLACK;
    Ok(SuiteRow {
        suite: config.suite.name(),
        function: config.function.clone(),
        params: format_params(&config.params),
        metric: "slope",
        d: None,
        seed: None,
        measured_error: fit.slope,
        ub_d: None,
        jackson_bound: None,
        budget,
        ratio: None,
        queries: None,
        pass: fit.slope <= budget,
    })
}
