use std::path::{Path, PathBuf};

use afqsp_core::functions::Params;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Environment variable naming the directory for results whose path the
/// config leaves open.
pub const OUT_DIR_ENV: &str = "QSP_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    QspVerify,
    Fhm,
    Qsvt,
    Scaling,
    Hamsim,
    ApproxTable,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::QspVerify => "qsp-verify",
            Suite::Fhm => "fhm",
            Suite::Qsvt => "qsvt",
            Suite::Scaling => "scaling",
            Suite::Hamsim => "hamsim",
            Suite::ApproxTable => "approx-table",
        }
    }

    /// Matrix kind each suite works on; `None` for suites without a matrix.
    pub fn matrix_kind(self) -> Option<MatrixKind> {
        match self {
            Suite::QspVerify => Some(MatrixKind::Unitary),
            Suite::Fhm | Suite::Hamsim => Some(MatrixKind::Hermitian),
            Suite::Qsvt => Some(MatrixKind::General),
            Suite::Scaling | Suite::ApproxTable => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixKind {
    Unitary,
    Hermitian,
    General,
}

fn default_dimension() -> usize {
    2
}

fn default_trials() -> usize {
    1
}

/// One experiment. Seeds `seed, seed + 1, …, seed + trials − 1` each draw one
/// random matrix per `d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub suite: Suite,
    pub function: String,
    #[serde(default)]
    pub params: Params,
    pub d_list: Vec<usize>,
    /// Defaults to the kind the suite needs; any other kind is rejected.
    #[serde(default)]
    pub matrix: Option<MatrixKind>,
    /// Rows of the random matrix (and columns, unless `columns` is given).
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    #[serde(default)]
    pub columns: Option<usize>,
    /// Operator norm of random Hermitian and general matrices.
    #[serde(default)]
    pub norm: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// CSV path; the JSON summary goes next to it.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Points of the sup-norm grid used by `UB_d` and `‖f − f_d‖`.
    #[serde(default)]
    pub grid: Option<usize>,
    /// Replaces the additive slack of every per-row contract.
    #[serde(default)]
    pub tolerance: Option<f64>,
}

/// Largest dimension of a random matrix; the circuits are dense.
pub const MAX_DIMENSION: usize = 16;

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let config: Self = serde_json::from_str(text).map_err(|e| CliError::MalformedConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::MalformedConfig(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Shape checks that need no catalog lookup.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::MalformedConfig(msg));
        if self.d_list.is_empty() {
            return bad("d_list is empty".into());
        }
        if let Some(&d) = self.d_list.iter().find(|&&d| d < 2 || !d.is_power_of_two()) {
            return bad(format!("d = {d} is not a power of two ≥ 2"));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.dimension == 0 || self.columns == Some(0) {
            return bad("matrix dimensions must be positive".into());
        }
        if self.dimension.max(self.columns.unwrap_or(0)) > MAX_DIMENSION {
            return bad(format!("matrix dimensions above {MAX_DIMENSION} are not supported"));
        }
        if let Some(norm) = self.norm {
            if !(norm > 0.0 && norm < 1.0) {
                return bad(format!("norm {norm} must lie in (0, 1)"));
            }
        }
        if let Some(grid) = self.grid {
            let d_max = *self.d_list.iter().max().expect("non-empty");
            if !grid.is_power_of_two() || grid < 48 * 3 * d_max {
                return bad(format!("grid {grid} must be a power of two ≥ 144·max d = {}", 144 * d_max));
            }
        }
        if let Some(tol) = self.tolerance {
            if !(tol >= 0.0 && tol.is_finite()) {
                return bad(format!("tolerance {tol} must be finite and nonnegative"));
            }
        }
        if self.params.values().any(|v| !v.is_finite()) {
            return bad("parameters must be finite".into());
        }
        Ok(())
    }

    /// Seeds of the trials, in output order.
    pub fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.trials as u64).map(move |i| self.seed.wrapping_add(i))
    }

    /// Where the CSV goes: `output`, else `$QSP_OUT_DIR/<suite>-<function>.csv`,
    /// else the same name in the working directory.
    pub fn csv_path(&self) -> PathBuf {
        match &self.output {
            Some(path) => path.clone(),
            None => {
                let dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
                dir.join(format!("{}-{}.csv", self.suite.name(), self.function))
            }
        }
    }
}
