//! `afqsp run --config <path>` runs one verification suite and writes a CSV
//! plus a JSON summary. `afqsp table` prints the approximation table of a
//! catalog function.
//!
//! Exit status: 0 when every row passes, 1 on a failed contract, 2 on a
//! malformed config, 3 on an unknown function, 4 on an unsupported
//! suite/function/matrix combination, 5 on any other error.

mod config;
mod error;
mod output;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use afqsp_core::functions::Params;
use clap::{Parser, Subcommand, ValueEnum};

use config::ExperimentConfig;
use error::CliError;
use output::{summary_path, to_csv, to_json, write_all, Summary};
use suites::{approx_table_report, run_suite, SuiteOutput};

#[derive(Parser)]
#[command(name = "afqsp", version, about = "Angle-free QSP experiments on dense simulated circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suite described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// ‖f − f_d‖, UB_d and the Chebyshev comparison for each d.
    Table {
        #[arg(long)]
        function: String,
        /// Comma-separated powers of two.
        #[arg(long, value_delimiter = ',', required = true)]
        d: Vec<usize>,
        /// `name=value`; repeat for several parameters.
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, f64)>,
        #[arg(long)]
        grid: Option<usize>,
        /// Write here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("`{s}` is not name=value"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("`{v}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn run(path: &PathBuf) -> Result<Summary, CliError> {
    let config = ExperimentConfig::load(path)?;
    let result = run_suite(&config)?;
    let csv_path = config.csv_path();
    let (csv, json) = match &result {
        SuiteOutput::Rows(r) => (to_csv(&r.rows)?, to_json(r)?),
        SuiteOutput::Table(r) => (to_csv(&r.rows)?, to_json(r)?),
    };
    write_all(&[(summary_path(&csv_path), json), (csv_path.clone(), csv)])?;
    let summary = result.summary().clone();
    eprintln!(
        "{}: {} passed, {} failed -> {}",
        summary.suite,
        summary.pass_count,
        summary.fail_count,
        csv_path.display()
    );
    summary.into_result()
}

fn table(
    function: &str,
    d: &[usize],
    params: Vec<(String, f64)>,
    grid: Option<usize>,
    out: Option<PathBuf>,
    format: Format,
) -> Result<Summary, CliError> {
    let params: Params = params.into_iter().collect();
    // The table shares the config checks of the approx-table suite.
    let config = ExperimentConfig {
        suite: config::Suite::ApproxTable,
        function: function.to_string(),
        params: params.clone(),
        d_list: d.to_vec(),
        matrix: None,
        dimension: 2,
        columns: None,
        norm: None,
        seed: 0,
        trials: 1,
        output: out.clone(),
        grid,
        tolerance: None,
    };
    config.validate()?;
    let report = approx_table_report(function, &params, d, grid, None)?;
    let text = match format {
        Format::Csv => to_csv(&report.rows)?,
        Format::Json => to_json(&report)?,
    };
    match out {
        Some(path) => write_all(&[(path, text)])?,
        None => print!("{text}"),
    }
    report.summary.into_result()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => run(&config),
        Command::Table { function, d, params, grid, out, format } => table(&function, &d, params, grid, out, format),
    };
    match result {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("afqsp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
