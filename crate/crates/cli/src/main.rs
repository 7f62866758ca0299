//! `ldtail` command line: simulation, estimation on CSV data, marginal tail
//! fits, seeded experiment studies, and rate-function grid emission.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerically
//! degenerate input, 5 internal error.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ldtail::estimators::{estimate, EstimateReport, EstimatorConfig, FittedQuantileMap};
use ldtail::events::EventSpec;
use ldtail::experiments::{run_study, StudyConfig, StudyReport};
use ldtail::marginal::{default_k2, fit_log_gw, k_sequence, quantile_hat, LogGwTailFit};
use ldtail::ratefn::NormalRateModel;
use ldtail::simulate::{simulate, MarginalScale, SimConfig};
use ldtail::transform::{rank_transform, Sample};

const EXIT_CONFIG: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_NUMERIC: u8 = 4;
const EXIT_INTERNAL: u8 = 5;

#[derive(Parser)]
#[command(name = "ldtail", version, about = "Estimation of very small tail probabilities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MarginalKind {
    Normal,
    Exponential,
    Pareto,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a seeded sample from the equicorrelated model and write it as CSV.
    Simulate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 0.5)]
        rho: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Substream index; different values give independent samples.
        #[arg(long, default_value_t = 0)]
        realisation: u64,
        #[arg(long, value_enum, default_value_t = MarginalKind::Exponential)]
        marginal: MarginalKind,
        /// Pareto tail index (only used with --marginal pareto).
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the probability of an event from a CSV sample.
    Estimate {
        #[arg(long)]
        data: PathBuf,
        /// Event specification (JSON).
        #[arg(long)]
        event: PathBuf,
        /// Second-largest marginal fit order; "auto" = ceil((log n)^2).
        #[arg(long, default_value = "auto")]
        k2: String,
        #[arg(long, default_value_t = 2.0)]
        iota: f64,
        /// Threshold count; 0 = auto (ceil(n^0.3)).
        #[arg(long, default_value_t = 0)]
        k_n: usize,
        #[arg(long, default_value_t = 1.0)]
        xi: f64,
        #[arg(long)]
        vartheta: Option<f64>,
        /// Output JSON path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the marginal tail model to each column of a CSV sample.
    MarginalFit {
        #[arg(long)]
        data: PathBuf,
        /// Fit only the named column.
        #[arg(long)]
        column: Option<String>,
        #[arg(long, default_value = "auto")]
        k2: String,
        #[arg(long, default_value_t = 2.0)]
        iota: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a simulation study described by a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Cap the study at 100 realisations.
        #[arg(long)]
        fast: bool,
        /// Report JSON path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the per-cell table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Emit the bivariate rate function and corner exponent on a grid.
    Ratefn {
        #[arg(long)]
        rho: f64,
        /// Points per axis over [0, 3].
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: message.into() }
    }

    fn data(message: impl Into<String>) -> Self {
        Self { code: EXIT_DATA, message: message.into() }
    }
}

impl From<ldtail::Error> for CliError {
    fn from(e: ldtail::Error) -> Self {
        use ldtail::Error::*;
        let code = match &e {
            InvalidConfig(_) | DimensionMismatch { .. } => EXIT_CONFIG,
            Data(_) | Io(_) => EXIT_DATA,
            Domain(_) | DegenerateSpacing(_) | MonotonicityViolation | EmptyEvent => {
                EXIT_NUMERIC
            }
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::config(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::data(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(if e.code == 0 { EXIT_INTERNAL } else { e.code })
        }
    }
}

/// Write bytes to `out`, or to stdout when no path is given.
fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

/// Read a CSV sample: header row required, rows containing non-numeric,
/// non-finite, or missing cells are dropped. Returns the sample and the
/// number of dropped rows.
fn ingest_csv(path: &Path) -> Result<(Sample, usize), CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)?;
    let names: Vec<String> = reader
        .headers()?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    if names.is_empty() {
        return Err(CliError::data(format!("{}: no columns", path.display())));
    }
    let mut rows = Vec::new();
    let mut dropped = 0usize;
    for record in reader.records() {
        let record = record?;
        let parsed: Option<Vec<f64>> = if record.len() == names.len() {
            record
                .iter()
                .map(|cell| cell.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
                .collect()
        } else {
            None
        };
        match parsed {
            Some(row) => rows.push(row),
            None => dropped += 1,
        }
    }
    if rows.is_empty() {
        return Err(CliError::data(format!(
            "{}: no numeric rows after filtering ({dropped} dropped)",
            path.display()
        )));
    }
    Ok((Sample::new(rows, names)?, dropped))
}

fn parse_k2(k2: &str, n: usize) -> Result<usize, CliError> {
    if k2 == "auto" {
        Ok(default_k2(n))
    } else {
        k2.parse()
            .map_err(|_| CliError::config(format!("--k2 must be \"auto\" or an integer, got {k2:?}")))
    }
}

fn auto_k_n(k_n: usize, n: usize) -> usize {
    if k_n == 0 {
        (n as f64).powf(0.3).ceil() as usize
    } else {
        k_n
    }
}

#[derive(serde::Serialize)]
struct MarginFitOut {
    column: String,
    n: usize,
    k0: usize,
    k1: usize,
    k2: usize,
    theta_hat: f64,
    g_hat: f64,
    anchor: f64,
    y_n: f64,
    /// Extrapolated quantile at twice the anchor depth.
    q_at_2yn: f64,
}

fn fit_out(name: &str, fit: &LogGwTailFit, marg: &ldtail::marginal::SortedMarginal) -> MarginFitOut {
    MarginFitOut {
        column: name.to_string(),
        n: marg.n(),
        k0: fit.kseq.k0,
        k1: fit.kseq.k1,
        k2: fit.kseq.k2,
        theta_hat: fit.theta_hat,
        g_hat: fit.g_hat,
        anchor: fit.anchor,
        y_n: fit.y_n,
        q_at_2yn: quantile_hat(fit, marg, 2.0 * fit.y_n),
    }
}

#[derive(serde::Serialize)]
struct CliEstimateReport {
    /// Headline probability estimate (first scaling estimator).
    estimate: f64,
    ell_plus: f64,
    ell_used: f64,
    count_at_ell: usize,
    dropped_rows: usize,
    margins: Vec<MarginFitOut>,
    detail: EstimateReport,
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate { n, dim, rho, seed, realisation, marginal, alpha, out } => {
            let marginal = match marginal {
                MarginalKind::Normal => MarginalScale::Normal,
                MarginalKind::Exponential => MarginalScale::Exponential,
                MarginalKind::Pareto => MarginalScale::Pareto { alpha },
            };
            let cfg = SimConfig { n, dim, rho, seed, marginal };
            let sample = simulate(&cfg, realisation)?;
            let mut writer = csv::Writer::from_writer(Vec::new());
            writer.write_record(sample.column_names())?;
            for row in sample.rows() {
                writer.write_record(row.iter().map(|v| v.to_string()))?;
            }
            let bytes = writer
                .into_inner()
                .map_err(|e| CliError::data(e.to_string()))?;
            emit(out.as_deref(), &bytes)
        }
        Command::Estimate { data, event, k2, iota, k_n, xi, vartheta, out } => {
            let spec: EventSpec = serde_json::from_slice(&fs::read(&event)?)?;
            let (sample, dropped_rows) = ingest_csv(&data)?;
            let n = sample.n();
            let kseq = k_sequence(n, parse_k2(&k2, n)?, iota)?;
            let mut fits = Vec::new();
            let mut margs = Vec::new();
            for j in 0..sample.m() {
                let marg = sample.sorted_marginal(j)?;
                fits.push(fit_log_gw(&marg, &kseq)?);
                margs.push(marg);
            }
            let names = sample.column_names().to_vec();
            let pseudo = rank_transform(&sample)?;
            let q_map = FittedQuantileMap::new(fits, margs)?;
            let cfg = EstimatorConfig {
                xi,
                vartheta,
                ..EstimatorConfig::new(auto_k_n(k_n, n))
            };
            let detail = estimate(&pseudo, &spec, &q_map, &cfg)?;
            let margins = names
                .iter()
                .enumerate()
                .map(|(j, name)| fit_out(name, q_map.fit(j), q_map.marginal(j)))
                .collect();
            let report = CliEstimateReport {
                estimate: detail.pi_ldp_i,
                ell_plus: detail.ell_plus,
                ell_used: detail.ell_n,
                count_at_ell: (detail.p_hat_at_ell * detail.n as f64).round() as usize,
                dropped_rows,
                margins,
                detail,
            };
            let mut bytes = serde_json::to_vec_pretty(&report)?;
            bytes.push(b'\n');
            emit(out.as_deref(), &bytes)?;
            if out.is_some() {
                println!(
                    "{:<14} {:>12.6e}\n{:<14} {:>12.6}\n{:<14} {:>12}\n{:<14} {:>12}",
                    "estimate",
                    report.estimate,
                    "ell_plus",
                    report.ell_plus,
                    "count_at_ell",
                    report.count_at_ell,
                    "dropped_rows",
                    report.dropped_rows,
                );
            }
            Ok(())
        }
        Command::MarginalFit { data, column, k2, iota, out } => {
            let (sample, _) = ingest_csv(&data)?;
            let n = sample.n();
            let kseq = k_sequence(n, parse_k2(&k2, n)?, iota)?;
            let mut outputs = Vec::new();
            for j in 0..sample.m() {
                let name = &sample.column_names()[j];
                if let Some(wanted) = &column {
                    if wanted != name {
                        continue;
                    }
                }
                let marg = sample.sorted_marginal(j)?;
                let fit = fit_log_gw(&marg, &kseq)?;
                outputs.push(fit_out(name, &fit, &marg));
            }
            if outputs.is_empty() {
                return Err(CliError::config(format!(
                    "column {:?} not found",
                    column.as_deref().unwrap_or("")
                )));
            }
            let mut bytes = serde_json::to_vec_pretty(&outputs)?;
            bytes.push(b'\n');
            emit(out.as_deref(), &bytes)
        }
        Command::Experiment { config, fast, out, csv: csv_out } => {
            let mut cfg: StudyConfig = serde_json::from_slice(&fs::read(&config)?)?;
            if fast {
                cfg.realisations = cfg.realisations.min(100);
            }
            let report = run_study(&cfg)?;
            let mut bytes = serde_json::to_vec_pretty(&report)?;
            bytes.push(b'\n');
            emit(out.as_deref(), &bytes)?;
            if let Some(path) = csv_out {
                fs::write(path, study_csv(&report)?)?;
            }
            Ok(())
        }
        Command::Ratefn { rho, grid, out } => {
            if grid < 2 {
                return Err(CliError::config("--grid must be at least 2"));
            }
            let model = NormalRateModel::bivariate(rho)?;
            let mut writer = csv::Writer::from_writer(Vec::new());
            writer.write_record(["x1", "x2", "I", "kappa"])?;
            for i in 0..grid {
                for j in 0..grid {
                    let x1 = 3.0 * i as f64 / (grid - 1) as f64;
                    let x2 = 3.0 * j as f64 / (grid - 1) as f64;
                    let rate = model.rate(&[x1, x2])?;
                    let kappa = model.kappa(x1, x2)?;
                    writer.write_record(
                        [x1, x2, rate, kappa].iter().map(|v| v.to_string()),
                    )?;
                }
            }
            let bytes = writer
                .into_inner()
                .map_err(|e| CliError::data(e.to_string()))?;
            emit(out.as_deref(), &bytes)
        }
    }
}

fn study_csv(report: &StudyReport) -> Result<Vec<u8>, CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record([
        "x",
        "method",
        "tau",
        "truth",
        "n_realisations",
        "excluded",
        "rmse_log",
        "bias_log",
        "variance_log",
        "median_abs_rel_err",
    ])?;
    for cell in &report.cells {
        writer.write_record([
            cell.x.to_string(),
            cell.method.clone(),
            cell.tau.map(|t| t.to_string()).unwrap_or_default(),
            cell.truth.to_string(),
            cell.n_realisations.to_string(),
            cell.excluded.to_string(),
            cell.rmse_log.to_string(),
            cell.bias_log.to_string(),
            cell.variance_log.to_string(),
            cell.median_abs_rel_err
                .map(|m| m.to_string())
                .unwrap_or_default(),
        ])?;
    }
    writer
        .into_inner()
        .map_err(|e| CliError::data(e.to_string()))
}
