//! Config-driven simulation studies: the comparative RMSE benchmark of the
//! scaling estimators against the classical shift estimators, a survival
//! function grid, a consistency ladder over growing sample sizes, and a
//! small utility for counting separated exceedance events in time series.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{estimate, EstimateReport, EstimatorConfig};
use crate::events::{EventSpec, IdentityMap, MarginMap};
use crate::simulate::{corner_exact_prob, simulate, MarginalScale, SimConfig};
use crate::special::std_normal_quantile;
use crate::transform::{rank_transform, PseudoSample, Sample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Comparative,
    SurvivalGrid,
    Consistency,
}

/// Declarative description of one study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyConfig {
    pub scenario: Scenario,
    pub n: usize,
    /// Sample-size ladder for the consistency scenario; defaults to `[n]`.
    #[serde(default)]
    pub n_ladder: Option<Vec<usize>>,
    /// Anchor count; 0 selects `ceil(n^0.3)` per ladder step.
    pub k_n: usize,
    #[serde(default = "default_xi")]
    pub xi: f64,
    pub rho: f64,
    /// First halfspace coefficient per cell (the second is fixed at 1).
    #[serde(default = "default_a1_list")]
    pub a1_list: Vec<f64>,
    pub realisations: usize,
    pub seed: u64,
    /// Event scalings for the consistency scenario.
    #[serde(default)]
    pub tau_list: Option<Vec<f64>>,
}

fn default_xi() -> f64 {
    1.0
}

fn default_a1_list() -> Vec<f64> {
    vec![1.0, 0.5, 0.1, 0.0, -0.1, -0.5]
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.realisations == 0 {
            return Err(Error::InvalidConfig("realisations must be at least 1".into()));
        }
        if self.n < 4 {
            return Err(Error::InvalidConfig("sample size too small".into()));
        }
        if self.scenario == Scenario::Consistency && self.tau_list.as_deref().map_or(true, |t| t.is_empty()) {
            return Err(Error::InvalidConfig(
                "consistency scenario needs a nonempty tau_list".into(),
            ));
        }
        Ok(())
    }
}

/// One aggregated cell of a study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellReport {
    /// Cell coordinate: `a1`, threshold ratio, or sample size.
    pub x: f64,
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    pub truth: f64,
    pub n_realisations: usize,
    /// Realisations excluded because the estimate was zero.
    pub excluded: usize,
    pub rmse_log: f64,
    pub bias_log: f64,
    pub variance_log: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub median_abs_rel_err: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyReport {
    pub scenario: Scenario,
    pub seed: u64,
    pub cells: Vec<CellReport>,
}

/// Aggregate log-scale errors of one cell; zero estimates are excluded and
/// counted.
fn aggregate_cell(
    x: f64,
    method: &str,
    tau: Option<f64>,
    truth: f64,
    estimates: &[f64],
) -> CellReport {
    let logs: Vec<f64> = estimates
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p.ln())
        .collect();
    let excluded = estimates.len() - logs.len();
    let log_truth = truth.ln();
    let m = logs.len() as f64;
    let (bias, rmse2, var, median) = if logs.is_empty() {
        (f64::NAN, f64::NAN, f64::NAN, None)
    } else {
        let bias = logs.iter().map(|l| l - log_truth).sum::<f64>() / m;
        let rmse2 = logs.iter().map(|l| (l - log_truth).powi(2)).sum::<f64>() / m;
        let mean = logs.iter().sum::<f64>() / m;
        let var = logs.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / m;
        let mut errs: Vec<f64> = logs.iter().map(|l| (l / log_truth - 1.0).abs()).collect();
        errs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = if errs.len() % 2 == 1 {
            errs[errs.len() / 2]
        } else {
            0.5 * (errs[errs.len() / 2 - 1] + errs[errs.len() / 2])
        };
        (bias, rmse2, var, Some(median))
    };
    CellReport {
        x,
        method: method.to_string(),
        tau,
        truth,
        n_realisations: estimates.len(),
        excluded,
        rmse_log: rmse2.sqrt(),
        bias_log: bias,
        variance_log: var,
        median_abs_rel_err: median,
    }
}

fn exponential_sample(cfg: &StudyConfig, n: usize, realisation: u64) -> Result<Sample> {
    let sim = SimConfig {
        n,
        dim: 2,
        rho: cfg.rho,
        seed: cfg.seed,
        marginal: MarginalScale::Exponential,
    };
    simulate(&sim, realisation)
}

/// Rank-based pseudo-observations of one simulated realisation.
fn ranked_sample(cfg: &StudyConfig, n: usize, realisation: u64) -> Result<PseudoSample> {
    rank_transform(&exponential_sample(cfg, n, realisation)?)
}

/// Exact exponential-scale observations of one simulated realisation.
fn exact_sample(cfg: &StudyConfig, n: usize, realisation: u64) -> Result<PseudoSample> {
    Ok(PseudoSample::from_exact(
        exponential_sample(cfg, n, realisation)?.rows().to_vec(),
    ))
}

fn run_one(
    pseudo: &PseudoSample,
    event: &EventSpec,
    k_n: usize,
    xi: f64,
) -> Result<EstimateReport> {
    let est_cfg = EstimatorConfig {
        xi,
        ..EstimatorConfig::new(k_n)
    };
    estimate(pseudo, event, &IdentityMap, &est_cfg)
}

/// Comparative benchmark: halfspace events calibrated to a common exact
/// probability of 4e-8, scanned over the first halfspace coefficient.
pub fn run_comparative(cfg: &StudyConfig) -> Result<StudyReport> {
    cfg.validate()?;
    const TRUTH: f64 = 4e-8;
    // -quantile(p) is more accurate than quantile(1 - p) in the far tail
    let z = -std_normal_quantile(TRUTH)?;
    let events: Vec<(f64, EventSpec)> = cfg
        .a1_list
        .iter()
        .map(|&a1| {
            let sigma = (a1 * a1 + 1.0 + 2.0 * cfg.rho * a1).sqrt();
            (
                a1,
                EventSpec::halfspace(vec![a1, 1.0], sigma * z, MarginMap::NormalOfExp),
            )
        })
        .collect();
    // one sample per realisation, shared across cells
    let per_realisation: Vec<Vec<(f64, f64, f64)>> = (0..cfg.realisations as u64)
        .into_par_iter()
        .map(|r| {
            // estimators see only the rank transform, as on real data
            let pseudo = ranked_sample(cfg, cfg.n, r)?;
            events
                .iter()
                .map(|(_, event)| {
                    let rep = run_one(&pseudo, event, cfg.k_n, cfg.xi)?;
                    Ok((
                        rep.pi_ldp_i,
                        rep.pi_classical.unwrap_or(0.0),
                        rep.pi_classical_rtd.unwrap_or(0.0),
                    ))
                })
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;
    let mut cells = Vec::new();
    for (ci, (a1, _)) in events.iter().enumerate() {
        let col = |pick: fn(&(f64, f64, f64)) -> f64| -> Vec<f64> {
            per_realisation.iter().map(|row| pick(&row[ci])).collect()
        };
        cells.push(aggregate_cell(*a1, "pi_ldp_i", None, TRUTH, &col(|t| t.0)));
        cells.push(aggregate_cell(*a1, "pi_classical", None, TRUTH, &col(|t| t.1)));
        cells.push(aggregate_cell(*a1, "pi_classical_rtd", None, TRUTH, &col(|t| t.2)));
    }
    Ok(StudyReport {
        scenario: Scenario::Comparative,
        seed: cfg.seed,
        cells,
    })
}

/// Survival-function grid: corner events with the larger threshold fixed at
/// `1.5 log n` and the ratio of thresholds scanned over 0.05, ..., 0.50.
pub fn run_survival_grid(cfg: &StudyConfig) -> Result<StudyReport> {
    cfg.validate()?;
    let x2 = 1.5 * (cfg.n as f64).ln();
    let ratios: Vec<f64> = (1..=10).map(|i| 0.05 * i as f64).collect();
    let events: Vec<(f64, EventSpec, f64)> = ratios
        .iter()
        .map(|&r| {
            let x1 = r * x2;
            Ok((r, EventSpec::corner(vec![x1, x2]), corner_exact_prob(cfg.rho, x1, x2)?))
        })
        .collect::<Result<_>>()?;
    let per_realisation: Vec<Vec<f64>> = (0..cfg.realisations as u64)
        .into_par_iter()
        .map(|r| {
            // the survival benchmark works with the exact exponential scale
            let pseudo = exact_sample(cfg, cfg.n, r)?;
            events
                .iter()
                .map(|(_, event, _)| Ok(run_one(&pseudo, event, cfg.k_n, cfg.xi)?.pi_ldp_i))
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;
    let cells = events
        .iter()
        .enumerate()
        .map(|(ci, (ratio, _, truth))| {
            let col: Vec<f64> = per_realisation.iter().map(|row| row[ci]).collect();
            aggregate_cell(*ratio, "pi_ldp_i", None, *truth, &col)
        })
        .collect();
    Ok(StudyReport {
        scenario: Scenario::SurvivalGrid,
        seed: cfg.seed,
        cells,
    })
}

/// Consistency ladder: events shrink like a fixed power of the sample size
/// while `n` grows, tracking the relative error of the log estimate.
pub fn run_consistency(cfg: &StudyConfig) -> Result<StudyReport> {
    cfg.validate()?;
    let taus = cfg.tau_list.clone().unwrap_or_default();
    let ladder = cfg.n_ladder.clone().unwrap_or_else(|| vec![cfg.n]);
    let sigma = (2.0 + 2.0 * cfg.rho).sqrt();
    let mut cells = Vec::new();
    for &n in &ladder {
        let k_n = if cfg.k_n == 0 {
            (n as f64).powf(0.3).ceil() as usize
        } else {
            cfg.k_n
        };
        let events: Vec<(f64, EventSpec, f64)> = taus
            .iter()
            .map(|&tau| {
                // event probability decays like n^(-1.5 tau)
                let truth = (n as f64).powf(-1.5 * tau);
                let c = sigma * -std_normal_quantile(truth)?;
                Ok((
                    tau,
                    EventSpec::halfspace(vec![1.0, 1.0], c, MarginMap::NormalOfExp),
                    truth,
                ))
            })
            .collect::<Result<_>>()?;
        let per_realisation: Vec<Vec<f64>> = (0..cfg.realisations as u64)
            .into_par_iter()
            .map(|r| {
                let pseudo = ranked_sample(cfg, n, r)?;
                events
                    .iter()
                    .map(|(_, event, _)| Ok(run_one(&pseudo, event, k_n, cfg.xi)?.pi_ldp_i))
                    .collect::<Result<_>>()
            })
            .collect::<Result<_>>()?;
        for (ci, (tau, _, truth)) in events.iter().enumerate() {
            let col: Vec<f64> = per_realisation.iter().map(|row| row[ci]).collect();
            cells.push(aggregate_cell(n as f64, "pi_ldp_i", Some(*tau), *truth, &col));
        }
    }
    Ok(StudyReport {
        scenario: Scenario::Consistency,
        seed: cfg.seed,
        cells,
    })
}

/// Dispatch on the configured scenario.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyReport> {
    match cfg.scenario {
        Scenario::Comparative => run_comparative(cfg),
        Scenario::SurvivalGrid => run_survival_grid(cfg),
        Scenario::Consistency => run_consistency(cfg),
    }
}

/// Number of exceedance clusters in a time-ordered flag sequence, merging
/// clusters separated by at most `min_gap` quiet observations.
pub fn count_separated_events(flags: &[bool], min_gap: usize) -> usize {
    let mut clusters = 0usize;
    let mut last_true: Option<usize> = None;
    for (i, &f) in flags.iter().enumerate() {
        if !f {
            continue;
        }
        match last_true {
            Some(j) if i - j - 1 <= min_gap => {}
            _ => clusters += 1,
        }
        last_true = Some(i);
    }
    clusters
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_cfg(scenario: Scenario) -> StudyConfig {
        StudyConfig {
            scenario,
            n: 500,
            n_ladder: None,
            k_n: 10,
            xi: 1.0,
            rho: 0.5,
            a1_list: vec![1.0],
            realisations: 3,
            seed: 1234,
            tau_list: None,
        }
    }

    #[test]
    fn count_separated_events_rules() {
        assert_eq!(count_separated_events(&[false; 10], 5), 0);
        assert_eq!(count_separated_events(&[true, false, true], 1), 1);
        assert_eq!(count_separated_events(&[true, false, false, true], 1), 2);
        // 18 clusters of flags, clusters separated by 9 quiet slots
        let mut flags = Vec::new();
        for c in 0..18 {
            let width = if c < 5 { 3 } else { 2 }; // 41 true flags in total
            flags.extend(std::iter::repeat(true).take(width));
            flags.extend(std::iter::repeat(false).take(9));
        }
        assert_eq!(flags.iter().filter(|&&f| f).count(), 41);
        assert_eq!(count_separated_events(&flags, 8), 18);
        // widening the merge window below the separation changes nothing
        assert_eq!(count_separated_events(&flags, 9), 1);
    }

    #[test]
    fn aggregation_identity_and_exclusions() {
        let cell = aggregate_cell(1.0, "m", None, 1e-6, &[1e-5, 1e-7, 0.0, 2e-6]);
        assert_eq!(cell.n_realisations, 4);
        assert_eq!(cell.excluded, 1);
        let lhs = cell.rmse_log * cell.rmse_log;
        let rhs = cell.bias_log * cell.bias_log + cell.variance_log;
        assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
        // single realisation: rmse equals |bias|
        let cell = aggregate_cell(1.0, "m", None, 1e-6, &[3e-6]);
        assert!((cell.rmse_log - cell.bias_log.abs()).abs() < 1e-14);
    }

    #[test]
    fn survival_grid_small_run() {
        let cfg = base_cfg(Scenario::SurvivalGrid);
        let report = run_study(&cfg).unwrap();
        assert_eq!(report.cells.len(), 10);
        for cell in &report.cells {
            assert!(cell.truth > 0.0 && cell.truth < 1.0);
            assert!(cell.rmse_log.is_finite());
            assert!(
                cell.rmse_log + 1e-12 >= cell.bias_log.abs(),
                "rmse {} < |bias| {}",
                cell.rmse_log,
                cell.bias_log
            );
        }
        // ratio 0.50 truth pins the oracle
        let x2 = 1.5 * (cfg.n as f64).ln();
        let expected = corner_exact_prob(cfg.rho, 0.5 * x2, x2).unwrap();
        assert_eq!(report.cells.last().unwrap().truth, expected);
    }

    #[test]
    fn comparative_small_run_is_reproducible() {
        let cfg = StudyConfig {
            n: 400,
            realisations: 2,
            a1_list: vec![1.0, 0.0],
            ..base_cfg(Scenario::Comparative)
        };
        let a = run_study(&cfg).unwrap();
        let b = run_study(&cfg).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert_eq!(a.cells.len(), 6); // 2 cells x 3 methods
        for cell in &a.cells {
            assert_eq!(cell.truth, 4e-8);
        }
    }

    #[test]
    fn consistency_needs_taus_and_realisations() {
        let cfg = base_cfg(Scenario::Consistency);
        assert!(run_study(&cfg).is_err());
        let cfg = StudyConfig {
            realisations: 0,
            tau_list: Some(vec![1.0]),
            ..base_cfg(Scenario::Consistency)
        };
        assert!(run_study(&cfg).is_err());
        let cfg = StudyConfig {
            tau_list: Some(vec![1.0]),
            k_n: 0, // auto: ceil(500^0.3) = 7
            ..base_cfg(Scenario::Consistency)
        };
        let report = run_study(&cfg).unwrap();
        assert_eq!(report.cells.len(), 1);
        assert!(report.cells[0].median_abs_rel_err.is_some());
    }

    #[test]
    fn study_config_json_roundtrip() {
        let raw = r#"{"scenario":"comparative","n":5000,"k_n":20,"rho":0.5,"realisations":200,"seed":7}"#;
        let cfg: StudyConfig = serde_json::from_str(raw).unwrap();
        assert_eq!(cfg.xi, 1.0);
        assert_eq!(cfg.a1_list.len(), 6);
        let json = serde_json::to_string(&cfg).unwrap();
        let back: StudyConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back.scenario, Scenario::Comparative);
    }
}
