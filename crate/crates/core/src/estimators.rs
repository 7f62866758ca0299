//! Tail probability estimators driven by ray scaling of exponential-scale
//! pseudo-observations.
//!
//! The scaling estimators stretch each pseudo-observation along its ray
//! until it enters the event, read off the empirical quantile of those
//! critical scales, and extrapolate through the homogeneity of the
//! underlying rate function. A classical additive-shift estimator and its
//! residual-tail-dependence correction are included for comparison.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{critical_scale, critical_scale_grid, EventSpec, PointMap, ScaleSearch};
use crate::marginal::{LogGwTailFit, SortedMarginal};
use crate::transform::{q_hat_map, PseudoSample};

/// [`PointMap`] that applies the fitted marginal quantile estimators
/// coordinatewise, mapping exponential scale back to data space.
pub struct FittedQuantileMap {
    fits: Vec<LogGwTailFit>,
    margs: Vec<SortedMarginal>,
}

impl FittedQuantileMap {
    pub fn new(fits: Vec<LogGwTailFit>, margs: Vec<SortedMarginal>) -> Result<Self> {
        if fits.len() != margs.len() || fits.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: fits.len(),
                actual: margs.len(),
            });
        }
        Ok(Self { fits, margs })
    }

    pub fn dim(&self) -> usize {
        self.fits.len()
    }

    pub fn fit(&self, j: usize) -> &LogGwTailFit {
        &self.fits[j]
    }

    pub fn marginal(&self, j: usize) -> &SortedMarginal {
        &self.margs[j]
    }
}

impl PointMap for FittedQuantileMap {
    fn apply(&self, y: &[f64]) -> Vec<f64> {
        q_hat_map(&self.fits, &self.margs, y).expect("dimension fixed at construction")
    }
}

/// Configuration of the estimators.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Number of tail points anchoring the empirical probability level.
    pub k_n: usize,
    /// Exponent of the anchor level `(k/n)^xi` for the upper scale estimate.
    #[serde(default = "default_xi")]
    pub xi: f64,
    /// Exponent for the lower scale estimate; defaults to `xi`.
    #[serde(default)]
    pub vartheta: Option<f64>,
    #[serde(skip, default)]
    pub scale_search: ScaleSearch,
    /// Grid size of the fallback scan used for non-monotone points.
    #[serde(default = "default_fallback_grid")]
    pub fallback_grid: usize,
    /// Upper bound of the additive-shift search for the classical estimator.
    #[serde(default = "default_shift_max")]
    pub shift_max: f64,
}

fn default_xi() -> f64 {
    1.0
}

fn default_fallback_grid() -> usize {
    4096
}

fn default_shift_max() -> f64 {
    60.0
}

impl EstimatorConfig {
    pub fn new(k_n: usize) -> Self {
        Self {
            k_n,
            xi: default_xi(),
            vartheta: None,
            scale_search: ScaleSearch::default(),
            fallback_grid: default_fallback_grid(),
            shift_max: default_shift_max(),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.k_n == 0 || self.k_n >= n {
            return Err(Error::InvalidConfig(format!(
                "k_n must satisfy 1 <= k_n < n, got k_n = {} with n = {n}",
                self.k_n
            )));
        }
        if !(self.xi > 0.0 && self.xi <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "xi must lie in (0, 1], got {}",
                self.xi
            )));
        }
        let vt = self.vartheta.unwrap_or(self.xi);
        if !(vt > 0.0 && vt <= self.xi) {
            return Err(Error::InvalidConfig(format!(
                "vartheta must lie in (0, xi], got {vt} with xi = {}",
                self.xi
            )));
        }
        self.scale_search.validate()
    }
}

/// Full estimation report; all probability estimates refer to the same
/// event and sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateReport {
    pub n: usize,
    pub k_n: usize,
    pub xi: f64,
    pub vartheta: f64,
    /// Upper scale estimate: order statistic of the per-point critical scales.
    pub ell_plus: f64,
    pub ell_minus: f64,
    /// Scale used by the second estimator (defaults to `ell_plus`).
    pub ell_n: f64,
    /// Empirical probability of the event after contraction by `ell_n`.
    pub p_hat_at_ell: f64,
    /// First scaling estimator `(k/n)^(xi / ell_plus)`.
    pub pi_ldp_i: f64,
    /// Second scaling estimator `p_hat^(1 / ell_n)`.
    pub pi_ldp_ii: f64,
    /// Additive shift putting `k_n` points inside the event, if attainable.
    pub lambda_n: Option<f64>,
    /// Classical estimator `(k/n) exp(-lambda_n)`.
    pub pi_classical: Option<f64>,
    /// Residual tail dependence coefficient (Hill on the coordinate minimum).
    pub eta_hat: f64,
    /// Classical estimator corrected by `eta_hat`: `(k/n) exp(-lambda_n / eta_hat)`.
    pub pi_classical_rtd: Option<f64>,
    /// Points still inside the event at the top of the scale range.
    pub saturated_points: usize,
    /// Points whose membership was not monotone along the ray (grid fallback).
    pub nonmonotone_points: usize,
}

/// Per-point critical scales for the whole pseudo-sample.
#[derive(Debug, Clone)]
pub struct CriticalScales {
    pub values: Vec<f64>,
    pub saturated: usize,
    pub nonmonotone: usize,
}

/// Compute every point's critical scale, falling back to a grid scan for
/// points whose membership pattern is not monotone along the ray.
pub fn critical_scales(
    pseudo: &PseudoSample,
    event: &EventSpec,
    q_map: &dyn PointMap,
    cfg: &EstimatorConfig,
) -> Result<CriticalScales> {
    let results: Vec<(f64, bool, bool)> = pseudo
        .rows()
        .par_iter()
        .map(|row| {
            match critical_scale(event, q_map, row, &cfg.scale_search) {
                Ok(cs) => Ok((cs.value, cs.saturated, false)),
                Err(Error::MonotonicityViolation) => {
                    let cs =
                        critical_scale_grid(event, q_map, row, &cfg.scale_search, cfg.fallback_grid)?;
                    Ok((cs.value, cs.saturated, true))
                }
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let saturated = results.iter().filter(|r| r.1).count();
    let nonmonotone = results.iter().filter(|r| r.2).count();
    Ok(CriticalScales {
        values: results.into_iter().map(|r| r.0).collect(),
        saturated,
        nonmonotone,
    })
}

/// `count`-th largest entry of `values`.
pub fn kth_largest(values: &[f64], count: usize) -> Result<f64> {
    if count == 0 || count > values.len() {
        return Err(Error::InvalidConfig(format!(
            "order statistic {count} out of range for {} values",
            values.len()
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(sorted[values.len() - count])
}

/// Scale estimate from precomputed critical scales: the largest contraction
/// at which the empirical event probability still reaches `(k/n)^exponent`.
pub fn ell_from_scales(scales: &[f64], n: usize, k_n: usize, exponent: f64) -> Result<f64> {
    let level = (k_n as f64 / n as f64).powf(exponent);
    let count = ((n as f64 * level).ceil() as usize).clamp(1, n);
    kth_largest(scales, count)
}

/// Smallest additive shift along the diagonal putting the point inside the
/// event; `None` when even `shift_max` does not reach it.
fn additive_shift(
    event: &EventSpec,
    q_map: &dyn PointMap,
    y: &[f64],
    shift_max: f64,
    tol: f64,
) -> Result<Option<f64>> {
    let member = |s: f64| -> Result<bool> {
        let shifted: Vec<f64> = y.iter().map(|&v| v + s).collect();
        event.contains(&q_map.apply(&shifted))
    };
    if member(0.0)? {
        return Ok(Some(0.0));
    }
    if !member(shift_max)? {
        return Ok(None);
    }
    let mut lo = 0.0;
    let mut hi = shift_max;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if member(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// `k`-th smallest of the finite shifts; `None` when fewer than `k` points
/// can be shifted into the event.
pub fn lambda_from_shifts(shifts: &[Option<f64>], k_n: usize) -> Option<f64> {
    let mut finite: Vec<f64> = shifts.iter().filter_map(|s| *s).collect();
    if finite.len() < k_n {
        return None;
    }
    finite.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Some(finite[k_n - 1])
}

/// Hill estimate of the residual tail dependence coefficient from the
/// coordinatewise minima, clamped to (0, 1].
pub fn eta_hill(pseudo: &PseudoSample, k_n: usize) -> Result<f64> {
    let n = pseudo.n();
    if k_n == 0 || k_n >= n {
        return Err(Error::InvalidConfig(format!(
            "eta needs 1 <= k_n < n, got k_n = {k_n}, n = {n}"
        )));
    }
    let mut t: Vec<f64> = pseudo
        .rows()
        .iter()
        .map(|row| row.iter().cloned().fold(f64::INFINITY, f64::min))
        .collect();
    t.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let anchor = t[n - 1 - k_n];
    let mean_excess: f64 = t[n - k_n..].iter().map(|v| v - anchor).sum::<f64>() / k_n as f64;
    if mean_excess <= 0.0 {
        return Err(Error::DegenerateSpacing(
            "all top coordinate minima are tied; eta is undefined".into(),
        ));
    }
    Ok(mean_excess.min(1.0))
}

/// Run every estimator against one event.
pub fn estimate(
    pseudo: &PseudoSample,
    event: &EventSpec,
    q_map: &dyn PointMap,
    cfg: &EstimatorConfig,
) -> Result<EstimateReport> {
    let n = pseudo.n();
    cfg.validate(n)?;
    let vartheta = cfg.vartheta.unwrap_or(cfg.xi);
    let scales = critical_scales(pseudo, event, q_map, cfg)?;
    let ell_plus = ell_from_scales(&scales.values, n, cfg.k_n, cfg.xi)?;
    let ell_minus = ell_from_scales(&scales.values, n, cfg.k_n, vartheta)?;
    let ell_n = ell_plus;
    let level = (cfg.k_n as f64 / n as f64).powf(cfg.xi);
    let (p_hat_at_ell, pi_i, pi_ii) = if ell_plus > 0.0 {
        let p_hat =
            scales.values.iter().filter(|&&s| s >= ell_n).count() as f64 / n as f64;
        (p_hat, level.powf(1.0 / ell_plus), p_hat.powf(1.0 / ell_n))
    } else {
        // fewer than the required number of points ever reach the event
        (0.0, 0.0, 0.0)
    };

    let shifts: Vec<Option<f64>> = pseudo
        .rows()
        .par_iter()
        .map(|row| additive_shift(event, q_map, row, cfg.shift_max, cfg.scale_search.tol))
        .collect::<Result<_>>()?;
    let lambda_n = lambda_from_shifts(&shifts, cfg.k_n);
    let base = cfg.k_n as f64 / n as f64;
    let pi_classical = lambda_n.map(|l| base * (-l).exp());
    let eta_hat = eta_hill(pseudo, cfg.k_n)?;
    let pi_classical_rtd = lambda_n.map(|l| base * (-l / eta_hat).exp());

    Ok(EstimateReport {
        n,
        k_n: cfg.k_n,
        xi: cfg.xi,
        vartheta,
        ell_plus,
        ell_minus,
        ell_n,
        p_hat_at_ell,
        pi_ldp_i: pi_i,
        pi_ldp_ii: pi_ii,
        lambda_n,
        pi_classical,
        eta_hat,
        pi_classical_rtd,
        saturated_points: scales.saturated,
        nonmonotone_points: scales.nonmonotone,
    })
}
