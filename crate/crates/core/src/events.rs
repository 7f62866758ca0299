//! Composable extreme-event predicates in data space, plus the per-point
//! critical-scale computation that drives the estimators.
//!
//! JSON schema (consumed by the CLI):
//! `{"type":"halfspace","coeffs":[...],"threshold":c,"margin_map":"identity"|"normal_of_exp"}`
//! | `{"type":"corner","thresholds":[...]}`
//! | `{"type":"all_of"/"any_of","children":[...]}`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::normal_of_exp;

/// Per-coordinate monotone map applied before the halfspace inner product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginMap {
    Identity,
    /// `x -> Phi^{-1}(1 - e^{-x})`: exponential scale to standard normal.
    NormalOfExp,
}

impl MarginMap {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            MarginMap::Identity => x,
            MarginMap::NormalOfExp => normal_of_exp(x),
        }
    }
}

/// Opaque membership predicate supplied by library users (not expressible
/// in the JSON schema); engineering response models plug in here.
#[derive(Clone)]
pub struct CustomPredicate {
    pub dim: usize,
    pub f: Arc<dyn Fn(&[f64]) -> bool + Send + Sync>,
}

impl fmt::Debug for CustomPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPredicate").field("dim", &self.dim).finish()
    }
}

/// Membership predicate over data-space points.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EventSpec {
    /// `sum_j coeffs_j * map(x_j) > threshold` (strict).
    Halfspace {
        coeffs: Vec<f64>,
        threshold: f64,
        margin_map: MarginMap,
    },
    /// Coordinatewise strict exceedance `x_j > thresholds_j` for all `j`.
    Corner { thresholds: Vec<f64> },
    AllOf { children: Vec<EventSpec> },
    AnyOf { children: Vec<EventSpec> },
    #[serde(skip)]
    Custom(CustomPredicate),
}

impl EventSpec {
    pub fn halfspace(coeffs: Vec<f64>, threshold: f64, margin_map: MarginMap) -> Self {
        EventSpec::Halfspace {
            coeffs,
            threshold,
            margin_map,
        }
    }

    pub fn corner(thresholds: Vec<f64>) -> Self {
        EventSpec::Corner { thresholds }
    }

    pub fn custom(dim: usize, f: impl Fn(&[f64]) -> bool + Send + Sync + 'static) -> Self {
        EventSpec::Custom(CustomPredicate { dim, f: Arc::new(f) })
    }

    /// Dimension the event expects, if any node pins one.
    pub fn dim(&self) -> Option<usize> {
        match self {
            EventSpec::Halfspace { coeffs, .. } => Some(coeffs.len()),
            EventSpec::Corner { thresholds } => Some(thresholds.len()),
            EventSpec::AllOf { children } | EventSpec::AnyOf { children } => {
                children.iter().find_map(|c| c.dim())
            }
            EventSpec::Custom(c) => Some(c.dim),
        }
    }

    /// True when membership is provably nonincreasing in the ray scale `l`
    /// applied as `point / l`: upper-set events built from coordinatewise
    /// monotone pieces. For such events the critical-scale bisection needs
    /// no sampled monotonicity check.
    pub fn monotone_along_rays(&self) -> bool {
        match self {
            // both margin maps are increasing, so nonnegative coefficients
            // make the inner product monotone in every coordinate
            EventSpec::Halfspace { coeffs, .. } => coeffs.iter().all(|&a| a >= 0.0),
            EventSpec::Corner { .. } => true,
            EventSpec::AllOf { children } | EventSpec::AnyOf { children } => {
                children.iter().all(|c| c.monotone_along_rays())
            }
            EventSpec::Custom(_) => false,
        }
    }

    /// Evaluate the predicate tree at `point`.
    pub fn contains(&self, point: &[f64]) -> Result<bool> {
        match self {
            EventSpec::Halfspace {
                coeffs,
                threshold,
                margin_map,
            } => {
                if coeffs.len() != point.len() {
                    return Err(Error::DimensionMismatch {
                        expected: coeffs.len(),
                        actual: point.len(),
                    });
                }
                let mut acc = 0.0;
                for (&a, &x) in coeffs.iter().zip(point) {
                    if a != 0.0 {
                        acc += a * margin_map.apply(x);
                    }
                }
                Ok(acc > *threshold)
            }
            EventSpec::Corner { thresholds } => {
                if thresholds.len() != point.len() {
                    return Err(Error::DimensionMismatch {
                        expected: thresholds.len(),
                        actual: point.len(),
                    });
                }
                Ok(thresholds.iter().zip(point).all(|(&a, &x)| x > a))
            }
            EventSpec::AllOf { children } => {
                for c in children {
                    if !c.contains(point)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            EventSpec::AnyOf { children } => {
                for c in children {
                    if c.contains(point)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            EventSpec::Custom(c) => {
                if c.dim != point.len() {
                    return Err(Error::DimensionMismatch {
                        expected: c.dim,
                        actual: point.len(),
                    });
                }
                Ok((c.f)(point))
            }
        }
    }
}

/// Map from exponential-scale points to the space the event lives in.
pub trait PointMap: Sync {
    fn apply(&self, y: &[f64]) -> Vec<f64>;
}

/// The identity map: the event is defined directly on exponential scale.
pub struct IdentityMap;

impl PointMap for IdentityMap {
    fn apply(&self, y: &[f64]) -> Vec<f64> {
        y.to_vec()
    }
}

impl<F> PointMap for F
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    fn apply(&self, y: &[f64]) -> Vec<f64> {
        self(y)
    }
}

/// Result of the per-point critical-scale search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalScale {
    /// Largest scale `l` at which the stretched point is inside the event;
    /// 0 if outside already at `l_min`.
    pub value: f64,
    /// True when the point is still inside at `l_max`.
    pub saturated: bool,
    /// True when the sampled membership pattern was monotone in `l`.
    pub monotone: bool,
}

/// Search controls for [`critical_scale`].
#[derive(Debug, Clone, Copy)]
pub struct ScaleSearch {
    pub l_min: f64,
    pub l_max: f64,
    pub tol: f64,
}

impl Default for ScaleSearch {
    fn default() -> Self {
        Self {
            l_min: 1e-3,
            l_max: 1e3,
            tol: 1e-6,
        }
    }
}

impl ScaleSearch {
    pub fn validate(&self) -> Result<()> {
        if !(self.l_min > 0.0 && self.l_min < self.l_max && self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "scale search needs 0 < l_min < l_max and tol > 0, got {self:?}"
            )));
        }
        Ok(())
    }
}

const MONOTONICITY_SAMPLES: usize = 16;

/// Largest `l` in `[l_min, l_max]` with `q_map(yhat / l)` inside the event,
/// assuming membership is monotone nonincreasing in `l` (upper-set events).
///
/// Returns value 0 when the point is outside at `l_min` and a saturation
/// flag when it is still inside at `l_max`. Monotonicity is verified on a
/// 16-point log-grid; a violation is reported via `Err` so the caller can
/// fall back to a grid scan.
pub fn critical_scale(
    event: &EventSpec,
    q_map: &dyn PointMap,
    yhat_point: &[f64],
    search: &ScaleSearch,
) -> Result<CriticalScale> {
    search.validate()?;
    let member = |l: f64| -> Result<bool> {
        let scaled: Vec<f64> = yhat_point.iter().map(|&y| y / l).collect();
        event.contains(&q_map.apply(&scaled))
    };
    let (member_lo, member_hi) = if event.monotone_along_rays() {
        (member(search.l_min)?, member(search.l_max)?)
    } else {
        // sampled check: the pattern along increasing l must be T..TF..F
        let log_lo = search.l_min.ln();
        let log_hi = search.l_max.ln();
        let mut pattern = [false; MONOTONICITY_SAMPLES];
        for (i, slot) in pattern.iter_mut().enumerate() {
            let f = i as f64 / (MONOTONICITY_SAMPLES - 1) as f64;
            *slot = member((log_lo + (log_hi - log_lo) * f).exp())?;
        }
        let mut seen_false = false;
        for &p in &pattern {
            if p && seen_false {
                return Err(Error::MonotonicityViolation);
            }
            if !p {
                seen_false = true;
            }
        }
        (pattern[0], pattern[MONOTONICITY_SAMPLES - 1])
    };
    if !member_lo {
        return Ok(CriticalScale {
            value: 0.0,
            saturated: false,
            monotone: true,
        });
    }
    if member_hi {
        return Ok(CriticalScale {
            value: search.l_max,
            saturated: true,
            monotone: true,
        });
    }
    // bisect in log space: member(lo) true, member(hi) false
    let mut lo = search.l_min;
    let mut hi = search.l_max;
    while hi - lo > search.tol {
        let mid = (lo.ln() + hi.ln()).mul_add(0.5, 0.0).exp();
        let mid = if mid <= lo || mid >= hi { 0.5 * (lo + hi) } else { mid };
        if member(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(CriticalScale {
        value: lo,
        saturated: false,
        monotone: true,
    })
}

/// Dense grid scan used when the bisection path reports non-monotone
/// membership: returns the largest grid `l` with the point inside.
pub fn critical_scale_grid(
    event: &EventSpec,
    q_map: &dyn PointMap,
    yhat_point: &[f64],
    search: &ScaleSearch,
    grid_points: usize,
) -> Result<CriticalScale> {
    search.validate()?;
    let log_lo = search.l_min.ln();
    let log_hi = search.l_max.ln();
    let mut best = 0.0;
    let mut saturated = false;
    for i in (0..grid_points).rev() {
        let l = (log_lo + (log_hi - log_lo) * i as f64 / (grid_points - 1) as f64).exp();
        let scaled: Vec<f64> = yhat_point.iter().map(|&y| y / l).collect();
        if event.contains(&q_map.apply(&scaled))? {
            best = l;
            saturated = i == grid_points - 1;
            break;
        }
    }
    Ok(CriticalScale {
        value: best,
        saturated,
        monotone: false,
    })
}
