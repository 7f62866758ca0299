//! Rate functions for the multivariate normal reference model on
//! exponential marginal scale, and numerical minimisation of a rate
//! function over an event.
//!
//! The rate function is positively homogeneous of degree 1, so its infimum
//! over an upper-set event factors into a search over rays: for each
//! direction on the unit simplex, find the entry scale into the event and
//! score it with the rate of the entry point.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::events::EventSpec;

/// Rate function of a normal vector with unit variances, expressed on
/// exponential marginal scale.
#[derive(Debug, Clone)]
pub struct NormalRateModel {
    corr: DMatrix<f64>,
    precision: DMatrix<f64>,
}

impl NormalRateModel {
    /// Build from a correlation matrix: square, symmetric, unit diagonal,
    /// positive definite.
    pub fn new(corr: DMatrix<f64>) -> Result<Self> {
        let m = corr.nrows();
        if m == 0 || corr.ncols() != m {
            return Err(Error::InvalidConfig(format!(
                "correlation matrix must be square and nonempty, got {}x{}",
                corr.nrows(),
                corr.ncols()
            )));
        }
        for i in 0..m {
            if (corr[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidConfig(format!(
                    "correlation matrix needs a unit diagonal, entry ({i},{i}) is {}",
                    corr[(i, i)]
                )));
            }
            for j in 0..i {
                if (corr[(i, j)] - corr[(j, i)]).abs() > 1e-12 {
                    return Err(Error::InvalidConfig(
                        "correlation matrix must be symmetric".into(),
                    ));
                }
            }
        }
        let chol = corr
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidConfig("correlation matrix is not positive definite".into()))?;
        let precision = chol.inverse();
        Ok(Self { corr, precision })
    }

    /// Bivariate model with correlation `rho`.
    pub fn bivariate(rho: f64) -> Result<Self> {
        Self::new(DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]))
    }

    /// `m`-variate model with a common pairwise correlation.
    pub fn equicorrelated(m: usize, rho: f64) -> Result<Self> {
        Self::new(DMatrix::from_fn(m, m, |i, j| if i == j { 1.0 } else { rho }))
    }

    pub fn dim(&self) -> usize {
        self.corr.nrows()
    }

    pub fn corr(&self) -> &DMatrix<f64> {
        &self.corr
    }

    /// Pairwise correlation of a bivariate model.
    pub fn rho(&self) -> Result<f64> {
        if self.dim() != 2 {
            return Err(Error::InvalidConfig(format!(
                "rho is only defined for bivariate models, dim = {}",
                self.dim()
            )));
        }
        Ok(self.corr[(0, 1)])
    }

    /// Lower semicontinuous rate function at `x` in the closed positive
    /// orthant.
    ///
    /// On the interior this is `u' W u / 2` with `u_j = sqrt(2 x_j)` and `W`
    /// the precision matrix. Where some `x_j = 0` the underlying normal
    /// coordinate is only constrained to be nonpositive, so the quadratic
    /// form is minimised over those coordinates subject to `v_j <= 0`; the
    /// minimum is found by enumerating active sets.
    pub fn rate(&self, x: &[f64]) -> Result<f64> {
        let m = self.dim();
        if x.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: x.len(),
            });
        }
        for (j, &v) in x.iter().enumerate() {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!(
                    "rate function needs finite nonnegative coordinates, x[{j}] = {v}"
                )));
            }
        }
        let pos: Vec<usize> = (0..m).filter(|&j| x[j] > 0.0).collect();
        let zero: Vec<usize> = (0..m).filter(|&j| x[j] == 0.0).collect();
        if pos.is_empty() {
            return Ok(0.0);
        }
        let u = DVector::from_iterator(pos.len(), pos.iter().map(|&j| (2.0 * x[j]).sqrt()));
        let w_pp = submatrix(&self.precision, &pos, &pos);
        let base = 0.5 * (u.transpose() * &w_pp * &u)[(0, 0)];
        if zero.is_empty() {
            return Ok(base);
        }
        if zero.len() > 20 {
            return Err(Error::InvalidConfig(
                "too many zero coordinates for active-set enumeration".into(),
            ));
        }
        // enumerate which zero coordinates are left free (v_j < 0 allowed);
        // each feasible candidate is attainable, and the optimum is one of them
        let mut best = base;
        for mask in 1u32..(1 << zero.len()) {
            let free: Vec<usize> = zero
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &j)| j)
                .collect();
            let w_ff = submatrix(&self.precision, &free, &free);
            let w_fp = submatrix(&self.precision, &free, &pos);
            let rhs = -(&w_fp * &u);
            let Some(v_f) = w_ff.clone().lu().solve(&rhs) else {
                continue;
            };
            if v_f.iter().any(|&v| v > 1e-12) {
                continue;
            }
            let value = 0.5 * ((u.transpose() * &w_pp * &u)[(0, 0)] + (u.transpose() * w_fp.transpose() * &v_f)[(0, 0)]);
            if value < best {
                best = value;
            }
        }
        Ok(best)
    }

    /// Rate along the bivariate simplex: `rate(t, 1 - t)`.
    pub fn psi(&self, t: f64) -> Result<f64> {
        if self.dim() != 2 {
            return Err(Error::InvalidConfig("psi needs a bivariate model".into()));
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("psi needs t in [0, 1], got {t}")));
        }
        self.rate(&[t, 1.0 - t])
    }

    /// Infimum of the rate function over the closed upper corner
    /// `[x1, inf) x [x2, inf)` (bivariate, closed form).
    pub fn kappa(&self, x1: f64, x2: f64) -> Result<f64> {
        let rho = self.rho()?;
        if !(x1 >= 0.0 && x2 >= 0.0) {
            return Err(Error::Domain(format!(
                "kappa needs nonnegative coordinates, got ({x1}, {x2})"
            )));
        }
        let (hi, lo) = if x1 >= x2 { (x1, x2) } else { (x2, x1) };
        if hi == 0.0 {
            return Ok(0.0);
        }
        // the unconstrained minimum over the smaller coordinate sits at
        // rho^2 * hi when rho > 0, and at the boundary otherwise
        if (rho > 0.0 && lo <= rho * rho * hi) || lo == 0.0 {
            Ok(hi)
        } else {
            self.rate(&[x1, x2])
        }
    }

    /// Residual tail dependence coefficient `1 / rate(1, ..., 1)`.
    pub fn eta(&self) -> Result<f64> {
        let ones = vec![1.0; self.dim()];
        let r = self.rate(&ones)?;
        if r <= 0.0 {
            return Err(Error::Domain("rate at the diagonal must be positive".into()));
        }
        Ok(1.0 / r)
    }
}

fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Controls for [`inf_rate_over_event`].
#[derive(Debug, Clone, Copy)]
pub struct RayInfSearch {
    /// Directions per simplex edge; total grid size grows with dimension.
    pub resolution: usize,
    pub l_min: f64,
    pub l_max: f64,
    /// Relative tolerance of the per-ray entry-scale bisection.
    pub tol: f64,
}

impl Default for RayInfSearch {
    fn default() -> Self {
        Self {
            resolution: 2048,
            l_min: 1e-6,
            l_max: 1e4,
            tol: 1e-10,
        }
    }
}

/// Smallest scale at which `l * omega` lies in the event, assuming the event
/// is an upper set along rays.
fn ray_entry(event: &EventSpec, omega: &[f64], search: &RayInfSearch) -> Result<Option<f64>> {
    let member = |l: f64| -> Result<bool> {
        let p: Vec<f64> = omega.iter().map(|&w| w * l).collect();
        event.contains(&p)
    };
    if !member(search.l_max)? {
        return Ok(None);
    }
    if member(search.l_min)? {
        return Ok(Some(search.l_min));
    }
    let mut lo = search.l_min;
    let mut hi = search.l_max;
    while hi / lo > 1.0 + search.tol {
        let mid = (lo * hi).sqrt();
        if member(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Infimum of the model's rate function over an event in the closed
/// positive orthant, assumed to be an upper set (stable under coordinatewise
/// increase). Errors with [`Error::EmptyEvent`] when no ray enters the event
/// below `l_max`.
pub fn inf_rate_over_event(
    model: &NormalRateModel,
    event: &EventSpec,
    search: &RayInfSearch,
) -> Result<f64> {
    let m = model.dim();
    if let Some(d) = event.dim() {
        if d != m {
            return Err(Error::DimensionMismatch { expected: m, actual: d });
        }
    }
    let score = |omega: &[f64]| -> Result<f64> {
        match ray_entry(event, omega, search)? {
            // rate(entry * omega) = entry * rate(omega) by homogeneity
            Some(entry) => Ok(entry * model.rate(omega)?),
            None => Ok(f64::INFINITY),
        }
    };
    if m == 2 {
        let n = search.resolution.max(8);
        let mut best = f64::INFINITY;
        let mut best_t = 0.0;
        for i in 0..=n {
            let t = i as f64 / n as f64;
            let v = score(&[t, 1.0 - t])?;
            if v < best {
                best = v;
                best_t = t;
            }
        }
        if !best.is_finite() {
            return Err(Error::EmptyEvent);
        }
        let step = 1.0 / n as f64;
        let refined = golden_section(
            (best_t - step).max(0.0),
            (best_t + step).min(1.0),
            |t| score(&[t, 1.0 - t]),
        )?;
        Ok(best.min(refined))
    } else {
        // composition grid on the simplex, then local pattern refinement
        let r = match m {
            3 => 48,
            4 => 24,
            _ => (96 / m).max(4),
        };
        let mut best = f64::INFINITY;
        let mut best_omega = vec![0.0; m];
        let mut comp = vec![0usize; m];
        compositions(r, m, &mut comp, 0, &mut |c| {
            let omega: Vec<f64> = c.iter().map(|&k| k as f64 / r as f64).collect();
            let v = score(&omega)?;
            if v < best {
                best = v;
                best_omega = omega;
            }
            Ok(())
        })?;
        if !best.is_finite() {
            return Err(Error::EmptyEvent);
        }
        let mut step = 1.0 / r as f64;
        for _ in 0..24 {
            let mut improved = false;
            for i in 0..m {
                for j in 0..m {
                    if i == j {
                        continue;
                    }
                    let mut cand = best_omega.clone();
                    let d = step.min(cand[j]);
                    if d <= 0.0 {
                        continue;
                    }
                    cand[i] += d;
                    cand[j] -= d;
                    let v = score(&cand)?;
                    if v < best {
                        best = v;
                        best_omega = cand;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
                if step < 1e-7 {
                    break;
                }
            }
        }
        Ok(best)
    }
}

fn compositions(
    total: usize,
    parts: usize,
    comp: &mut Vec<usize>,
    idx: usize,
    f: &mut impl FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    if idx == parts - 1 {
        comp[idx] = total - comp[..idx].iter().sum::<usize>();
        return f(comp);
    }
    let used: usize = comp[..idx].iter().sum();
    for k in 0..=(total - used) {
        comp[idx] = k;
        compositions(total, parts, comp, idx + 1, f)?;
    }
    Ok(())
}

fn golden_section(mut a: f64, mut b: f64, mut f: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INVPHI * (b - a);
    let mut x2 = a + INVPHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..80 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INVPHI * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INVPHI * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(f1.min(f2))
}
