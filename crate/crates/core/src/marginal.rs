//! Log-GW marginal tail fitting from three order statistics, and the hybrid
//! empirical/extrapolated quantile estimator built on the fit.
//!
//! The fit uses order statistics at depths `k0 >= k1 >= k2` spaced so that
//! successive log-ratios shrink geometrically; the tail index is read off
//! from iterated logarithms of two such ratios and the scale from one ratio
//! normalised by `h_theta(iota)`.

use crate::error::{Error, Result};
use crate::special::h_transform;

/// One variable's ascending order statistics plus provenance.
#[derive(Debug, Clone)]
pub struct SortedMarginal {
    values: Vec<f64>,
    name: String,
}

impl SortedMarginal {
    /// Wrap an already ascending sequence of order statistics.
    pub fn new(values: Vec<f64>, name: impl Into<String>) -> Result<Self> {
        if values.len() < 4 {
            return Err(Error::InvalidConfig(format!(
                "marginal needs at least 4 observations, got {}",
                values.len()
            )));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidConfig(
                "marginal values must be nondecreasing".into(),
            ));
        }
        Ok(Self {
            values,
            name: name.into(),
        })
    }

    /// Sort a raw sample column into order statistics.
    pub fn from_unsorted(mut values: Vec<f64>, name: impl Into<String>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("marginal values must be finite".into()));
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Self::new(values, name)
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Order statistic `X_{i:n}` (1-based rank).
    pub fn order_statistic(&self, rank: usize) -> f64 {
        self.values[rank - 1]
    }
}

/// Depths `k2 <= k1 <= k0` of the three order statistics used by the fit,
/// spaced by `k_i = floor((n/k2)^{-iota^(i-2)} n)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KSequence {
    pub k0: usize,
    pub k1: usize,
    pub k2: usize,
    pub iota: f64,
    pub n: usize,
}

/// Default threshold count `k2 = ceil((log n)^2)`; grows fast enough for
/// consistency of the fit yet stays o(n^epsilon) for every epsilon.
pub fn default_k2(n: usize) -> usize {
    let l = (n as f64).ln();
    (l * l).ceil() as usize
}

/// Derive `(k0, k1)` from `(n, k2, iota)`.
pub fn k_sequence(n: usize, k2: usize, iota: f64) -> Result<KSequence> {
    if n < 4 {
        return Err(Error::InvalidConfig(format!("n must be >= 4, got {n}")));
    }
    if k2 < 1 || k2 >= n {
        return Err(Error::InvalidConfig(format!(
            "k2 must satisfy 1 <= k2 < n, got k2={k2}, n={n}"
        )));
    }
    if !(iota > 1.0) {
        return Err(Error::InvalidConfig(format!("iota must be > 1, got {iota}")));
    }
    let ratio = n as f64 / k2 as f64;
    // Guard against the float landing an ulp below an exact integer.
    let depth = |e: f64| -> usize { (ratio.powf(-e) * n as f64 * (1.0 + 1e-12)).floor() as usize };
    let k1 = depth(1.0 / iota);
    let k0 = depth(1.0 / (iota * iota));
    if !(k2 <= k1 && k1 <= k0 && k0 < n && k1 >= 1) {
        return Err(Error::InvalidConfig(format!(
            "k-sequence ordering violated: k2={k2} k1={k1} k0={k0} n={n}"
        )));
    }
    Ok(KSequence { k0, k1, k2, iota, n })
}

/// Fitted log-GW marginal tail.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct LogGwTailFit {
    /// Tail index estimate.
    pub theta_hat: f64,
    /// Scale estimate, positive.
    pub g_hat: f64,
    /// Anchor order statistic `X_{n-k0+1:n}`.
    pub anchor: f64,
    /// `log(n/k0)`; boundary between the empirical and extrapolated branch.
    pub y_n: f64,
    pub kseq: KSequence,
}

/// Fit the log-GW tail from the three order statistics selected by `kseq`.
pub fn fit_log_gw(marg: &SortedMarginal, kseq: &KSequence) -> Result<LogGwTailFit> {
    let n = marg.n();
    if n != kseq.n {
        return Err(Error::InvalidConfig(format!(
            "k-sequence was derived for n={}, marginal has n={n}",
            kseq.n
        )));
    }
    let x0 = marg.order_statistic(n - kseq.k0 + 1);
    let x1 = marg.order_statistic(n - kseq.k1 + 1);
    let x2 = marg.order_statistic(n - kseq.k2 + 1);
    if !(x0 > 0.0) {
        return Err(Error::Domain(format!(
            "anchor order statistic must be positive, got {x0} ({})",
            marg.name()
        )));
    }
    let r10 = (x1 / x0).ln();
    let r21 = (x2 / x1).ln();
    if r10 < 1e-12 || r21 < 1e-12 {
        return Err(Error::DegenerateSpacing(format!(
            "log-ratios too small for the iterated-log fit: {r21:.3e}, {r10:.3e} ({})",
            marg.name()
        )));
    }
    let theta_hat = (r21.ln() - r10.ln()) / kseq.iota.ln();
    let g_hat = r10 / h_transform(theta_hat, kseq.iota)?;
    let y_n = (n as f64 / kseq.k0 as f64).ln();
    Ok(LogGwTailFit {
        theta_hat,
        g_hat,
        anchor: x0,
        y_n,
        kseq: *kseq,
    })
}

/// Quantile estimate at exponential-scale level `z >= 0`: the empirical
/// quantile for `z <= y_n`, the fitted log-GW extrapolation beyond.
pub fn quantile_hat(fit: &LogGwTailFit, marg: &SortedMarginal, z: f64) -> f64 {
    debug_assert!(z >= 0.0);
    let n = marg.n();
    if z <= fit.y_n {
        let idx = (n as f64 * (1.0 - (-z).exp())).floor() as usize;
        marg.order_statistic(idx.min(n - 1) + 1)
    } else {
        let h = h_transform(fit.theta_hat, z / fit.y_n).expect("z/y_n > 1");
        fit.anchor * (fit.g_hat * h).exp()
    }
}

/// Probability-based quantile estimation error at level `z`:
/// `z^{-1} q^{-1}(q_hat(z)) - 1`, with `q_inverse` the exact inverse
/// quantile of the generating marginal (simulation-only diagnostic).
pub fn nu_diagnostic(
    fit: &LogGwTailFit,
    marg: &SortedMarginal,
    q_inverse: impl Fn(f64) -> Option<f64>,
    z: f64,
) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::Domain(format!("nu_diagnostic: z must be > 0, got {z}")));
    }
    let q_hat = quantile_hat(fit, marg, z);
    let back = q_inverse(q_hat).ok_or_else(|| {
        Error::Domain(format!(
            "nu_diagnostic: q_hat({z}) = {q_hat} outside the domain of q_inverse"
        ))
    })?;
    Ok(back / z - 1.0)
}
