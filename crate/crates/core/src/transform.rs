//! Rank-based transformation of the sample to exponential-scale
//! pseudo-observations, the coordinatewise fitted quantile map, and
//! empirical probabilities.

use crate::error::{Error, Result};
use crate::marginal::{quantile_hat, LogGwTailFit, SortedMarginal};

/// A sample of `n` points in `R^m` with column labels.
#[derive(Debug, Clone)]
pub struct Sample {
    rows: Vec<Vec<f64>>,
    column_names: Vec<String>,
}

impl Sample {
    pub fn new(rows: Vec<Vec<f64>>, column_names: Vec<String>) -> Result<Self> {
        let m = column_names.len();
        if m == 0 {
            return Err(Error::Data("sample needs at least one column".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::Data(format!(
                    "row {i} has {} coordinates, expected {m}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Data(format!("row {i} has a non-finite coordinate")));
            }
        }
        Ok(Self { rows, column_names })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn m(&self) -> usize {
        self.column_names.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// Sorted order statistics of column `j`.
    pub fn sorted_marginal(&self, j: usize) -> Result<SortedMarginal> {
        SortedMarginal::from_unsorted(self.column(j), self.column_names[j].clone())
    }
}

/// Exponential-scale pseudo-observations `Yhat` with their per-column ranks.
#[derive(Debug, Clone)]
pub struct PseudoSample {
    rows: Vec<Vec<f64>>,
    ranks: Vec<Vec<usize>>,
    /// Number of tied value pairs found per column (the transform assumes
    /// continuous marginals; ties are broken by stable input order).
    tie_counts: Vec<usize>,
}

impl PseudoSample {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn m(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn ranks(&self) -> &[Vec<usize>] {
        &self.ranks
    }

    pub fn tie_counts(&self) -> &[usize] {
        &self.tie_counts
    }

    pub fn has_ties(&self) -> bool {
        self.tie_counts.iter().any(|&c| c > 0)
    }

    /// Build directly from known exponential-scale rows (simulation studies
    /// that replace `Yhat` by the exact `Y`).
    pub fn from_exact(rows: Vec<Vec<f64>>) -> Self {
        Self {
            rows,
            ranks: Vec::new(),
            tie_counts: Vec::new(),
        }
    }
}

/// Transform each column to `Yhat = -log(1 - (R - 1/2)/n)` where `R` is the
/// marginal rank. Ties are broken by stable input order and surfaced in
/// `tie_counts`.
pub fn rank_transform(sample: &Sample) -> Result<PseudoSample> {
    let n = sample.n();
    let m = sample.m();
    if n == 0 {
        return Err(Error::Data("cannot rank an empty sample".into()));
    }
    let mut rows = vec![vec![0.0; m]; n];
    let mut ranks = vec![vec![0usize; m]; n];
    let mut tie_counts = vec![0usize; m];
    for j in 0..m {
        let mut idx: Vec<usize> = (0..n).collect();
        // stable sort keeps input order within tied values
        idx.sort_by(|&a, &b| sample.rows()[a][j].partial_cmp(&sample.rows()[b][j]).unwrap());
        for w in idx.windows(2) {
            if sample.rows()[w[0]][j] == sample.rows()[w[1]][j] {
                tie_counts[j] += 1;
            }
        }
        for (pos, &i) in idx.iter().enumerate() {
            let r = pos + 1;
            ranks[i][j] = r;
            rows[i][j] = -(1.0 - (r as f64 - 0.5) / n as f64).ln();
        }
    }
    Ok(PseudoSample {
        rows,
        ranks,
        tie_counts,
    })
}

/// Coordinatewise application of the fitted quantile estimators: maps a
/// point on exponential scale back to data space.
pub fn q_hat_map(
    fits: &[LogGwTailFit],
    margs: &[SortedMarginal],
    x: &[f64],
) -> Result<Vec<f64>> {
    if fits.len() != margs.len() || fits.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: fits.len(),
            actual: x.len(),
        });
    }
    Ok(x.iter()
        .enumerate()
        .map(|(j, &z)| quantile_hat(&fits[j], &margs[j], z.max(0.0)))
        .collect())
}

/// Fraction of true flags.
pub fn empirical_probability(flags: &[bool]) -> f64 {
    if flags.is_empty() {
        return 0.0;
    }
    flags.iter().filter(|&&b| b).count() as f64 / flags.len() as f64
}
