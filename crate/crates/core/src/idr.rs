//! Isotonic distributional regression with a single real covariate.
//!
//! For every threshold `z_k` (the sorted unique outcomes), the fitted CDF
//! values across covariate groups are the antitonic least-squares fit of the
//! per-group empirical frequencies of `y <= z_k`, weighted by group size.
//! This gives the unique CRPS-optimal family of predictive CDFs that is
//! stochastically nondecreasing in the covariate.
//!
//! Group frequencies are integer ratios, so the per-threshold fits run on an
//! exact count kernel. Every fitted value is the correctly rounded ratio of
//! integer pooled sums, which keeps rows exactly nondecreasing and columns
//! exactly nonincreasing.

use crate::data::{PairedSample, StepDistribution};
use crate::error::{Error, Result};
use crate::pav::CountPav;

/// Sorted unique values of `v` and, for each entry of `v`, its index among them.
fn unique_ranks(v: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut unique: Vec<f64> = Vec::new();
    let mut rank = vec![0; v.len()];
    for &i in &order {
        // -0.0 and 0.0 are adjacent under total_cmp and compare equal here.
        if unique.last() != Some(&v[i]) {
            unique.push(v[i]);
        }
        rank[i] = unique.len() - 1;
    }
    (unique, rank)
}

/// Grouping of a sample by covariate value and by outcome threshold.
struct Design {
    groups: Vec<f64>,
    sizes: Vec<u64>,
    thresholds: Vec<f64>,
    /// Group index of each instance.
    group_of: Vec<usize>,
    /// Instances ordered by threshold index; `by_rank[offsets[k]..offsets[k+1]]`
    /// are the instances whose outcome equals `thresholds[k]`.
    by_rank: Vec<usize>,
    offsets: Vec<usize>,
}

impl Design {
    fn new(sample: &PairedSample) -> Self {
        let (groups, group_of) = unique_ranks(sample.x());
        let (thresholds, rank_of) = unique_ranks(sample.y());
        let mut sizes = vec![0u64; groups.len()];
        for &j in &group_of {
            sizes[j] += 1;
        }
        let m = thresholds.len();
        let mut offsets = vec![0usize; m + 1];
        for &k in &rank_of {
            offsets[k + 1] += 1;
        }
        for k in 0..m {
            offsets[k + 1] += offsets[k];
        }
        let mut fill = offsets.clone();
        let mut by_rank = vec![0usize; rank_of.len()];
        for (i, &k) in rank_of.iter().enumerate() {
            by_rank[fill[k]] = i;
            fill[k] += 1;
        }
        Self {
            groups,
            sizes,
            thresholds,
            group_of,
            by_rank,
            offsets,
        }
    }

    fn members_at(&self, k: usize) -> &[usize] {
        &self.by_rank[self.offsets[k]..self.offsets[k + 1]]
    }

    /// Position of group `j` in descending covariate order.
    fn desc(&self, j: usize) -> usize {
        self.groups.len() - 1 - j
    }

    /// Visits thresholds in increasing order; `visit` receives the threshold
    /// index and the fitted CDF column in descending covariate order.
    fn sweep(&self, mut visit: impl FnMut(usize, &[f64])) {
        let g = self.groups.len();
        let sizes_desc: Vec<u64> = self.sizes.iter().rev().copied().collect();
        let mut counts_desc = vec![0u64; g];
        let mut column = vec![0.0; g];
        let mut kernel = CountPav::with_capacity(g);
        for k in 0..self.thresholds.len() {
            for &i in self.members_at(k) {
                counts_desc[self.desc(self.group_of[i])] += 1;
            }
            // Antitonic in ascending covariate order is isotonic in descending order.
            kernel.fit(&counts_desc, &sizes_desc, &mut column);
            visit(k, &column);
        }
    }
}

/// A fitted IDR model.
#[derive(Debug, Clone, PartialEq)]
pub struct IdrFit {
    groups: Vec<f64>,
    group_sizes: Vec<u64>,
    thresholds: Vec<f64>,
    /// Row-major `groups.len() × thresholds.len()`.
    cdf: Vec<f64>,
}

/// Fits IDR in-sample.
///
/// Stores the dense group × threshold CDF matrix, so memory grows as
/// O(g·m). Use [`in_sample_crps`] when only scores are needed.
pub fn fit_idr(sample: &PairedSample) -> IdrFit {
    let design = Design::new(sample);
    let g = design.groups.len();
    let m = design.thresholds.len();
    let mut cdf = vec![0.0; g * m];
    design.sweep(|k, column| {
        for (p, &f) in column.iter().enumerate() {
            cdf[(g - 1 - p) * m + k] = f;
        }
    });
    IdrFit {
        groups: design.groups,
        group_sizes: design.sizes,
        thresholds: design.thresholds,
        cdf,
    }
}

impl IdrFit {
    pub fn groups(&self) -> &[f64] {
        &self.groups
    }

    pub fn group_sizes(&self) -> &[u64] {
        &self.group_sizes
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn n_thresholds(&self) -> usize {
        self.thresholds.len()
    }

    /// Fitted CDF of group `j` at every threshold.
    pub fn cdf_row(&self, j: usize) -> &[f64] {
        let m = self.thresholds.len();
        &self.cdf[j * m..(j + 1) * m]
    }

    pub fn cdf_entry(&self, j: usize, k: usize) -> f64 {
        self.cdf[j * self.thresholds.len() + k]
    }

    /// Fitted CDF values of every group at threshold `k`.
    pub fn cdf_column(&self, k: usize) -> Vec<f64> {
        (0..self.groups.len())
            .map(|j| self.cdf_entry(j, k))
            .collect()
    }

    /// Predictive distribution of group `j`, without zero-mass thresholds.
    pub fn group_distribution(&self, j: usize) -> StepDistribution {
        let mut points = Vec::new();
        let mut cdf = Vec::new();
        let mut prev = 0.0;
        for (&t, &f) in self.thresholds.iter().zip(self.cdf_row(j)) {
            if f > prev {
                points.push(t);
                cdf.push(f);
                prev = f;
            }
        }
        StepDistribution::new(points, cdf).expect("IDR rows are valid CDFs")
    }

    /// Predictive distribution for a new covariate value: the row of the
    /// largest group value not exceeding `x0`, or the first row when `x0`
    /// lies below every group.
    pub fn predict(&self, x0: f64) -> StepDistribution {
        let j = self.groups.partition_point(|&u| u <= x0).saturating_sub(1);
        self.group_distribution(j)
    }

    /// Fitted distributions for each instance of `sample`, in sample order.
    pub fn in_sample_distributions(&self, sample: &PairedSample) -> Result<Vec<StepDistribution>> {
        let rows: Vec<usize> = sample
            .x()
            .iter()
            .enumerate()
            .map(|(index, &x)| {
                let j = self.groups.partition_point(|&u| u < x);
                if j < self.groups.len() && self.groups[j] == x {
                    Ok(j)
                } else {
                    Err(Error::SampleMismatch { index })
                }
            })
            .collect::<Result<_>>()?;
        let distinct: Vec<StepDistribution> = (0..self.groups.len())
            .map(|j| self.group_distribution(j))
            .collect();
        Ok(rows.into_iter().map(|j| distinct[j].clone()).collect())
    }
}

/// Predicts with `fit` at `x0`; see [`IdrFit::predict`].
pub fn predict(fit: &IdrFit, x0: f64) -> StepDistribution {
    fit.predict(x0)
}

/// See [`IdrFit::in_sample_distributions`].
pub fn in_sample_distributions(
    fit: &IdrFit,
    sample: &PairedSample,
) -> Result<Vec<StepDistribution>> {
    fit.in_sample_distributions(sample)
}

/// CRPS of each in-sample IDR forecast against its own outcome, in sample
/// order, without materializing the CDF matrix.
///
/// With `F` the fitted CDF of instance `i` and `r` the threshold index of
/// `y_i`, the score is `Σ_{k<r} Δ_k F_k² + Σ_{k≥r} Δ_k (1 − F_k)²` with
/// `Δ_k = z_{k+1} − z_k`. Per-group running sums of both terms are kept
/// during the threshold sweep and read off at each instance's own threshold.
pub fn in_sample_crps(sample: &PairedSample) -> Vec<f64> {
    let design = Design::new(sample);
    let g = design.groups.len();
    let m = design.thresholds.len();
    let n = sample.len();

    let mut below = vec![0.0; g];
    let mut above = vec![0.0; g];
    let mut below_at = vec![0.0; n];
    let mut above_at = vec![0.0; n];
    design.sweep(|k, column| {
        // Running sums cover thresholds before k at this point.
        for &i in design.members_at(k) {
            let p = design.desc(design.group_of[i]);
            below_at[i] = below[p];
            above_at[i] = above[p];
        }
        if k + 1 < m {
            let width = design.thresholds[k + 1] - design.thresholds[k];
            for (p, &f) in column.iter().enumerate() {
                below[p] += width * f * f;
                above[p] += width * (1.0 - f) * (1.0 - f);
            }
        }
    });

    (0..n)
        .map(|i| {
            let p = design.desc(design.group_of[i]);
            below_at[i] + (above[p] - above_at[i])
        })
        .collect()
}
