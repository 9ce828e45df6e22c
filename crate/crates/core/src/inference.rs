//! Block permutation test for equal PC of two models.
//!
//! The score difference series `d = a − b` is cut into consecutive blocks of
//! length `2k` for a lead time of `k` days (two forecasts per day make
//! successive differences dependent at lags below `2k`). Each permutation
//! sample flips the sign of every block independently with probability ½.
//! The rank of the observed mean difference among the permutation means gives
//! a one-sided p-value: small values favour model A.
//!
//! Rank rule: `R = #{perm < actual} + ½ #{perm = actual} + ½` and
//! `p = R / N`, clipped to `[1/(2N), 1]`. The final block may be shorter than
//! `2k` and is signed like the others.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{GridField, PairedSample};
use crate::error::{Error, Result};
use crate::grid::MIN_PAIRS;
use crate::scoring::idr_crps_series;

pub const DEFAULT_PERMUTATIONS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PermutationResult {
    pub p_value: f64,
    /// Mean of `a − b`.
    pub actual_stat: f64,
    pub n_permutations: usize,
    pub block_length: usize,
    pub n_blocks: usize,
    pub seed: u64,
}

fn validate(a: &[f64], b: &[f64], lead_days: u32, n_permutations: usize) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptySeries);
    }
    if lead_days == 0 {
        return Err(Error::InvalidConfig("lead_days must be at least 1".into()));
    }
    if n_permutations == 0 {
        return Err(Error::InvalidConfig(
            "n_permutations must be at least 1".into(),
        ));
    }
    if let Some(index) = a.iter().chain(b).position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue {
            index: index % a.len(),
        });
    }
    Ok(())
}

/// Runs the test with RNG stream 0 of `seed`.
pub fn block_permutation_test(
    scores_a: &[f64],
    scores_b: &[f64],
    lead_days: u32,
    n_permutations: usize,
    seed: u64,
) -> Result<PermutationResult> {
    block_permutation_test_on_stream(scores_a, scores_b, lead_days, n_permutations, seed, 0)
}

/// As [`block_permutation_test`], drawing signs from stream `stream` of the
/// ChaCha8 generator seeded with `seed`. Distinct streams are independent.
pub fn block_permutation_test_on_stream(
    scores_a: &[f64],
    scores_b: &[f64],
    lead_days: u32,
    n_permutations: usize,
    seed: u64,
    stream: u64,
) -> Result<PermutationResult> {
    validate(scores_a, scores_b, lead_days, n_permutations)?;
    let n = scores_a.len();
    let block_length = 2 * lead_days as usize;
    let block_sums: Vec<f64> = scores_a
        .iter()
        .zip(scores_b)
        .map(|(a, b)| a - b)
        .collect::<Vec<_>>()
        .chunks(block_length)
        .map(|c| c.iter().sum())
        .collect();

    // The observed statistic is evaluated exactly like an all-positive sign
    // pattern so that the identity permutation ties it bit for bit.
    let actual = block_sums.iter().sum::<f64>() / n as f64;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut below = 0usize;
    let mut equal = 0usize;
    for _ in 0..n_permutations {
        let stat = block_sums
            .iter()
            .map(|&s| if rng.gen::<bool>() { s } else { -s })
            .sum::<f64>()
            / n as f64;
        if stat < actual {
            below += 1;
        } else if stat == actual {
            equal += 1;
        }
    }
    let rank = below as f64 + 0.5 * equal as f64 + 0.5;
    let big_n = n_permutations as f64;
    let p_value = (rank / big_n).clamp(0.5 / big_n, 1.0);

    Ok(PermutationResult {
        p_value,
        actual_stat: actual,
        n_permutations,
        block_length,
        n_blocks: block_sums.len(),
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellPValue {
    pub lat: f64,
    pub lon: f64,
    pub n_used: usize,
    /// NaN when the cell has fewer than two complete triples.
    pub p_value: f64,
    pub pc_a: f64,
    pub pc_b: f64,
}

/// Per-cell p-values for equal PC of `model_a` and `model_b` against `truth`.
///
/// Each cell uses the times at which all three fields are present, scores both
/// models by their in-sample IDR CRPS series, and tests the difference on RNG
/// stream `cell index` of `seed`.
pub fn gridpoint_p_values(
    model_a: &GridField,
    model_b: &GridField,
    truth: &GridField,
    lead_days: u32,
    n_permutations: usize,
    seed: u64,
) -> Result<Vec<CellPValue>> {
    model_a.check_same_coords(truth)?;
    model_b.check_same_coords(truth)?;
    if lead_days == 0 || n_permutations == 0 {
        return Err(Error::InvalidConfig(
            "lead_days and n_permutations must be at least 1".into(),
        ));
    }
    (0..truth.n_cells())
        .into_par_iter()
        .map(|cell| {
            let (i, j) = truth.cell_coords(cell);
            let (lat, lon) = (truth.lats()[i], truth.lons()[j]);
            let a = model_a.cell_series(cell);
            let b = model_b.cell_series(cell);
            let y = truth.cell_series(cell);
            let keep: Vec<usize> = (0..y.len())
                .filter(|&t| !(a[t].is_nan() || b[t].is_nan() || y[t].is_nan()))
                .collect();
            let pick = |v: &[f64]| keep.iter().map(|&t| v[t]).collect::<Vec<f64>>();
            let n_used = keep.len();
            if n_used < MIN_PAIRS {
                return Ok(CellPValue {
                    lat,
                    lon,
                    n_used,
                    p_value: f64::NAN,
                    pc_a: f64::NAN,
                    pc_b: f64::NAN,
                });
            }
            let (ya, yb) = (pick(&y), pick(&y));
            let sa = idr_crps_series(&PairedSample::new(pick(&a), ya)?);
            let sb = idr_crps_series(&PairedSample::new(pick(&b), yb)?);
            let r = block_permutation_test_on_stream(
                &sa,
                &sb,
                lead_days,
                n_permutations,
                seed,
                cell as u64,
            )?;
            let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
            Ok(CellPValue {
                lat,
                lon,
                n_used,
                p_value: r.p_value,
                pc_a: mean(&sa),
                pc_b: mean(&sb),
            })
        })
        .collect()
}

/// Five-number summary with linearly interpolated quartiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxSummary {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Summary of the non-NaN entries of `values`; `None` when there are none.
pub fn box_summary(values: &[f64]) -> Option<BoxSummary> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let h = p * (v.len() - 1) as f64;
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        v[lo] + (h - lo as f64) * (v[hi] - v[lo])
    };
    Some(BoxSummary {
        n: v.len(),
        min: v[0],
        q1: q(0.25),
        median: q(0.5),
        q3: q(0.75),
        max: v[v.len() - 1],
    })
}
