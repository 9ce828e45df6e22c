//! Pool-adjacent-violators solvers.
//!
//! All solvers use a single left-to-right scan with a stack of pooled blocks,
//! merging the top two blocks while they violate the order constraint.

use crate::error::{Error, Result};

/// A maximal run of indices sharing one fitted value. `end` is inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block {
    pub start: usize,
    pub end: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PavResult {
    pub fitted: Vec<f64>,
    pub blocks: Vec<Block>,
}

impl PavResult {
    fn from_blocks(blocks: Vec<Block>, n: usize) -> Self {
        let mut fitted = vec![0.0; n];
        for b in &blocks {
            fitted[b.start..=b.end].fill(b.value);
        }
        Self { fitted, blocks }
    }
}

fn validate(values: &[f64], weights: &[f64]) -> Result<()> {
    if values.len() != weights.len() {
        return Err(Error::LengthMismatch {
            left: values.len(),
            right: weights.len(),
        });
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue { index });
    }
    if let Some(index) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::NonPositiveWeight { index });
    }
    Ok(())
}

/// Weighted mean of `values[range]`, summed left to right. A single element
/// is returned unchanged.
fn range_mean(values: &[f64], weights: &[f64], start: usize, end: usize) -> f64 {
    if start == end {
        return values[start];
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for i in start..=end {
        num += weights[i] * values[i];
        den += weights[i];
    }
    num / den
}

/// Weighted least-squares fit under a nondecreasing constraint.
pub fn pav_isotonic(values: &[f64], weights: &[f64]) -> Result<PavResult> {
    validate(values, weights)?;

    struct Pool {
        start: usize,
        end: usize,
        mean: f64,
        weight: f64,
    }
    let mut stack: Vec<Pool> = Vec::with_capacity(values.len());
    for (i, (&v, &w)) in values.iter().zip(weights).enumerate() {
        stack.push(Pool {
            start: i,
            end: i,
            mean: v,
            weight: w,
        });
        while stack.len() >= 2 && stack[stack.len() - 2].mean >= stack[stack.len() - 1].mean {
            let top = stack.pop().unwrap();
            let below = stack.last_mut().unwrap();
            let weight = below.weight + top.weight;
            below.mean = (below.weight * below.mean + top.weight * top.mean) / weight;
            below.weight = weight;
            below.end = top.end;
        }
    }

    // Pooled values are recomputed from the raw data so that they do not
    // depend on the merge order, then clamped to remove rounding violations.
    let mut blocks = Vec::with_capacity(stack.len());
    let mut floor = f64::NEG_INFINITY;
    for p in &stack {
        let value = range_mean(values, weights, p.start, p.end).max(floor);
        floor = value;
        blocks.push(Block {
            start: p.start,
            end: p.end,
            value,
        });
    }
    Ok(PavResult::from_blocks(blocks, values.len()))
}

/// Weighted least-squares fit under a nonincreasing constraint.
pub fn pav_antitonic(values: &[f64], weights: &[f64]) -> Result<PavResult> {
    validate(values, weights)?;
    let n = values.len();
    let rev_v: Vec<f64> = values.iter().rev().copied().collect();
    let rev_w: Vec<f64> = weights.iter().rev().copied().collect();
    let fit = pav_isotonic(&rev_v, &rev_w)?;
    let blocks = fit
        .blocks
        .iter()
        .rev()
        .map(|b| Block {
            start: n - 1 - b.end,
            end: n - 1 - b.start,
            value: b.value,
        })
        .collect();
    Ok(PavResult::from_blocks(blocks, n))
}

/// Smallest value whose cumulative weight reaches `alpha` of the total.
/// `sorted` must be ordered by value.
fn lower_quantile(sorted: &[(f64, f64)], alpha: f64) -> f64 {
    let total: f64 = sorted.iter().map(|p| p.1).sum();
    let target = alpha * total;
    let mut cum = 0.0;
    for &(v, w) in sorted {
        cum += w;
        if cum >= target {
            return v;
        }
    }
    sorted[sorted.len() - 1].0
}

/// Weighted pinball-loss fit at level `alpha` under a nondecreasing
/// constraint. Pooled blocks take the lower weighted `alpha`-quantile of their
/// members.
pub fn pav_quantile(values: &[f64], weights: &[f64], alpha: f64) -> Result<PavResult> {
    validate(values, weights)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }

    struct Pool {
        start: usize,
        end: usize,
        sorted: Vec<(f64, f64)>,
        value: f64,
    }
    let mut stack: Vec<Pool> = Vec::with_capacity(values.len());
    for (i, (&v, &w)) in values.iter().zip(weights).enumerate() {
        stack.push(Pool {
            start: i,
            end: i,
            sorted: vec![(v, w)],
            value: v,
        });
        while stack.len() >= 2 && stack[stack.len() - 2].value >= stack[stack.len() - 1].value {
            let top = stack.pop().unwrap();
            let below = stack.last_mut().unwrap();
            below.sorted = merge_sorted(&below.sorted, &top.sorted);
            below.value = lower_quantile(&below.sorted, alpha);
            below.end = top.end;
        }
    }
    let blocks = stack
        .iter()
        .map(|p| Block {
            start: p.start,
            end: p.end,
            value: p.value,
        })
        .collect();
    Ok(PavResult::from_blocks(blocks, values.len()))
}

fn merge_sorted(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i].0 <= b[j].0 {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Isotonic least squares for values of the form `count / weight` with
/// integer counts and weights.
///
/// Merge decisions compare pooled means by exact integer cross
/// multiplication, and each fitted value is the correctly rounded ratio of the
/// pooled integer sums. Reuses its stack across calls.
#[derive(Debug, Default)]
pub(crate) struct CountPav {
    stack: Vec<(u64, u64, usize)>,
}

impl CountPav {
    pub(crate) fn with_capacity(n: usize) -> Self {
        Self {
            stack: Vec::with_capacity(n),
        }
    }

    /// Writes the nondecreasing fit of `counts[i] / weights[i]` into `out`.
    pub(crate) fn fit(&mut self, counts: &[u64], weights: &[u64], out: &mut [f64]) {
        debug_assert_eq!(counts.len(), weights.len());
        debug_assert_eq!(counts.len(), out.len());
        self.stack.clear();
        for (&c, &w) in counts.iter().zip(weights) {
            let (mut c, mut w, mut len) = (c, w, 1usize);
            while let Some(&(pc, pw, plen)) = self.stack.last() {
                // pc / pw > c / w
                if (pc as u128) * (w as u128) > (c as u128) * (pw as u128) {
                    self.stack.pop();
                    c += pc;
                    w += pw;
                    len += plen;
                } else {
                    break;
                }
            }
            self.stack.push((c, w, len));
        }
        let mut pos = 0;
        for &(c, w, len) in &self.stack {
            out[pos..pos + len].fill(c as f64 / w as f64);
            pos += len;
        }
    }
}
