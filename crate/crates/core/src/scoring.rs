//! CRPS of step distributions, the potential CRPS (PC), its climatological
//! reference PC⁰ and the skill score PCS.

use serde::{Deserialize, Serialize};

use crate::data::{PairedSample, StepDistribution};
use crate::error::{Error, Result};
use crate::idr::in_sample_crps;

/// PC, PC⁰ and PCS for one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PcSummary {
    pub pc: f64,
    pub pc0: f64,
    pub pcs: f64,
    pub n: usize,
    /// Set when all outcomes are equal, so PC⁰ is zero and PCS is reported as 0.
    pub degenerate: bool,
}

fn check_outcome(y: f64) -> Result<()> {
    if y.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFiniteValue { index: 0 })
    }
}

/// Integral of `(F(z) − 1{y ≤ z})²` over `z ≥ lower`, evaluated piecewise on
/// the partition given by the jump points of `F` and `y`.
fn integrate_from(f: &StepDistribution, y: f64, lower: f64) -> f64 {
    let t = f.points();
    let cdf = f.cdf();
    let m = t.len();
    let mut total = 0.0;
    let mut add = |a: f64, b: f64, value: f64| {
        let a = a.max(lower);
        if b > a {
            total += (b - a) * value;
        }
    };

    if y < t[0] {
        add(y, t[0], 1.0);
    }
    for k in 0..m - 1 {
        let (a, b, fk) = (t[k], t[k + 1], cdf[k]);
        let hit = (1.0 - fk) * (1.0 - fk);
        let miss = fk * fk;
        if y <= a {
            add(a, b, hit);
        } else if y >= b {
            add(a, b, miss);
        } else {
            add(a, y, miss);
            add(y, b, hit);
        }
    }
    if y > t[m - 1] {
        add(t[m - 1], y, 1.0);
    }
    total
}

/// CRPS by exact piecewise integration of the squared CDF difference.
pub fn crps(f: &StepDistribution, y: f64) -> Result<f64> {
    check_outcome(y)?;
    Ok(integrate_from(f, y, f64::NEG_INFINITY))
}

/// CRPS through the kernel representation `E|Y − y| − ½ E|Y − Y′|`, summing
/// directly over pairs of jump masses.
pub fn crps_energy(f: &StepDistribution, y: f64) -> Result<f64> {
    check_outcome(y)?;
    let t = f.points();
    let p = f.masses();
    let first: f64 = t.iter().zip(&p).map(|(&tk, &pk)| pk * (tk - y).abs()).sum();
    let mut spread = 0.0;
    for (k, (&tk, &pk)) in t.iter().zip(&p).enumerate() {
        for (&tl, &pl) in t[..k].iter().zip(&p[..k]) {
            spread += 2.0 * pk * pl * (tk - tl);
        }
    }
    Ok(first - 0.5 * spread)
}

/// Threshold-weighted CRPS with weight `1{z ≥ threshold}`.
pub fn tw_crps(f: &StepDistribution, y: f64, threshold: f64) -> Result<f64> {
    check_outcome(y)?;
    if threshold.is_nan() {
        return Err(Error::NonFiniteValue { index: 0 });
    }
    Ok(integrate_from(f, y, threshold))
}

/// Arithmetic mean of the CRPS over paired forecasts and outcomes.
pub fn mean_crps(forecasts: &[StepDistribution], y: &[f64]) -> Result<f64> {
    if forecasts.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: forecasts.len(),
            right: y.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut total = 0.0;
    for (index, (f, &obs)) in forecasts.iter().zip(y).enumerate() {
        total += crps(f, obs).map_err(|_| Error::NonFiniteValue { index })?;
    }
    Ok(total / y.len() as f64)
}

/// CRPS of the empirical climatology of `y`: half the Gini mean difference,
/// `(1 / 2n²) Σᵢ Σⱼ |yᵢ − yⱼ|`.
///
/// Evaluated from order statistics as
/// `(1/n²) Σ_{j ≤ n/2} (n + 1 − 2j)(y₍ₙ₊₁₋ⱼ₎ − y₍ⱼ₎)`, which has only
/// nonnegative terms and is exactly zero for constant outcomes.
pub fn pc0(y: &[f64]) -> Result<f64> {
    if y.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(index) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue { index });
    }
    let mut sorted = y.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut total = 0.0;
    for j in 0..n / 2 {
        let coef = (n - 1 - 2 * j) as f64;
        total += coef * (sorted[n - 1 - j] - sorted[j]);
    }
    Ok(total / (n as f64 * n as f64))
}

/// Skill relative to climatology, `(pc0 − pc) / pc0`; 0 when `pc0` is zero.
pub fn pcs(pc: f64, pc0: f64) -> f64 {
    if pc0 > 0.0 {
        (pc0 - pc) / pc0
    } else {
        0.0
    }
}

/// Per-instance CRPS of the in-sample IDR forecasts, in sample order.
pub fn idr_crps_series(sample: &PairedSample) -> Vec<f64> {
    in_sample_crps(sample)
}

/// PC, PC⁰ and PCS of a sample.
///
/// PC never exceeds PC⁰ for the in-sample fit, so PCS is clamped to `[0, 1]`
/// to absorb rounding when the two coincide.
pub fn pc(sample: &PairedSample) -> PcSummary {
    let scores = in_sample_crps(sample);
    let n = sample.len();
    let pc = scores.iter().sum::<f64>() / n as f64;
    let pc0 = pc0(sample.y()).expect("validated sample");
    PcSummary {
        pc,
        pc0,
        pcs: pcs(pc, pc0).clamp(0.0, 1.0),
        n,
        degenerate: pc0 == 0.0,
    }
}
