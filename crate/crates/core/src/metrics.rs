//! Deterministic baseline measures: RMSE, MAE, pinball quantile loss, the
//! anomaly correlation coefficient (ACC) and the coefficient of predictive
//! ability (CPA).

use serde::{Deserialize, Serialize};

use crate::data::PairedSample;
use crate::error::{Error, Result};

pub fn rmse(sample: &PairedSample) -> f64 {
    mse(sample).sqrt()
}

pub fn mse(sample: &PairedSample) -> f64 {
    let n = sample.len() as f64;
    sample
        .x()
        .iter()
        .zip(sample.y())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / n
}

pub fn mae(sample: &PairedSample) -> f64 {
    let n = sample.len() as f64;
    sample
        .x()
        .iter()
        .zip(sample.y())
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
        / n
}

/// Pinball loss `ρ_α(u) = u (α − 1{u < 0})`.
pub fn pinball(u: f64, alpha: f64) -> f64 {
    if u < 0.0 {
        u * (alpha - 1.0)
    } else {
        u * alpha
    }
}

/// Mean pinball loss of `y − x` at level `alpha`.
pub fn quantile_loss(sample: &PairedSample, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    let n = sample.len() as f64;
    Ok(sample
        .x()
        .iter()
        .zip(sample.y())
        .map(|(x, y)| pinball(y - x, alpha))
        .sum::<f64>()
        / n)
}

/// Anomaly correlation: Pearson correlation of `x − c` and `y − c`, where the
/// climatology `c` defaults to the mean outcome of the sample.
pub fn acc(sample: &PairedSample, climatology: Option<f64>) -> Result<f64> {
    let n = sample.len() as f64;
    let c = climatology.unwrap_or_else(|| sample.y().iter().sum::<f64>() / n);
    let fa: Vec<f64> = sample.x().iter().map(|x| x - c).collect();
    let oa: Vec<f64> = sample.y().iter().map(|y| y - c).collect();
    let fm = fa.iter().sum::<f64>() / n;
    let om = oa.iter().sum::<f64>() / n;
    let (mut sfo, mut sff, mut soo) = (0.0, 0.0, 0.0);
    for (f, o) in fa.iter().zip(&oa) {
        let (df, d_o) = (f - fm, o - om);
        sfo += df * d_o;
        sff += df * df;
        soo += d_o * d_o;
    }
    if sff <= 0.0 || soo <= 0.0 {
        return Err(Error::DegenerateVariance);
    }
    Ok((sfo / (sff * soo).sqrt()).clamp(-1.0, 1.0))
}

/// Twice the midranks of `v`, as integers (ties share the mean rank).
fn doubled_midranks(v: &[f64]) -> Vec<i64> {
    let n = v.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0i64; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && v[order[end]] == v[order[start]] {
            end += 1;
        }
        // ranks start+1 ..= end, doubled mean
        let doubled = (start + 1 + end) as i64;
        for &i in &order[start..end] {
            ranks[i] = doubled;
        }
        start = end;
    }
    ranks
}

/// Coefficient of predictive ability,
/// `½ (1 + Cov(rk x, rk y) / Var(rk y))` with midranks.
///
/// Equivalently, the share of outcome pairs `yᵢ < yⱼ` ordered the same way
/// by the forecast (half credit for forecast ties), each pair weighted by the
/// rank distance of its outcomes. Reduces to the AUC for binary outcomes.
/// Evaluated in integer arithmetic, so the result depends on the ranks only.
pub fn cpa(sample: &PairedSample) -> Result<f64> {
    let n = sample.len();
    let rx = doubled_midranks(sample.x());
    let ry = doubled_midranks(sample.y());
    let centre = (n + 1) as i64;
    let (mut cov, mut var) = (0i128, 0i128);
    for (&a, &b) in rx.iter().zip(&ry) {
        let (da, db) = ((a - centre) as i128, (b - centre) as i128);
        cov += da * db;
        var += db * db;
    }
    if var == 0 {
        return Err(Error::AllOutcomesEqual);
    }
    Ok((var + cov) as f64 / (2 * var) as f64)
}

/// One row of the baseline comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub model: String,
    pub rmse: f64,
    pub mae: f64,
    pub quantile_loss: f64,
    pub pc: f64,
    pub acc: f64,
    pub cpa: f64,
    pub pcs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricTable {
    pub alpha: f64,
    pub rows: Vec<MetricRow>,
}

impl MetricRow {
    /// Computes every column for one model. ACC uses the sample-mean
    /// climatology; ACC and CPA are NaN when undefined for the sample.
    pub fn compute(model: impl Into<String>, sample: &PairedSample, alpha: f64) -> Result<Self> {
        let summary = crate::scoring::pc(sample);
        Ok(Self {
            model: model.into(),
            rmse: rmse(sample),
            mae: mae(sample),
            quantile_loss: quantile_loss(sample, alpha)?,
            pc: summary.pc,
            acc: acc(sample, None).unwrap_or(f64::NAN),
            cpa: cpa(sample).unwrap_or(f64::NAN),
            pcs: summary.pcs,
        })
    }
}
