//! Gamma simulation study.
//!
//! A weather state `W ~ Uniform(0, 10)` drives the outcome
//! `Y | W ~ Gamma(shape = √W, scale = min(max(W, 1), 6))`. Four forecasters
//! are strictly increasing functions of `W`: the state itself, and the
//! conditional mean, median and 0.90-quantile of `Y`. The outcome can
//! optionally be squared.
//!
//! Draws use inverse-transform sampling from one uniform stream:
//! `ChaCha8Rng::seed_from_u64(seed)` (rand_chacha), and for each pair two
//! `Open01` uniforms `u_w`, `u_y` in that order, with `w = 10 u_w` and
//! `y = F⁻¹(u_y | w)`.

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::checked_gamma_lr;

use crate::data::PairedSample;
use crate::error::{Error, Result};
use crate::metrics::{MetricRow, MetricTable};

/// Generator family and draw order recorded with simulation output.
pub const RNG_DESCRIPTION: &str =
    "ChaCha8Rng::seed_from_u64(seed); per pair Open01 u_w then u_y; w = 10*u_w; y = GammaInv(u_y | w)";

/// Guaranteed absolute accuracy of [`gamma_quantile`], in outcome units.
pub const QUANTILE_TOL: f64 = 1e-10;

/// Quantile level of the fourth forecaster and of the reported quantile loss.
pub const ALPHA: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub seed: u64,
    pub squared_outcome: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 10_000,
            seed: 1,
            squared_outcome: false,
        }
    }
}

/// Shape and scale of `Y | W = w`.
pub fn gamma_params(w: f64) -> (f64, f64) {
    (w.sqrt(), w.clamp(1.0, 6.0))
}

pub fn conditional_mean(w: f64) -> f64 {
    let (shape, scale) = gamma_params(w);
    shape * scale
}

/// Regularized lower incomplete gamma `P(shape, x / scale)`.
pub fn gamma_cdf(x: f64, shape: f64, scale: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    checked_gamma_lr(shape, x / scale).unwrap_or(f64::NAN)
}

/// `alpha`-quantile of the Gamma distribution by bisection on the CDF.
pub fn gamma_quantile(alpha: f64, shape: f64, scale: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    if !(shape > 0.0 && shape.is_finite() && scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "gamma parameters shape={shape}, scale={scale}"
        )));
    }
    let mut lo = 0.0;
    let mut hi = (shape * scale).max(scale);
    let mut expansions = 0;
    while gamma_cdf(hi, shape, scale) < alpha {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 1100 || !hi.is_finite() {
            return Err(Error::ConvergenceFailure(format!(
                "no upper bracket for alpha={alpha}, shape={shape}, scale={scale}"
            )));
        }
    }
    // Bisect down to adjacent floats rather than stopping at QUANTILE_TOL:
    // forecasts for nearby states then keep the order of the states.
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(hi);
        }
        let p = gamma_cdf(mid, shape, scale);
        if p.is_nan() {
            return Err(Error::ConvergenceFailure(format!(
                "CDF undefined at {mid} for shape={shape}, scale={scale}"
            )));
        }
        if p < alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::ConvergenceFailure(format!(
        "bisection did not reach tolerance for alpha={alpha}"
    )))
}

/// Conditional `alpha`-quantile of `Y | W = w`.
pub fn conditional_quantile(alpha: f64, w: f64) -> Result<f64> {
    let (shape, scale) = gamma_params(w);
    gamma_quantile(alpha, shape, scale)
}

#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub w: Vec<f64>,
    pub y: Vec<f64>,
}

pub fn draw_world(config: &SimConfig) -> Result<World> {
    if config.n == 0 {
        return Err(Error::InvalidConfig("n must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut w = Vec::with_capacity(config.n);
    let mut y = Vec::with_capacity(config.n);
    for _ in 0..config.n {
        let uw: f64 = rng.sample(Open01);
        let uy: f64 = rng.sample(Open01);
        let wi = 10.0 * uw;
        w.push(wi);
        y.push(conditional_quantile(uy, wi)?);
    }
    Ok(World { w, y })
}

pub const MODEL_LABELS: [&str; 4] = ["j=1 (w)", "j=2 (mean)", "j=3 (median)", "j=4 (q0.90)"];

/// The four forecast series for the states `w`.
pub fn forecasters(w: &[f64]) -> Result<[Vec<f64>; 4]> {
    let mean = w.iter().map(|&v| conditional_mean(v)).collect();
    let median = w
        .iter()
        .map(|&v| conditional_quantile(0.5, v))
        .collect::<Result<_>>()?;
    let upper = w
        .iter()
        .map(|&v| conditional_quantile(ALPHA, v))
        .collect::<Result<_>>()?;
    Ok([w.to_vec(), mean, median, upper])
}

/// Draws a world and scores the four forecasters with every metric.
pub fn run_study(config: &SimConfig) -> Result<MetricTable> {
    let world = draw_world(config)?;
    let models = forecasters(&world.w)?;
    let target: Vec<f64> = if config.squared_outcome {
        world.y.iter().map(|v| v * v).collect()
    } else {
        world.y.clone()
    };
    let rows = models
        .par_iter()
        .zip(MODEL_LABELS.par_iter())
        .map(|(x, label)| {
            let sample = PairedSample::new(x.clone(), target.clone())?;
            MetricRow::compute(*label, &sample, ALPHA)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricTable { alpha: ALPHA, rows })
}
