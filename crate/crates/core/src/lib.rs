//! Potential CRPS (PC) for single-valued forecasts.
//!
//! Deterministic model output is converted into calibrated predictive
//! distributions by in-sample isotonic distributional regression (IDR, in its
//! EasyUQ form with the model output as sole covariate). The mean CRPS of those
//! distributions is the PC measure; comparing it against the CRPS of the
//! unconditional empirical climatology gives the PC skill (PCS).
//!
//! Module map:
//! - [`data`]: validated samples, step distributions, gridded fields, reports
//! - [`pav`]: pool-adjacent-violators solvers (least squares and pinball loss)
//! - [`idr`]: the isotonic distributional regression fit
//! - [`scoring`]: CRPS routes, PC, PC⁰ and PCS
//! - [`metrics`]: deterministic baselines (RMSE, MAE, quantile loss, ACC, CPA)
//! - [`grid`]: per-gridpoint evaluation with cosine-latitude weighting
//! - [`inference`]: block permutation test for equal PC
//! - [`sim`]: the Gamma simulation study

pub mod data;
pub mod error;
pub mod grid;
pub mod idr;
pub mod inference;
pub mod metrics;
pub mod pav;
pub mod scoring;
pub mod sim;

pub use data::{from_ensemble, EvalReport, GridField, PairedSample, StepDistribution};
pub use error::{Error, Result};
pub use idr::{fit_idr, IdrFit};
pub use scoring::{crps, pc, pc0, pcs, PcSummary};
