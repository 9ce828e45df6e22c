//! Gridpoint-level PC evaluation with cosine-latitude weighted aggregation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Aggregate, CellSummary, EvalReport, ExcludedCell, GridField, PairedSample};
use crate::error::{Error, Result};
use crate::scoring::pc;

/// Cells with fewer complete pairs are left out of the aggregate.
pub const MIN_PAIRS: usize = 2;

/// `cos(lat)` for a latitude in degrees, clamped at zero.
pub fn lat_weight(lat_degrees: f64) -> Result<f64> {
    if !(lat_degrees.abs() <= 90.0) {
        return Err(Error::LatitudeOutOfRange(lat_degrees));
    }
    Ok(lat_degrees.to_radians().cos().max(0.0))
}

/// Complete pairs of a cell's two time series.
pub fn cell_sample(forecast: &GridField, truth: &GridField, cell: usize) -> Option<PairedSample> {
    let x = forecast.cell_series(cell);
    let y = truth.cell_series(cell);
    PairedSample::from_complete_pairs(&x, &y).ok()
}

/// Latitude-weighted means of PC and PC⁰ over `cells`, with PCS formed from
/// the weighted sums.
pub fn aggregate(cells: &[CellSummary]) -> Result<Aggregate> {
    let mut wsum = 0.0;
    let mut pc_sum = 0.0;
    let mut pc0_sum = 0.0;
    for c in cells {
        let w = lat_weight(c.lat)?;
        wsum += w;
        pc_sum += w * c.pc;
        pc0_sum += w * c.pc0;
    }
    if cells.is_empty() || wsum <= 0.0 {
        return Err(Error::InsufficientData);
    }
    let pcs = if pc0_sum > 0.0 {
        (pc0_sum - pc_sum) / pc0_sum
    } else {
        0.0
    };
    Ok(Aggregate {
        pc: pc_sum / wsum,
        pc0: pc0_sum / wsum,
        pcs,
        n_cells: cells.len(),
    })
}

/// Per-cell PC of `forecast` against `truth` plus the weighted aggregate.
///
/// Cells run in parallel on the current rayon pool; the report lists cells
/// in latitude-major coordinate order regardless of scheduling. Labels in
/// the returned report are empty.
pub fn evaluate_grid(forecast: &GridField, truth: &GridField) -> Result<EvalReport> {
    forecast.check_same_coords(truth)?;
    let outcomes: Vec<std::result::Result<CellSummary, ExcludedCell>> = (0..forecast.n_cells())
        .into_par_iter()
        .map(|cell| {
            let (i, j) = forecast.cell_coords(cell);
            let (lat, lon) = (forecast.lats()[i], forecast.lons()[j]);
            match cell_sample(forecast, truth, cell) {
                Some(sample) if sample.len() >= MIN_PAIRS => {
                    let s = pc(&sample);
                    Ok(CellSummary {
                        lat,
                        lon,
                        n_used: s.n,
                        pc: s.pc,
                        pc0: s.pc0,
                        pcs: s.pcs,
                    })
                }
                other => Err(ExcludedCell {
                    lat,
                    lon,
                    n_used: other.map_or(0, |s| s.len()),
                }),
            }
        })
        .collect();

    let mut cells = Vec::new();
    let mut excluded = Vec::new();
    for o in outcomes {
        match o {
            Ok(c) => cells.push(c),
            Err(e) => excluded.push(e),
        }
    }
    let aggregate = aggregate(&cells)?;
    Ok(EvalReport {
        model: String::new(),
        truth: String::new(),
        lead_days: None,
        cells,
        excluded,
        aggregate,
    })
}

/// A per-cell score of some forecast.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellScore {
    pub lat: f64,
    pub lon: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSkill {
    pub lat: f64,
    pub lon: f64,
    pub score: f64,
    pub reference: f64,
    /// NaN when `degenerate`.
    pub skill: f64,
    /// The reference score is zero, so skill is undefined.
    pub degenerate: bool,
}

/// Skill `1 − score / reference` of a model against a reference forecast,
/// cell by cell. Both inputs must list the same cells in the same order.
pub fn skill_vs_reference(model: &[CellScore], reference: &[CellScore]) -> Result<Vec<CellSkill>> {
    if model.len() != reference.len() {
        return Err(Error::CoordinateMismatch(format!(
            "{} cells vs {} cells",
            model.len(),
            reference.len()
        )));
    }
    model
        .iter()
        .zip(reference)
        .map(|(m, r)| {
            if m.lat != r.lat || m.lon != r.lon {
                return Err(Error::CoordinateMismatch(format!(
                    "cell ({}, {}) vs ({}, {})",
                    m.lat, m.lon, r.lat, r.lon
                )));
            }
            let degenerate = !(r.value > 0.0);
            Ok(CellSkill {
                lat: m.lat,
                lon: m.lon,
                score: m.value,
                reference: r.value,
                skill: if degenerate {
                    f64::NAN
                } else {
                    1.0 - m.value / r.value
                },
                degenerate,
            })
        })
        .collect()
}
