//! Validated domain types shared by the rest of the crate.
//!
//! All types are immutable once constructed. Predictive CDFs are
//! right-continuous step functions throughout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the final cumulative probability of a step distribution.
pub const CDF_TOTAL_TOL: f64 = 1e-12;

/// Aligned forecast/outcome pairs for one model at one location and lead time.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl PairedSample {
    /// Validates and wraps the pairs without reordering them.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: y.len(),
            });
        }
        if x.is_empty() {
            return Err(Error::EmptyInput);
        }
        check_finite(&x)?;
        check_finite(&y)?;
        Ok(Self { x, y })
    }

    /// Builds a sample from possibly-missing pairs, dropping any pair where
    /// either entry is NaN. Infinite entries are still rejected.
    pub fn from_complete_pairs(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: y.len(),
            });
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = x
            .iter()
            .zip(y)
            .filter(|(a, b)| !a.is_nan() && !b.is_nan())
            .map(|(&a, &b)| (a, b))
            .unzip();
        Self::new(xs, ys)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    /// Always false for a validated sample; present for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// The same outcomes paired with `g(x)`.
    pub fn map_x(&self, g: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.x.iter().map(|&v| g(v)).collect(), self.y.clone())
    }
}

/// Convenience constructor mirroring [`PairedSample::new`].
pub fn make_sample(x: Vec<f64>, y: Vec<f64>) -> Result<PairedSample> {
    PairedSample::new(x, y)
}

fn check_finite(v: &[f64]) -> Result<()> {
    match v.iter().position(|a| !a.is_finite()) {
        Some(index) => Err(Error::NonFiniteValue { index }),
        None => Ok(()),
    }
}

/// A discrete predictive distribution: jump locations `t_1 < … < t_m` and the
/// CDF value `F_k` attained at (and right of) each jump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDistribution {
    points: Vec<f64>,
    cdf: Vec<f64>,
}

impl StepDistribution {
    pub fn new(points: Vec<f64>, cdf: Vec<f64>) -> Result<Self> {
        if points.len() != cdf.len() {
            return Err(Error::LengthMismatch {
                left: points.len(),
                right: cdf.len(),
            });
        }
        if points.is_empty() {
            return Err(Error::EmptyInput);
        }
        check_finite(&points)?;
        for (i, w) in points.windows(2).enumerate() {
            if !(w[0] < w[1]) {
                return Err(Error::NotSorted { index: i + 1 });
            }
        }
        if let Some(index) = cdf.iter().position(|c| c.is_nan()) {
            return Err(Error::NotMonotoneCdf { index });
        }
        if !(cdf[0] > 0.0) {
            return Err(Error::NotMonotoneCdf { index: 0 });
        }
        for (i, w) in cdf.windows(2).enumerate() {
            if w[1] < w[0] {
                return Err(Error::NotMonotoneCdf { index: i + 1 });
            }
        }
        let last = cdf[cdf.len() - 1];
        if (last - 1.0).abs() > CDF_TOTAL_TOL {
            return Err(Error::LastNotOne { value: last });
        }
        Ok(Self { points, cdf })
    }

    pub fn point_mass(at: f64) -> Result<Self> {
        Self::new(vec![at], vec![1.0])
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Probability mass at each jump point.
    pub fn masses(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.cdf
            .iter()
            .map(|&c| {
                let m = c - prev;
                prev = c;
                m
            })
            .collect()
    }

    /// Right-continuous CDF value at `z`.
    pub fn cdf_at(&self, z: f64) -> f64 {
        let k = self.points.partition_point(|&t| t <= z);
        if k == 0 {
            0.0
        } else {
            self.cdf[k - 1]
        }
    }

    /// Smallest jump point whose CDF value reaches `alpha`.
    pub fn quantile(&self, alpha: f64) -> f64 {
        let k = self.cdf.partition_point(|&c| c < alpha);
        self.points[k.min(self.points.len() - 1)]
    }
}

/// Convenience constructor mirroring [`StepDistribution::new`].
pub fn make_step_distribution(points: Vec<f64>, cdf: Vec<f64>) -> Result<StepDistribution> {
    StepDistribution::new(points, cdf)
}

/// Empirical distribution of ensemble members with equal weights.
pub fn from_ensemble(members: &[f64]) -> Result<StepDistribution> {
    if members.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    check_finite(members)?;
    let mut sorted = members.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut points = Vec::new();
    let mut cdf = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        let count = (i + 1) as f64;
        match points.last() {
            Some(&last) if last == v => *cdf.last_mut().unwrap() = count / n,
            _ => {
                points.push(v);
                cdf.push(count / n);
            }
        }
    }
    StepDistribution::new(points, cdf)
}

/// One variable on a regular time × latitude × longitude grid.
///
/// Values are stored row-major with time outermost and longitude innermost.
/// Missing values are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    times: Vec<i64>,
    lats: Vec<f64>,
    lons: Vec<f64>,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(times: Vec<i64>, lats: Vec<f64>, lons: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let expected = times.len() * lats.len() * lons.len();
        if values.len() != expected {
            return Err(Error::InvalidGrid(format!(
                "{} values for dims [{}, {}, {}]",
                values.len(),
                times.len(),
                lats.len(),
                lons.len()
            )));
        }
        if let Some(&lat) = lats.iter().find(|l| !(l.abs() <= 90.0)) {
            return Err(Error::LatitudeOutOfRange(lat));
        }
        if let Some(&lon) = lons.iter().find(|l| !(**l >= 0.0 && **l < 360.0)) {
            return Err(Error::InvalidGrid(format!(
                "longitude {lon} outside [0, 360)"
            )));
        }
        if !strictly_monotone(&lats) {
            return Err(Error::InvalidGrid("latitudes not strictly monotone".into()));
        }
        if !strictly_monotone(&lons) {
            return Err(Error::InvalidGrid(
                "longitudes not strictly monotone".into(),
            ));
        }
        if let Some(i) = values.iter().position(|v| v.is_infinite()) {
            return Err(Error::NonFiniteValue { index: i });
        }
        Ok(Self {
            times,
            lats,
            lons,
            values,
        })
    }

    pub fn times(&self) -> &[i64] {
        &self.times
    }

    pub fn lats(&self) -> &[f64] {
        &self.lats
    }

    pub fn lons(&self) -> &[f64] {
        &self.lons
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.times.len(), self.lats.len(), self.lons.len()]
    }

    pub fn n_cells(&self) -> usize {
        self.lats.len() * self.lons.len()
    }

    pub fn get(&self, t: usize, lat: usize, lon: usize) -> f64 {
        let [_, nlat, nlon] = self.dims();
        self.values[(t * nlat + lat) * nlon + lon]
    }

    /// Time series at cell `cell = lat_index * n_lon + lon_index`.
    pub fn cell_series(&self, cell: usize) -> Vec<f64> {
        let stride = self.n_cells();
        self.values
            .iter()
            .skip(cell)
            .step_by(stride)
            .copied()
            .collect()
    }

    /// `(lat_index, lon_index)` for a flat cell index.
    pub fn cell_coords(&self, cell: usize) -> (usize, usize) {
        (cell / self.lons.len(), cell % self.lons.len())
    }

    /// Errors with the first differing coordinate when the grids disagree.
    pub fn check_same_coords(&self, other: &GridField) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::CoordinateMismatch(format!(
                "dims {:?} vs {:?}",
                self.dims(),
                other.dims()
            )));
        }
        if let Some(i) = (0..self.times.len()).find(|&i| self.times[i] != other.times[i]) {
            return Err(Error::CoordinateMismatch(format!(
                "time[{i}]: {} vs {}",
                self.times[i], other.times[i]
            )));
        }
        if let Some(i) = (0..self.lats.len()).find(|&i| self.lats[i] != other.lats[i]) {
            return Err(Error::CoordinateMismatch(format!(
                "lat[{i}]: {} vs {}",
                self.lats[i], other.lats[i]
            )));
        }
        if let Some(i) = (0..self.lons.len()).find(|&i| self.lons[i] != other.lons[i]) {
            return Err(Error::CoordinateMismatch(format!(
                "lon[{i}]: {} vs {}",
                self.lons[i], other.lons[i]
            )));
        }
        Ok(())
    }
}

fn strictly_monotone(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1]) || v.windows(2).all(|w| w[0] > w[1])
}

/// PC summary of one grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub lat: f64,
    pub lon: f64,
    pub n_used: usize,
    pub pc: f64,
    pub pc0: f64,
    pub pcs: f64,
}

/// A cell left out of the aggregate for lack of complete pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcludedCell {
    pub lat: f64,
    pub lon: f64,
    pub n_used: usize,
}

/// Latitude-weighted aggregate over the cells that entered it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub pc: f64,
    pub pc0: f64,
    pub pcs: f64,
    pub n_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub truth: String,
    pub lead_days: Option<u32>,
    pub cells: Vec<CellSummary>,
    pub excluded: Vec<ExcludedCell>,
    pub aggregate: Aggregate,
}
