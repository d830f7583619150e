//! Two-stage fuzzy localizer.
//!
//! Offline, each anchor's channel is fitted and scored against the anchor
//! population by the model reliability controller. Online, every anchor
//! yields a distance estimate and a total reliability weight `I_n`; the
//! cell minimizing `W(i,j) = Σ I_n (ŵ_n − w_n(i,j))²` is the fix.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{self, AnchorId, CalibrationPoint, ChannelError, PathLossModel, RssiSample};
use crate::eval::lower_median;
use crate::exec::Execution;
use crate::fuzzy::{FlcSpec, FuzzyError};
use crate::geometry::Point;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LocalizationError {
    #[error("anchor {anchor}: {source}")]
    Channel { anchor: AnchorId, source: ChannelError },
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
    #[error("median undefined: no anchors")]
    MedianUndefined,
    #[error("negative distance estimate {0}")]
    NegativeDistance(f64),
    #[error("mismatched lengths: {0}")]
    MismatchedLengths(&'static str),
    #[error("no anchor has usable samples")]
    NoUsableSamples,
    #[error("every total reliability weight is zero")]
    AllWeightsZero,
    #[error("cell ({i}, {j}) outside a {nx}x{ny} grid")]
    OutOfRange { i: usize, j: usize, nx: usize, ny: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

/// Floor plan discretized into square cells of side `cell_side`, with
/// 1-based indices `(i, j)` counted from the corner at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridMap {
    pub cell_side: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridMap {
    pub fn new(cell_side: f64, nx: usize, ny: usize) -> Result<Self, LocalizationError> {
        if !(cell_side > 0.0 && cell_side.is_finite()) {
            return Err(LocalizationError::InvalidGrid(format!("cell side must be positive, got {cell_side}")));
        }
        if nx == 0 || ny == 0 {
            return Err(LocalizationError::InvalidGrid(format!("grid must be non-empty, got {nx}x{ny}")));
        }
        Ok(Self { cell_side, nx, ny })
    }

    /// `⌈width/S⌉ × ⌈height/S⌉` cells.
    pub fn for_room(width: f64, height: f64, cell_side: f64) -> Result<Self, LocalizationError> {
        if !(width > 0.0 && height > 0.0) {
            return Err(LocalizationError::InvalidGrid(format!("room {width}x{height} must be positive")));
        }
        let nx = (width / cell_side).ceil() as usize;
        let ny = (height / cell_side).ceil() as usize;
        Self::new(cell_side, nx, ny)
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Result<Point, LocalizationError> {
        if i == 0 || j == 0 || i > self.nx || j > self.ny {
            return Err(LocalizationError::OutOfRange { i, j, nx: self.nx, ny: self.ny });
        }
        Ok(self.center_unchecked(i, j))
    }

    fn center_unchecked(&self, i: usize, j: usize) -> Point {
        let s = self.cell_side;
        Point::new(i as f64 * s - s / 2.0, j as f64 * s - s / 2.0)
    }

    /// 1-based `(i, j)` for a row-major flat index.
    pub fn cell_of_index(&self, idx: usize) -> (usize, usize) {
        (idx / self.ny + 1, idx % self.ny + 1)
    }

    /// Cell containing `p`, clamped into the grid.
    pub fn cell_containing(&self, p: Point) -> (usize, usize) {
        let clamp = |v: f64, n: usize| ((v / self.cell_side).floor() as i64 + 1).clamp(1, n as i64) as usize;
        (clamp(p.x, self.nx), clamp(p.y, self.ny))
    }
}

/// Per-cell values, row-major with one row per `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMap {
    pub grid: GridMap,
    pub values: Vec<f64>,
}

pub type ErrorMap = CellMap;

impl CellMap {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i - 1) * self.grid.ny + (j - 1)]
    }

    /// Smallest value and its cell; ties go to the smallest `i`, then `j`.
    pub fn argmin(&self) -> ((usize, usize), f64) {
        let mut best = 0;
        for (idx, v) in self.values.iter().enumerate() {
            if *v < self.values[best] {
                best = idx;
            }
        }
        (self.grid.cell_of_index(best), self.values[best])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.values.chunks(self.grid.ny) {
            let cells: Vec<String> = row.iter().map(|v| crate::io::fmt_num(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// An anchor after the offline stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub id: AnchorId,
    #[serde(rename = "pos")]
    pub position: Point,
    #[serde(flatten)]
    pub model: PathLossModel,
    pub z_score: f64,
    pub k_score: f64,
    pub reliability: f64,
}

impl Anchor {
    /// Recomputes `reliability` with another model reliability controller.
    pub fn rescored(&self, flc1: &FlcSpec) -> Result<Anchor, FuzzyError> {
        Ok(Anchor { reliability: flc1.infer(self.z_score, self.k_score)?, ..self.clone() })
    }
}

/// Calibration measurements for one anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSet {
    pub id: AnchorId,
    pub position: Point,
    pub points: Vec<CalibrationPoint>,
}

/// Closeness of a fitted slope to the population median, on `[0, 100]`.
pub fn z_score(z: f64, median_z: f64) -> f64 {
    if median_z == 0.0 {
        return if z == 0.0 { 100.0 } else { 0.0 };
    }
    100.0 * (1.0 - (z - median_z).abs() / median_z.abs()).max(0.0)
}

/// Closeness of a fitted intercept to the population median, on `[0, 1]`.
pub fn k_score(k: f64, median_k: f64) -> f64 {
    (1.0 - (k - median_k).abs() / median_k.abs().max(1e-9)).max(0.0)
}

/// Scores already-fitted models against their medians.
pub fn score_anchors(
    fitted: &[(AnchorId, Point, PathLossModel)],
    flc1: &FlcSpec,
) -> Result<Vec<Anchor>, LocalizationError> {
    let zs: Vec<f64> = fitted.iter().map(|f| f.2.z).collect();
    let ks: Vec<f64> = fitted.iter().map(|f| f.2.k).collect();
    let median_z = lower_median(&zs).ok_or(LocalizationError::MedianUndefined)?;
    let median_k = lower_median(&ks).ok_or(LocalizationError::MedianUndefined)?;
    fitted
        .iter()
        .map(|&(id, position, model)| {
            let zs = z_score(model.z, median_z);
            let ks = k_score(model.k, median_k);
            Ok(Anchor { id, position, model, z_score: zs, k_score: ks, reliability: flc1.infer(zs, ks)? })
        })
        .collect()
}

/// Fits every anchor's channel and assigns its model reliability index.
pub fn offline_calibrate(sets: &[CalibrationSet], flc1: &FlcSpec) -> Result<Vec<Anchor>, LocalizationError> {
    if sets.is_empty() {
        return Err(LocalizationError::MedianUndefined);
    }
    let fitted = sets
        .iter()
        .map(|s| {
            channel::fit_path_loss(&s.points)
                .map(|m| (s.id, s.position, m))
                .map_err(|source| LocalizationError::Channel { anchor: s.id, source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    score_anchors(&fitted, flc1)
}

/// `|ŵ − w(i,j)|` for every cell.
pub fn build_error_map(grid: &GridMap, anchor: &Anchor, w_hat: f64) -> Result<ErrorMap, LocalizationError> {
    if w_hat < 0.0 {
        return Err(LocalizationError::NegativeDistance(w_hat));
    }
    let values = (0..grid.cell_count())
        .map(|idx| {
            let (i, j) = grid.cell_of_index(idx);
            (w_hat - grid.center_unchecked(i, j).distance(&anchor.position)).abs()
        })
        .collect();
    Ok(CellMap { grid: *grid, values })
}

/// Total reliability index `I_n` of an anchor given its proximity index.
pub fn total_reliability(anchor: &Anchor, proximity: f64, flc2: &FlcSpec) -> Result<f64, FuzzyError> {
    flc2.infer(anchor.reliability, proximity)
}

/// `W(i,j) = Σ_n I_n (ŵ_n − ‖c(i,j) − p_n‖)²`.
pub fn aggregate_map(
    grid: &GridMap,
    positions: &[Point],
    w_hat: &[f64],
    weights: &[f64],
    exec: Execution,
) -> Result<CellMap, LocalizationError> {
    if positions.len() != w_hat.len() || positions.len() != weights.len() {
        return Err(LocalizationError::MismatchedLengths("anchors, distances and weights"));
    }
    let values = exec.map_indexed(grid.cell_count(), |idx| {
        let (i, j) = grid.cell_of_index(idx);
        let c = grid.center_unchecked(i, j);
        positions
            .iter()
            .zip(w_hat)
            .zip(weights)
            .map(|((p, w), weight)| {
                let r = w - c.distance(p);
                weight * r * r
            })
            .sum()
    });
    Ok(CellMap { grid: *grid, values })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorContribution {
    pub id: AnchorId,
    pub w_hat: f64,
    pub i_n: f64,
}

/// A localization result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fix {
    pub cell: [usize; 2],
    pub position: Point,
    pub w_min: f64,
    pub per_anchor: Vec<AnchorContribution>,
}

impl Fix {
    pub fn from_map(map: &CellMap, per_anchor: Vec<AnchorContribution>) -> Fix {
        let ((i, j), w_min) = map.argmin();
        Fix { cell: [i, j], position: map.grid.center_unchecked(i, j), w_min, per_anchor }
    }
}

/// Online stage from per-anchor aggregated RSSI (after filtering).
///
/// Anchors absent from `rssi` are skipped.
pub fn locate_aggregated(
    grid: &GridMap,
    anchors: &[Anchor],
    rssi: &BTreeMap<AnchorId, f64>,
    flc2: &FlcSpec,
    exec: Execution,
) -> Result<Fix, LocalizationError> {
    let used: Vec<(&Anchor, f64)> = anchors.iter().filter_map(|a| rssi.get(&a.id).map(|&r| (a, r))).collect();
    if used.is_empty() {
        return Err(LocalizationError::NoUsableSamples);
    }
    let all: Vec<f64> = used.iter().map(|(_, r)| *r).collect();

    let mut positions = Vec::with_capacity(used.len());
    let mut w_hat = Vec::with_capacity(used.len());
    let mut weights = Vec::with_capacity(used.len());
    let mut per_anchor = Vec::with_capacity(used.len());
    for &(anchor, r) in &used {
        let err = |source| LocalizationError::Channel { anchor: anchor.id, source };
        let w = anchor.model.estimate_distance(r).map_err(err)?;
        let proximity = channel::proximity_index(r, &all).map_err(err)?;
        let i_n = total_reliability(anchor, proximity, flc2)?;
        positions.push(anchor.position);
        w_hat.push(w);
        weights.push(i_n);
        per_anchor.push(AnchorContribution { id: anchor.id, w_hat: w, i_n });
    }
    if weights.iter().all(|&w| w == 0.0) {
        return Err(LocalizationError::AllWeightsZero);
    }
    let map = aggregate_map(grid, &positions, &w_hat, &weights, exec)?;
    Ok(Fix::from_map(&map, per_anchor))
}

/// Full online stage: filter, aggregate, estimate distances, weight, search.
pub fn locate(
    grid: &GridMap,
    anchors: &[Anchor],
    samples: &[RssiSample],
    flc2: &FlcSpec,
    exec: Execution,
) -> Result<Fix, LocalizationError> {
    if samples.is_empty() {
        return Err(LocalizationError::NoUsableSamples);
    }
    let rssi = channel::filtered_means(samples)
        .map_err(|source| LocalizationError::Channel { anchor: samples[0].anchor_id, source })?;
    locate_aggregated(grid, anchors, &rssi, flc2, exec)
}
