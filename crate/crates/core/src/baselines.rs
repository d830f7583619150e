//! Comparison localizers working on distance estimates: MinMax,
//! equal-variance grid maximum likelihood and linearized trilateration.

use thiserror::Error;

use crate::channel::AnchorId;
use crate::exec::Execution;
use crate::geometry::Point;
use crate::localization::{aggregate_map, AnchorContribution, Fix, GridMap};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BaselineError {
    #[error("need at least {needed} anchors, got {got}")]
    TooFewAnchors { needed: usize, got: usize },
    #[error("anchors are collinear; trilateration is singular")]
    CollinearAnchors,
    #[error("{anchors} anchors but {distances} distances")]
    LengthMismatch { anchors: usize, distances: usize },
    #[error("negative distance {0}")]
    NegativeDistance(f64),
}

fn check(anchors: &[Point], distances: &[f64], needed: usize) -> Result<(), BaselineError> {
    if anchors.len() != distances.len() {
        return Err(BaselineError::LengthMismatch { anchors: anchors.len(), distances: distances.len() });
    }
    if anchors.len() < needed {
        return Err(BaselineError::TooFewAnchors { needed, got: anchors.len() });
    }
    if let Some(&d) = distances.iter().find(|d| !(**d >= 0.0)) {
        return Err(BaselineError::NegativeDistance(d));
    }
    Ok(())
}

/// Center of the intersection of the boxes `[x ± d] × [y ± d]`.
///
/// When the boxes do not intersect the bounds cross; the midpoint of the
/// crossed bounds is still returned.
pub fn minmax_locate(anchors: &[Point], distances: &[f64]) -> Result<Point, BaselineError> {
    check(anchors, distances, 2)?;
    let mut lo = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut hi = Point::new(f64::INFINITY, f64::INFINITY);
    for (p, d) in anchors.iter().zip(distances) {
        lo.x = lo.x.max(p.x - d);
        lo.y = lo.y.max(p.y - d);
        hi.x = hi.x.min(p.x + d);
        hi.y = hi.y.min(p.y + d);
    }
    Ok(Point::new(0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y)))
}

/// Linearized least squares: subtract the first circle from the others and
/// solve the `(n−1) × 2` system through its normal equations.
pub fn trilaterate(anchors: &[Point], distances: &[f64]) -> Result<Point, BaselineError> {
    check(anchors, distances, 3)?;
    let (p0, d0) = (anchors[0], distances[0]);
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (p, d) in anchors.iter().zip(distances).skip(1) {
        let ax = 2.0 * (p.x - p0.x);
        let ay = 2.0 * (p.y - p0.y);
        let rhs = d0 * d0 - d * d + p.x * p.x - p0.x * p0.x + p.y * p.y - p0.y * p0.y;
        a11 += ax * ax;
        a12 += ax * ay;
        a22 += ay * ay;
        b1 += ax * rhs;
        b2 += ay * rhs;
    }
    let det = a11 * a22 - a12 * a12;
    if det.abs() <= 1e-9 * (a11 * a22).max(f64::MIN_POSITIVE) {
        return Err(BaselineError::CollinearAnchors);
    }
    Ok(Point::new((a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det))
}

/// Grid search of `Σ (d_n − ‖c(i,j) − p_n‖)²`, same tie rule as the fuzzy
/// localizer. `per_anchor` carries unit weights.
pub fn ml_locate(
    grid: &GridMap,
    anchors: &[(AnchorId, Point)],
    distances: &[f64],
    exec: Execution,
) -> Result<Fix, BaselineError> {
    let positions: Vec<Point> = anchors.iter().map(|a| a.1).collect();
    check(&positions, distances, 2)?;
    let ones = vec![1.0; positions.len()];
    let map = aggregate_map(grid, &positions, distances, &ones, exec).expect("lengths checked");
    let per_anchor =
        anchors.iter().zip(distances).map(|(a, &w_hat)| AnchorContribution { id: a.0, w_hat, i_n: 1.0 }).collect();
    Ok(Fix::from_map(&map, per_anchor))
}
