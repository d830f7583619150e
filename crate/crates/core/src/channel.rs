//! Log-distance RSSI channel: `rssi = z * log10(w) + k`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::nearest_rank;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("need at least 2 distinct calibration distances, got {distinct}")]
    InsufficientData { distinct: usize },
    #[error("degenerate least-squares fit: all log-distances are equal")]
    DegenerateFit,
    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),
    #[error("path-loss slope is zero; distance cannot be inverted")]
    ZeroSlope,
    #[error("empty input")]
    EmptyInput,
    #[error("RSSI of exactly 0 dB has no proximity ratio")]
    ZeroRssi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AnchorId(pub u32);

impl fmt::Display for AnchorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Fitted or true channel parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLossModel {
    /// Slope in dB per decade of distance; negative for a physical channel.
    pub z: f64,
    /// Intercept in dB, i.e. the RSSI at 1 m.
    pub k: f64,
}

impl PathLossModel {
    pub const fn new(z: f64, k: f64) -> Self {
        Self { z, k }
    }

    /// A positive slope means the signal strengthens with distance.
    pub fn is_physical(&self) -> bool {
        self.z < 0.0
    }

    pub fn predict_rssi(&self, distance: f64) -> Result<f64, ChannelError> {
        if !(distance > 0.0) {
            return Err(ChannelError::NonPositiveDistance(distance));
        }
        Ok(self.z * distance.log10() + self.k)
    }

    pub fn estimate_distance(&self, rssi: f64) -> Result<f64, ChannelError> {
        if self.z == 0.0 {
            return Err(ChannelError::ZeroSlope);
        }
        Ok(10f64.powf((rssi - self.k) / self.z))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub distance: f64,
    pub rssi: f64,
}

impl CalibrationPoint {
    pub const fn new(distance: f64, rssi: f64) -> Self {
        Self { distance, rssi }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RssiSample {
    pub anchor_id: AnchorId,
    pub rssi: f64,
    pub sequence: u32,
}

/// Ordinary least squares of RSSI against `log10(distance)`.
pub fn fit_path_loss(points: &[CalibrationPoint]) -> Result<PathLossModel, ChannelError> {
    if let Some(p) = points.iter().find(|p| !(p.distance > 0.0)) {
        return Err(ChannelError::NonPositiveDistance(p.distance));
    }
    let mut distances: Vec<f64> = points.iter().map(|p| p.distance).collect();
    distances.sort_by(f64::total_cmp);
    distances.dedup();
    if distances.len() < 2 {
        return Err(ChannelError::InsufficientData { distinct: distances.len() });
    }

    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.distance.log10()).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.rssi).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for p in points {
        let dx = p.distance.log10() - mean_x;
        sxx += dx * dx;
        sxy += dx * (p.rssi - mean_y);
    }
    if sxx == 0.0 {
        return Err(ChannelError::DegenerateFit);
    }
    let z = sxy / sxx;
    Ok(PathLossModel { z, k: mean_y - z * mean_x })
}

/// Keeps the samples at or below the 25th percentile of `|rssi|`, i.e. the
/// strongest quarter. Longer multipath routes only ever weaken a signal.
pub fn filter_samples(samples: &[RssiSample]) -> Result<Vec<RssiSample>, ChannelError> {
    if samples.is_empty() {
        return Err(ChannelError::EmptyInput);
    }
    let mut mags: Vec<f64> = samples.iter().map(|s| s.rssi.abs()).collect();
    mags.sort_by(f64::total_cmp);
    let threshold = mags[nearest_rank(0.25, mags.len()) - 1];
    Ok(samples.iter().filter(|s| s.rssi.abs() <= threshold).copied().collect())
}

/// Mean RSSI per anchor, keyed by anchor id.
pub fn aggregate_rssi(filtered: &[RssiSample]) -> Result<BTreeMap<AnchorId, f64>, ChannelError> {
    if filtered.is_empty() {
        return Err(ChannelError::EmptyInput);
    }
    let mut acc: BTreeMap<AnchorId, (f64, usize)> = BTreeMap::new();
    for s in filtered {
        let e = acc.entry(s.anchor_id).or_insert((0.0, 0));
        e.0 += s.rssi;
        e.1 += 1;
    }
    Ok(acc.into_iter().map(|(id, (sum, n))| (id, sum / n as f64)).collect())
}

/// Groups raw samples by anchor, filters each group and returns the mean
/// of what survives.
pub fn filtered_means(samples: &[RssiSample]) -> Result<BTreeMap<AnchorId, f64>, ChannelError> {
    let mut groups: BTreeMap<AnchorId, Vec<RssiSample>> = BTreeMap::new();
    for s in samples {
        groups.entry(s.anchor_id).or_default().push(*s);
    }
    let mut kept = Vec::with_capacity(samples.len());
    for group in groups.values() {
        kept.extend(filter_samples(group)?);
    }
    aggregate_rssi(&kept)
}

/// Strongest absolute RSSI over `all_rssi` divided by `|rssi_n|`.
pub fn proximity_index(rssi_n: f64, all_rssi: &[f64]) -> Result<f64, ChannelError> {
    if rssi_n == 0.0 || all_rssi.contains(&0.0) {
        return Err(ChannelError::ZeroRssi);
    }
    let strongest = all_rssi.iter().fold(rssi_n.abs(), |m, r| m.min(r.abs()));
    Ok(strongest / rssi_n.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MODEL: PathLossModel = PathLossModel::new(-20.0, -40.0);

    fn sample(id: u32, rssi: f64, sequence: u32) -> RssiSample {
        RssiSample { anchor_id: AnchorId(id), rssi, sequence }
    }

    #[test]
    fn two_point_fit() {
        let m = fit_path_loss(&[CalibrationPoint::new(1.0, -40.0), CalibrationPoint::new(10.0, -60.0)]).unwrap();
        assert!((m.z + 20.0).abs() < 1e-12);
        assert!((m.k + 40.0).abs() < 1e-12);
    }

    #[test]
    fn noiseless_fit_recovers_model() {
        let pts: Vec<_> = [0.5, 1.0, 2.0, 4.5, 9.0]
            .iter()
            .map(|&d| CalibrationPoint::new(d, MODEL.predict_rssi(d).unwrap()))
            .collect();
        let m = fit_path_loss(&pts).unwrap();
        assert!((m.z - MODEL.z).abs() < 1e-9);
        assert!((m.k - MODEL.k).abs() < 1e-9);
    }

    #[test]
    fn fit_errors() {
        assert_eq!(
            fit_path_loss(&[CalibrationPoint::new(1.0, -40.0), CalibrationPoint::new(1.0, -41.0)]),
            Err(ChannelError::InsufficientData { distinct: 1 })
        );
        assert_eq!(fit_path_loss(&[]), Err(ChannelError::InsufficientData { distinct: 0 }));
        assert_eq!(
            fit_path_loss(&[CalibrationPoint::new(0.0, -40.0), CalibrationPoint::new(1.0, -41.0)]),
            Err(ChannelError::NonPositiveDistance(0.0))
        );
    }

    #[test]
    fn predict_and_invert() {
        assert_eq!(MODEL.predict_rssi(1.0).unwrap(), -40.0);
        assert!((MODEL.predict_rssi(10.0).unwrap() + 60.0).abs() < 1e-12);
        assert_eq!(MODEL.predict_rssi(0.0), Err(ChannelError::NonPositiveDistance(0.0)));
        assert_eq!(MODEL.estimate_distance(-40.0).unwrap(), 1.0);
        assert!((MODEL.estimate_distance(-60.0).unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(PathLossModel::new(0.0, -40.0).estimate_distance(-50.0), Err(ChannelError::ZeroSlope));
    }

    #[test]
    fn filter_keeps_strongest_quarter() {
        let samples: Vec<_> = (41..=48).map(|m| sample(1, -(m as f64), m)).collect();
        let kept = filter_samples(&samples).unwrap();
        let mags: Vec<f64> = kept.iter().map(|s| s.rssi.abs()).collect();
        assert_eq!(mags, vec![41.0, 42.0]);

        // order preserved
        let shuffled = [sample(1, -45.0, 0), sample(1, -42.0, 1), sample(1, -48.0, 2), sample(1, -41.0, 3)];
        let kept = filter_samples(&shuffled).unwrap();
        assert_eq!(kept, vec![sample(1, -41.0, 3)]);

        assert_eq!(filter_samples(&[sample(1, -50.0, 0)]).unwrap(), vec![sample(1, -50.0, 0)]);
        assert_eq!(filter_samples(&[]), Err(ChannelError::EmptyInput));
    }

    #[test]
    fn aggregate_examples() {
        let m = aggregate_rssi(&[sample(1, -40.0, 0), sample(1, -42.0, 1)]).unwrap();
        assert_eq!(m[&AnchorId(1)], -41.0);
        let m = aggregate_rssi(&[sample(1, -40.0, 0)]).unwrap();
        assert_eq!(m[&AnchorId(1)], -40.0);
        let m = aggregate_rssi(&[sample(2, -50.0, 0), sample(1, -40.0, 0), sample(2, -54.0, 1), sample(1, -44.0, 1)])
            .unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m[&AnchorId(1)], -42.0);
        assert_eq!(m[&AnchorId(2)], -52.0);
        assert_eq!(aggregate_rssi(&[]), Err(ChannelError::EmptyInput));
    }

    #[test]
    fn proximity_examples() {
        assert_eq!(proximity_index(-40.0, &[-40.0, -60.0]).unwrap(), 1.0);
        assert_eq!(proximity_index(-80.0, &[-40.0, -80.0]).unwrap(), 0.5);
        assert_eq!(proximity_index(0.0, &[-40.0]), Err(ChannelError::ZeroRssi));
    }

    /// Percentile oracle: counts how many values sit at or below each candidate.
    fn oracle_quartile_threshold(mags: &[f64]) -> f64 {
        let n = mags.len();
        let need = n.div_ceil(4);
        *mags
            .iter()
            .filter(|&&c| mags.iter().filter(|&&v| v <= c).count() >= need)
            .min_by(|a, b| a.total_cmp(b))
            .unwrap()
    }

    proptest! {
        #[test]
        fn round_trip(w in 0.1f64..100.0, z in -60.0f64..-5.0, k in -80.0f64..0.0) {
            let m = PathLossModel::new(z, k);
            let back = m.estimate_distance(m.predict_rssi(w).unwrap()).unwrap();
            prop_assert!(((back - w) / w).abs() < 1e-12);
        }

        #[test]
        fn exact_data_fit(z in -60.0f64..-5.0, k in -80.0f64..0.0, n in 2usize..12) {
            let m = PathLossModel::new(z, k);
            let pts: Vec<_> = (0..n)
                .map(|i| { let d = 0.3 + 1.7 * i as f64; CalibrationPoint::new(d, m.predict_rssi(d).unwrap()) })
                .collect();
            let fit = fit_path_loss(&pts).unwrap();
            prop_assert!((fit.z - z).abs() < 1e-9);
            prop_assert!((fit.k - k).abs() < 1e-9);
        }

        #[test]
        fn filter_is_subset_and_split(values in proptest::collection::vec(-90.0f64..-30.0, 1..60)) {
            let samples: Vec<_> = values.iter().enumerate().map(|(i, &v)| sample(3, v, i as u32)).collect();
            let kept = filter_samples(&samples).unwrap();
            prop_assert!(!kept.is_empty());
            prop_assert!(kept.iter().all(|s| samples.contains(s)));
            let mags: Vec<f64> = values.iter().map(|v| v.abs()).collect();
            let threshold = oracle_quartile_threshold(&mags);
            prop_assert!(kept.iter().all(|s| s.rssi.abs() <= threshold));
            let max_kept = kept.iter().map(|s| s.rssi.abs()).fold(0.0, f64::max);
            let min_dropped = samples.iter().filter(|s| !kept.contains(s)).map(|s| s.rssi.abs()).fold(f64::INFINITY, f64::min);
            prop_assert!(max_kept <= min_dropped);
        }

        #[test]
        fn proximity_range(values in proptest::collection::vec(-90.0f64..-30.0, 1..12), pick in 0usize..12) {
            let n = values[pick % values.len()];
            let p = proximity_index(n, &values).unwrap();
            prop_assert!(p > 0.0 && p <= 1.0);
            let strongest = values.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
            prop_assert_eq!(p == 1.0, n.abs() == strongest);
        }
    }
}
