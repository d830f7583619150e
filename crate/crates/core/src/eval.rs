//! Localization error statistics, empirical CDFs and the anchor-count sweep.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;
use crate::fuzzy::FlcSpec;
use crate::simulator::{self, Algorithm, NoiseModel, Placement, Room, SimError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("empty input")]
    EmptyInput,
    #[error("probability {0} outside (0, 1]")]
    InvalidProbability(f64),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// 1-based nearest-rank index `⌈p·n⌉`, at least 1.
///
/// The product is nudged down by a relative 1e-12 so that values like
/// `0.1 * 30` (3.0000000000000004 in binary) are not bumped a rank.
pub fn nearest_rank(p: f64, n: usize) -> usize {
    let r = (p * n as f64 * (1.0 - 1e-12)).ceil() as usize;
    r.clamp(1, n.max(1))
}

/// Lower of the two central order statistics for even lengths.
pub fn lower_median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(v[nearest_rank(0.5, v.len()) - 1])
}

/// Average error, median error and sample standard deviation, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub ae: f64,
    pub me: f64,
    pub sd: f64,
}

pub fn compute_stats(errors: &[f64]) -> Result<ErrorStats, EvalError> {
    if errors.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let n = errors.len() as f64;
    let ae = errors.iter().sum::<f64>() / n;
    let sd =
        if errors.len() > 1 { (errors.iter().map(|e| (e - ae).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
    Ok(ErrorStats { ae, me: lower_median(errors).expect("non-empty"), sd })
}

/// Step-function CDF over a sample of errors.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(errors: &[f64]) -> Result<Self, EvalError> {
        if errors.is_empty() {
            return Err(EvalError::EmptyInput);
        }
        let mut sorted = errors.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    pub fn sorted_errors(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of errors `<= e`.
    pub fn eval(&self, e: f64) -> f64 {
        let count = self.sorted.partition_point(|&x| x <= e);
        count as f64 / self.sorted.len() as f64
    }

    /// Nearest-rank quantile.
    pub fn quantile(&self, p: f64) -> Result<f64, EvalError> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(EvalError::InvalidProbability(p));
        }
        Ok(self.sorted[nearest_rank(p, self.sorted.len()) - 1])
    }

    /// `(error, F(error))` at every distinct jump.
    pub fn step_points(&self) -> Vec<(f64, f64)> {
        let n = self.sorted.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (idx, &e) in self.sorted.iter().enumerate() {
            let f = (idx + 1) as f64 / n;
            match out.last_mut() {
                Some(last) if last.0 == e => last.1 = f,
                _ => out.push((e, f)),
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("error,probability\n");
        for (e, p) in self.step_points() {
            out.push_str(&format!("{},{}\n", crate::io::fmt_num(e), crate::io::fmt_num(p)));
        }
        out
    }
}

pub fn empirical_cdf(errors: &[f64]) -> Result<EmpiricalCdf, EvalError> {
    EmpiricalCdf::new(errors)
}

/// Confidence levels reported alongside the statistics.
pub const CONFIDENCE_LEVELS: [f64; 3] = [0.1, 0.5, 0.9];

/// Stats record as written by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub algorithm: String,
    pub ae: f64,
    pub me: f64,
    pub sd: f64,
    pub q10: f64,
    pub q50: f64,
    pub q90: f64,
}

impl StatsReport {
    pub fn new(algorithm: impl Into<String>, errors: &[f64]) -> Result<Self, EvalError> {
        let s = compute_stats(errors)?;
        let cdf = EmpiricalCdf::new(errors)?;
        let [q10, q50, q90] = CONFIDENCE_LEVELS.map(|p| cdf.quantile(p).expect("valid level"));
        Ok(Self { algorithm: algorithm.into(), ae: s.ae, me: s.me, sd: s.sd, q10, q50, q90 })
    }
}

/// Everything about the sweep scenario except the anchor count and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTemplate {
    pub room: Room,
    pub n_positions: usize,
    pub samples_per_position: usize,
    pub noise: NoiseModel,
    pub cell_side: f64,
    #[serde(default)]
    pub placement: Placement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n_anchors: usize,
    pub algorithm: String,
    pub mean_error: f64,
}

/// A named localizer configuration for the sweep.
#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub label: String,
    pub algorithm: Algorithm,
    pub flc1: FlcSpec,
    pub flc2: FlcSpec,
}

/// Mean error (over all positions and seeds) per anchor count and entry.
/// Rows come out ordered by count, then entry order.
pub fn beacon_sweep(
    template: &SweepTemplate,
    counts: &[usize],
    entries: &[SweepEntry],
    seeds: &[u64],
    exec: Execution,
) -> Result<Vec<SweepRow>, EvalError> {
    if counts.is_empty() || seeds.is_empty() || entries.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let jobs: Vec<(usize, u64)> = counts.iter().flat_map(|&c| seeds.iter().map(move |&s| (c, s))).collect();
    let per_job = exec.map_slice(&jobs, |&(count, seed)| -> Result<Vec<f64>, SimError> {
        let scenario = simulator::generate_scenario_placed(
            template.room,
            template.placement,
            count,
            template.n_positions,
            template.samples_per_position,
            template.noise,
            seed,
        )?;
        let survey = simulator::survey(&scenario, Execution::Sequential)?;
        let grid = survey.grid(template.cell_side)?;
        entries
            .iter()
            .map(|e| {
                let records = survey.evaluate(&grid, e.algorithm, &e.flc1, &e.flc2, Execution::Sequential)?;
                Ok(records.iter().map(|r| r.error).sum::<f64>() / records.len() as f64)
            })
            .collect()
    });
    let per_job = per_job.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::with_capacity(counts.len() * entries.len());
    for (ci, &count) in counts.iter().enumerate() {
        let block = &per_job[ci * seeds.len()..(ci + 1) * seeds.len()];
        for (ei, e) in entries.iter().enumerate() {
            let mean = block.iter().map(|r| r[ei]).sum::<f64>() / seeds.len() as f64;
            rows.push(SweepRow { n_anchors: count, algorithm: e.label.clone(), mean_error: mean });
        }
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("n_anchors,algorithm,mean_error\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.n_anchors, r.algorithm, crate::io::fmt_num(r.mean_error)));
    }
    out
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut start = 0;
        while start < idx.len() {
            let mut end = start;
            while end + 1 < idx.len() && v[idx[end + 1]] == v[idx[start]] {
                end += 1;
            }
            let avg = (start + end) as f64 / 2.0 + 1.0;
            for &k in &idx[start..=end] {
                r[k] = avg;
            }
            start = end + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn stats_examples() {
        assert_eq!(compute_stats(&[1.0, 2.0, 3.0]).unwrap(), ErrorStats { ae: 2.0, me: 2.0, sd: 1.0 });
        assert_eq!(compute_stats(&[5.0]).unwrap(), ErrorStats { ae: 5.0, me: 5.0, sd: 0.0 });
        assert_eq!(compute_stats(&[]), Err(EvalError::EmptyInput));
        // lower median for even counts
        assert_eq!(compute_stats(&[4.0, 1.0, 3.0, 2.0]).unwrap().me, 2.0);
    }

    #[test]
    fn quantile_examples() {
        let cdf = empirical_cdf(&[3.0, 1.0, 4.0, 2.0]).unwrap();
        assert_eq!(cdf.quantile(1.0).unwrap(), 4.0);
        assert_eq!(cdf.quantile(0.5).unwrap(), 2.0);
        assert_eq!(cdf.eval(4.0), 1.0);
        assert_eq!(cdf.eval(0.5), 0.0);
        assert_eq!(cdf.eval(2.5), 0.5);
        assert_eq!(cdf.quantile(0.0), Err(EvalError::InvalidProbability(0.0)));
        assert_eq!(cdf.quantile(1.5), Err(EvalError::InvalidProbability(1.5)));
        assert!(empirical_cdf(&[]).is_err());
    }

    #[test]
    fn nearest_rank_resists_float_noise() {
        assert_eq!(nearest_rank(0.1, 30), 3);
        assert_eq!(nearest_rank(0.25, 8), 2);
        assert_eq!(nearest_rank(0.25, 9), 3);
        assert_eq!(nearest_rank(0.9, 20), 18);
        assert_eq!(nearest_rank(0.01, 5), 1);
    }

    #[test]
    fn step_points_merge_ties() {
        let cdf = empirical_cdf(&[1.0, 1.0, 2.0]).unwrap();
        let pts = cdf.step_points();
        assert_eq!(pts.len(), 2);
        assert!((pts[0].1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(pts[1], (2.0, 1.0));
        assert!(cdf.to_csv().starts_with("error,probability\n"));
    }

    #[test]
    fn spearman_basic() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]) - 1.0).abs() < 1e-12);
    }

    fn naive_stats(v: &[f64]) -> (f64, f64, f64) {
        let mut s = v.to_vec();
        // insertion sort, deliberately unrelated to the library path
        for i in 1..s.len() {
            let mut j = i;
            while j > 0 && s[j - 1] > s[j] {
                s.swap(j - 1, j);
                j -= 1;
            }
        }
        let n = v.len();
        let mut total = 0.0;
        for x in v {
            total += x;
        }
        let mean = total / n as f64;
        let me = s[(n - 1) / 2];
        let mut ss = 0.0;
        for x in v {
            ss += (x - mean) * (x - mean);
        }
        let sd = if n > 1 { (ss / (n as f64 - 1.0)).sqrt() } else { 0.0 };
        (mean, me, sd)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn stats_match_naive(v in proptest::collection::vec(0.0f64..20.0, 1..50)) {
            let s = compute_stats(&v).unwrap();
            let (ae, me, sd) = naive_stats(&v);
            prop_assert!((s.ae - ae).abs() < 1e-12);
            prop_assert_eq!(s.me, me);
            prop_assert!((s.sd - sd).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn cdf_properties(v in proptest::collection::vec(0.0f64..20.0, 1..50), p in 0.001f64..1.0) {
            let cdf = empirical_cdf(&v).unwrap();
            let pts = cdf.step_points();
            prop_assert!(pts.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1));
            let max = v.iter().cloned().fold(f64::MIN, f64::max);
            let min = v.iter().cloned().fold(f64::MAX, f64::min);
            prop_assert_eq!(cdf.eval(max), 1.0);
            let q = cdf.quantile(p).unwrap();
            prop_assert!(q >= min && q <= max);
            prop_assert_eq!(cdf.quantile(1.0).unwrap(), max);
            prop_assert_eq!(cdf.quantile(0.5).unwrap(), compute_stats(&v).unwrap().me);
        }
    }
}
