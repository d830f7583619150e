//! Seeded stand-in for a physical testbed: a rectangular room, anchors on
//! a ceiling grid, and RSSI samples drawn from the log-distance model with
//! Gaussian noise and occasional multipath attenuation.
//!
//! Every random draw comes from a ChaCha8 stream keyed by
//! `(seed, purpose, index, anchor)`, so results do not depend on the order
//! in which positions are processed.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{self, BaselineError};
use crate::channel::{self, AnchorId, CalibrationPoint, ChannelError, PathLossModel, RssiSample};
use crate::exec::Execution;
use crate::fuzzy::FlcSpec;
use crate::geometry::Point;
use crate::localization::{self, Anchor, CalibrationSet, Fix, GridMap, LocalizationError};
pub use crate::rng::substream;

pub const DEFAULT_MODEL: PathLossModel = PathLossModel::new(-20.0, -40.0);
pub const DEFAULT_SAMPLES_PER_POSITION: usize = 30;
/// Distances (m) at which each anchor is calibrated.
pub const CALIBRATION_DISTANCES: [f64; 8] = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];

const TAG_POSITIONS: u64 = 1;
const TAG_CALIBRATION: u64 = 2;
const TAG_SAMPLES: u64 = 3;
const TAG_ANCHORS: u64 = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid room {0}x{1}")]
    InvalidRoom(f64, f64),
    #[error("invalid noise model: {0}")]
    InvalidNoise(String),
    #[error("scenario needs at least one anchor")]
    NoAnchors,
    #[error("position {position:?} coincides with anchor {anchor}")]
    ZeroDistance { anchor: AnchorId, position: Point },
    #[error("position {0:?} is outside the room")]
    OutsideRoom(Point),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Localization(#[from] LocalizationError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Room {
    pub width: f64,
    pub height: f64,
}

impl Room {
    pub const fn new(width: f64, height: f64) -> Self {
        Self { width, height }
    }

    fn check(&self) -> Result<(), SimError> {
        if self.width > 0.0 && self.height > 0.0 && self.width.is_finite() && self.height.is_finite() {
            Ok(())
        } else {
            Err(SimError::InvalidRoom(self.width, self.height))
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }
}

impl From<[f64; 2]> for Room {
    fn from([w, h]: [f64; 2]) -> Self {
        Self::new(w, h)
    }
}

impl From<Room> for [f64; 2] {
    fn from(r: Room) -> Self {
        [r.width, r.height]
    }
}

/// Gaussian dB noise plus, with probability `p_multipath`, an extra
/// attenuation drawn uniformly from `attenuation`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub sigma_db: f64,
    pub p_multipath: f64,
    pub attenuation: [f64; 2],
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self { sigma_db: 1.0, p_multipath: 0.2, attenuation: [2.0, 10.0] }
    }
}

impl NoiseModel {
    pub const NOISELESS: NoiseModel = NoiseModel { sigma_db: 0.0, p_multipath: 0.0, attenuation: [0.0, 0.0] };

    fn check(&self) -> Result<(), SimError> {
        let [lo, hi] = self.attenuation;
        if !(self.sigma_db >= 0.0) {
            return Err(SimError::InvalidNoise(format!("sigma_db {} < 0", self.sigma_db)));
        }
        if !(0.0..=1.0).contains(&self.p_multipath) {
            return Err(SimError::InvalidNoise(format!("p_multipath {} outside [0, 1]", self.p_multipath)));
        }
        if !(lo >= 0.0 && lo <= hi) {
            return Err(SimError::InvalidNoise(format!("attenuation [{lo}, {hi}] must satisfy 0 <= lo <= hi")));
        }
        Ok(())
    }

    fn draw(&self, rng: &mut impl Rng) -> f64 {
        let gauss: f64 = rng.sample(StandardNormal);
        let hit = rng.gen::<f64>() < self.p_multipath;
        let u = rng.gen::<f64>();
        let [lo, hi] = self.attenuation;
        let loss = if hit { lo + (hi - lo) * u } else { 0.0 };
        self.sigma_db * gauss - loss
    }
}

/// An anchor with its true channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioAnchor {
    pub id: AnchorId,
    pub pos: Point,
    pub z: f64,
    pub k: f64,
}

impl ScenarioAnchor {
    pub fn model(&self) -> PathLossModel {
        PathLossModel::new(self.z, self.k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub room: Room,
    pub anchors: Vec<ScenarioAnchor>,
    pub noise: NoiseModel,
    pub test_positions: Vec<Point>,
    pub samples_per_position: usize,
    pub seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), SimError> {
        self.room.check()?;
        self.noise.check()?;
        if self.anchors.is_empty() {
            return Err(SimError::NoAnchors);
        }
        if let Some(p) = self.test_positions.iter().find(|p| !self.room.contains(**p)) {
            return Err(SimError::OutsideRoom(*p));
        }
        Ok(())
    }
}

/// Near-square ceiling grid: `cols = ⌈√n⌉`, `rows = ⌈n/cols⌉`, slot
/// `(c, r)` at `((c + ½)·W/cols, (r + ½)·H/rows)`, filled row by row.
pub fn anchor_layout(room: Room, n: usize) -> Vec<Point> {
    if n == 0 {
        return Vec::new();
    }
    let cols = (n as f64).sqrt().ceil() as usize;
    let rows = n.div_ceil(cols);
    (0..n)
        .map(|s| {
            let (c, r) = (s % cols, s / cols);
            Point::new((c as f64 + 0.5) * room.width / cols as f64, (r as f64 + 0.5) * room.height / rows as f64)
        })
        .collect()
}

/// How anchors are laid out over the room.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    /// Ceiling grid, see [`anchor_layout`].
    #[default]
    Grid,
    /// Uniformly random positions drawn from the scenario seed.
    Random,
}

/// Scenario with ceiling-grid anchors (all on the default channel) and
/// `n_positions` uniformly drawn test positions.
pub fn generate_scenario(
    room: Room,
    n_anchors: usize,
    n_positions: usize,
    samples_per_position: usize,
    noise: NoiseModel,
    seed: u64,
) -> Result<Scenario, SimError> {
    generate_scenario_placed(room, Placement::Grid, n_anchors, n_positions, samples_per_position, noise, seed)
}

pub fn generate_scenario_placed(
    room: Room,
    placement: Placement,
    n_anchors: usize,
    n_positions: usize,
    samples_per_position: usize,
    noise: NoiseModel,
    seed: u64,
) -> Result<Scenario, SimError> {
    room.check()?;
    noise.check()?;
    if n_anchors == 0 {
        return Err(SimError::NoAnchors);
    }
    let layout = match placement {
        Placement::Grid => anchor_layout(room, n_anchors),
        Placement::Random => {
            let mut rng = substream(seed, &[TAG_ANCHORS]);
            (0..n_anchors).map(|_| Point::new(rng.gen::<f64>() * room.width, rng.gen::<f64>() * room.height)).collect()
        }
    };
    let anchors = layout
        .into_iter()
        .enumerate()
        .map(|(n, pos)| ScenarioAnchor { id: AnchorId(n as u32), pos, z: DEFAULT_MODEL.z, k: DEFAULT_MODEL.k })
        .collect();
    let mut rng = substream(seed, &[TAG_POSITIONS]);
    let test_positions =
        (0..n_positions).map(|_| Point::new(rng.gen::<f64>() * room.width, rng.gen::<f64>() * room.height)).collect();
    Ok(Scenario { room, anchors, noise, test_positions, samples_per_position, seed })
}

/// `n_samples` readings of every anchor at `position`, drawn from stream
/// `stream`. Output is grouped by anchor, in anchor order.
pub fn sample_rssi(
    scenario: &Scenario,
    position: Point,
    n_samples: usize,
    stream: u64,
) -> Result<Vec<RssiSample>, SimError> {
    let mut out = Vec::with_capacity(n_samples * scenario.anchors.len());
    for anchor in &scenario.anchors {
        let w = anchor.pos.distance(&position);
        if w == 0.0 {
            return Err(SimError::ZeroDistance { anchor: anchor.id, position });
        }
        let clean = anchor.model().predict_rssi(w)?;
        let mut rng = substream(scenario.seed, &[TAG_SAMPLES, stream, anchor.id.0 as u64]);
        out.extend((0..n_samples).map(|s| RssiSample {
            anchor_id: anchor.id,
            rssi: clean + scenario.noise.draw(&mut rng),
            sequence: s as u32,
        }));
    }
    Ok(out)
}

/// Noisy calibration readings for each anchor at [`CALIBRATION_DISTANCES`].
pub fn calibration_sets(scenario: &Scenario) -> Result<Vec<CalibrationSet>, SimError> {
    scenario
        .anchors
        .iter()
        .map(|a| {
            let mut rng = substream(scenario.seed, &[TAG_CALIBRATION, a.id.0 as u64]);
            let mut points = Vec::with_capacity(CALIBRATION_DISTANCES.len() * scenario.samples_per_position);
            for &d in &CALIBRATION_DISTANCES {
                let clean = a.model().predict_rssi(d)?;
                for _ in 0..scenario.samples_per_position.max(1) {
                    points.push(CalibrationPoint::new(d, clean + scenario.noise.draw(&mut rng)));
                }
            }
            Ok(CalibrationSet { id: a.id, position: a.pos, points })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Fuzzy,
    #[serde(rename = "minmax")]
    MinMax,
    #[serde(rename = "ml")]
    MaximumLikelihood,
    Trilateration,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] =
        [Algorithm::Fuzzy, Algorithm::MinMax, Algorithm::MaximumLikelihood, Algorithm::Trilateration];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Fuzzy => "fuzzy",
            Algorithm::MinMax => "minmax",
            Algorithm::MaximumLikelihood => "ml",
            Algorithm::Trilateration => "trilateration",
        }
    }

    pub fn parse(s: &str) -> Option<Algorithm> {
        Algorithm::ALL.into_iter().find(|a| a.name() == s)
    }
}

/// Filtered mean RSSI per anchor at one known position.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub truth: Point,
    pub rssi: BTreeMap<AnchorId, f64>,
}

/// Everything measured in a scenario: fitted channels and per-position
/// observations. Independent of the controllers, so it can be reused
/// across many localizer configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct Survey {
    pub room: Room,
    pub fitted: Vec<(AnchorId, Point, PathLossModel)>,
    pub observations: Vec<Observation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionRecord {
    pub index: usize,
    pub truth: Point,
    pub estimate: Point,
    pub error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fix: Option<Fix>,
}

/// Runs the offline calibration and collects observations at every test
/// position.
pub fn survey(scenario: &Scenario, exec: Execution) -> Result<Survey, SimError> {
    scenario.validate()?;
    let fitted = calibration_sets(scenario)?
        .into_iter()
        .map(|s| Ok((s.id, s.position, channel::fit_path_loss(&s.points)?)))
        .collect::<Result<Vec<_>, SimError>>()?;
    let observations = exec
        .map_indexed(scenario.test_positions.len(), |idx| -> Result<Observation, SimError> {
            let truth = scenario.test_positions[idx];
            let samples = sample_rssi(scenario, truth, scenario.samples_per_position, idx as u64)?;
            Ok(Observation { truth, rssi: channel::filtered_means(&samples)? })
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Survey { room: scenario.room, fitted, observations })
}

impl Survey {
    pub fn grid(&self, cell_side: f64) -> Result<GridMap, SimError> {
        Ok(GridMap::for_room(self.room.width, self.room.height, cell_side)?)
    }

    pub fn anchors(&self, flc1: &FlcSpec) -> Result<Vec<Anchor>, SimError> {
        Ok(localization::score_anchors(&self.fitted, flc1)?)
    }

    /// Localizes every observation with `algorithm`.
    pub fn evaluate(
        &self,
        grid: &GridMap,
        algorithm: Algorithm,
        flc1: &FlcSpec,
        flc2: &FlcSpec,
        exec: Execution,
    ) -> Result<Vec<PositionRecord>, SimError> {
        let anchors = self.anchors(flc1)?;
        self.evaluate_with_anchors(grid, algorithm, &anchors, flc2, exec)
    }

    pub fn evaluate_with_anchors(
        &self,
        grid: &GridMap,
        algorithm: Algorithm,
        anchors: &[Anchor],
        flc2: &FlcSpec,
        exec: Execution,
    ) -> Result<Vec<PositionRecord>, SimError> {
        let indexed: Vec<(usize, &Observation)> = self.observations.iter().enumerate().collect();
        exec.map_slice(&indexed, |&(index, obs)| {
            let (estimate, fix) = localize_one(grid, algorithm, anchors, &obs.rssi, flc2)?;
            Ok(PositionRecord { index, truth: obs.truth, estimate, error: estimate.distance(&obs.truth), fix })
        })
        .into_iter()
        .collect()
    }
}

/// One localization from filtered mean RSSI.
pub fn localize_one(
    grid: &GridMap,
    algorithm: Algorithm,
    anchors: &[Anchor],
    rssi: &BTreeMap<AnchorId, f64>,
    flc2: &FlcSpec,
) -> Result<(Point, Option<Fix>), SimError> {
    if algorithm == Algorithm::Fuzzy {
        let fix = localization::locate_aggregated(grid, anchors, rssi, flc2, Execution::Sequential)?;
        return Ok((fix.position, Some(fix)));
    }
    let mut used = Vec::new();
    let mut distances = Vec::new();
    for a in anchors {
        if let Some(&r) = rssi.get(&a.id) {
            used.push((a.id, a.position));
            distances.push(a.model.estimate_distance(r)?);
        }
    }
    let points: Vec<Point> = used.iter().map(|u| u.1).collect();
    Ok(match algorithm {
        Algorithm::MinMax => (baselines::minmax_locate(&points, &distances)?, None),
        Algorithm::Trilateration => (baselines::trilaterate(&points, &distances)?, None),
        Algorithm::MaximumLikelihood => {
            let fix = baselines::ml_locate(grid, &used, &distances, Execution::Sequential)?;
            (fix.position, Some(fix))
        }
        Algorithm::Fuzzy => unreachable!(),
    })
}

/// Calibrates, samples and localizes every test position of `scenario`.
pub fn run_experiment(
    scenario: &Scenario,
    algorithm: Algorithm,
    flc1: &FlcSpec,
    flc2: &FlcSpec,
    cell_side: f64,
    exec: Execution,
) -> Result<Vec<PositionRecord>, SimError> {
    let survey = survey(scenario, exec)?;
    let grid = survey.grid(cell_side)?;
    survey.evaluate(&grid, algorithm, flc1, flc2, exec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::{default_flc1, default_flc2};

    fn room() -> Room {
        Room::new(10.0, 10.0)
    }

    fn one_anchor(noise: NoiseModel) -> Scenario {
        Scenario {
            room: room(),
            anchors: vec![ScenarioAnchor { id: AnchorId(0), pos: Point::new(0.0, 0.0), z: -20.0, k: -40.0 }],
            noise,
            test_positions: vec![],
            samples_per_position: 30,
            seed: 3,
        }
    }

    #[test]
    fn layout_of_four_is_inset_square() {
        let pts = anchor_layout(room(), 4);
        assert_eq!(pts, vec![Point::new(2.5, 2.5), Point::new(7.5, 2.5), Point::new(2.5, 7.5), Point::new(7.5, 7.5)]);
        assert_eq!(anchor_layout(room(), 8).len(), 8);
        assert_eq!(anchor_layout(room(), 1), vec![Point::new(5.0, 5.0)]);
    }

    #[test]
    fn random_placement_stays_in_room() {
        let a = generate_scenario_placed(room(), Placement::Random, 7, 3, 5, NoiseModel::default(), 2).unwrap();
        assert_eq!(a.anchors.len(), 7);
        assert!(a.anchors.iter().all(|x| a.room.contains(x.pos)));
        let b = generate_scenario_placed(room(), Placement::Random, 7, 3, 5, NoiseModel::default(), 2).unwrap();
        assert_eq!(a, b);
        let grid = generate_scenario(room(), 7, 3, 5, NoiseModel::default(), 2).unwrap();
        assert_eq!(grid.test_positions, a.test_positions);
        assert_ne!(grid.anchors, a.anchors);
    }

    #[test]
    fn scenario_generation() {
        let a = generate_scenario(room(), 6, 20, 30, NoiseModel::default(), 9).unwrap();
        let b = generate_scenario(room(), 6, 20, 30, NoiseModel::default(), 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.test_positions.len(), 20);
        assert!(a.test_positions.iter().all(|p| a.room.contains(*p)));
        assert_ne!(a, generate_scenario(room(), 6, 20, 30, NoiseModel::default(), 10).unwrap());
        assert_eq!(
            generate_scenario(Room::new(0.0, 5.0), 4, 1, 1, NoiseModel::default(), 0),
            Err(SimError::InvalidRoom(0.0, 5.0))
        );
        assert_eq!(generate_scenario(room(), 0, 1, 1, NoiseModel::default(), 0), Err(SimError::NoAnchors));
    }

    #[test]
    fn noiseless_samples_are_exact() {
        let s = one_anchor(NoiseModel::NOISELESS);
        let v = sample_rssi(&s, Point::new(1.0, 0.0), 10, 0).unwrap();
        assert!(v.iter().all(|x| x.rssi == -40.0));
    }

    #[test]
    fn fixed_attenuation_is_exact() {
        let s = one_anchor(NoiseModel { sigma_db: 0.0, p_multipath: 1.0, attenuation: [3.0, 3.0] });
        let v = sample_rssi(&s, Point::new(1.0, 0.0), 10, 0).unwrap();
        assert!(v.iter().all(|x| x.rssi == -43.0));
    }

    #[test]
    fn sampling_is_deterministic_and_errors_at_anchor() {
        let s = one_anchor(NoiseModel::default());
        let p = Point::new(3.0, 4.0);
        assert_eq!(sample_rssi(&s, p, 30, 5).unwrap(), sample_rssi(&s, p, 30, 5).unwrap());
        assert_ne!(sample_rssi(&s, p, 30, 5).unwrap(), sample_rssi(&s, p, 30, 6).unwrap());
        assert!(matches!(sample_rssi(&s, Point::new(0.0, 0.0), 1, 0), Err(SimError::ZeroDistance { .. })));
    }

    #[test]
    fn multipath_never_strengthens() {
        let s = one_anchor(NoiseModel { sigma_db: 0.0, p_multipath: 0.5, attenuation: [2.0, 10.0] });
        for (i, d) in [0.5, 1.0, 3.0, 7.0].iter().enumerate() {
            let clean = s.anchors[0].model().predict_rssi(*d).unwrap();
            for x in sample_rssi(&s, Point::new(*d, 0.0), 50, i as u64).unwrap() {
                assert!(x.rssi.abs() >= clean.abs());
            }
        }
    }

    #[test]
    fn noiseless_magnitude_grows_with_distance() {
        let s = one_anchor(NoiseModel::NOISELESS);
        let mags: Vec<f64> =
            (1..40).map(|i| sample_rssi(&s, Point::new(0.25 * i as f64, 0.0), 1, 0).unwrap()[0].rssi.abs()).collect();
        assert!(mags.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn noiseless_experiment_on_cell_centers() {
        let mut s = generate_scenario(room(), 4, 0, 5, NoiseModel::NOISELESS, 1).unwrap();
        s.test_positions = vec![Point::new(0.5, 0.5), Point::new(4.5, 6.5), Point::new(9.5, 1.5)];
        let fuzzy =
            run_experiment(&s, Algorithm::Fuzzy, &default_flc1(), &default_flc2(), 1.0, Execution::Parallel).unwrap();
        assert_eq!(fuzzy.len(), 3);
        assert!(fuzzy.iter().all(|r| r.error < 1e-9), "{fuzzy:?}");
        let tri =
            run_experiment(&s, Algorithm::Trilateration, &default_flc1(), &default_flc2(), 1.0, Execution::Sequential)
                .unwrap();
        assert!(tri.iter().all(|r| r.error < 1e-9), "{tri:?}");
    }

    #[test]
    fn experiment_is_schedule_independent() {
        let s = generate_scenario(room(), 5, 12, 30, NoiseModel::default(), 77).unwrap();
        for alg in Algorithm::ALL {
            let a = run_experiment(&s, alg, &default_flc1(), &default_flc2(), 1.0, Execution::Parallel).unwrap();
            let b = run_experiment(&s, alg, &default_flc1(), &default_flc2(), 1.0, Execution::Sequential).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.len(), 12);
        }
    }

    #[test]
    fn scenario_json_shape() {
        let s = generate_scenario(room(), 2, 1, 30, NoiseModel::default(), 4).unwrap();
        let v = serde_json::to_value(&s).unwrap();
        assert_eq!(v["room"], serde_json::json!([10.0, 10.0]));
        assert_eq!(v["anchors"][0]["z"], -20.0);
        assert!(v["anchors"][0]["pos"].is_array());
        assert_eq!(v["noise"]["attenuation"], serde_json::json!([2.0, 10.0]));
        assert_eq!(v["samples_per_position"], 30);
        let back: Scenario = serde_json::from_value(v).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn invalid_noise_rejected() {
        let bad = NoiseModel { sigma_db: -1.0, ..NoiseModel::default() };
        assert!(matches!(generate_scenario(room(), 1, 1, 1, bad, 0), Err(SimError::InvalidNoise(_))));
        let bad = NoiseModel { attenuation: [-1.0, 2.0], ..NoiseModel::default() };
        assert!(matches!(bad.check(), Err(SimError::InvalidNoise(_))));
    }
}
