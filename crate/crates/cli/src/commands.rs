use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vlcfuzz::channel::{self, fit_path_loss};
use vlcfuzz::eval::{beacon_sweep, empirical_cdf, sweep_csv, StatsReport, SweepEntry, SweepTemplate};
use vlcfuzz::io::{self, SampleRow};
use vlcfuzz::localization::{score_anchors, GridMap};
use vlcfuzz::pso::fitness::{tune_pipeline, MeanOutput, Target};
use vlcfuzz::pso::run_pso;
use vlcfuzz::rng::derive_seed;
use vlcfuzz::simulator::{self, calibration_sets, localize_one, sample_rssi, survey, Algorithm, Scenario, Survey};
use vlcfuzz::{Anchor, AnchorId, Execution, Fix, Point};

use crate::config::{FitnessKind, RunConfig};
use crate::CliError;

const TAG_TRAINING: u64 = 0x7472;
const TAG_SWEEP: u64 = 0x7377;

/// Files produced by a command, written only once everything succeeded.
#[derive(Debug, Default)]
pub struct Outputs(Vec<(PathBuf, String)>);

impl Outputs {
    pub fn add(&mut self, path: PathBuf, contents: String) {
        self.0.push((path, contents));
    }

    /// Writes every file; on the first failure removes what was written.
    pub fn commit(self) -> Result<Vec<PathBuf>, CliError> {
        let mut written = Vec::new();
        for (path, contents) in &self.0 {
            let result = path
                .parent()
                .filter(|p| !p.as_os_str().is_empty())
                .map_or(Ok(()), fs::create_dir_all)
                .and_then(|_| fs::write(path, contents));
            if let Err(e) = result {
                for w in &written {
                    let _ = fs::remove_file(w);
                }
                return Err(CliError::Runtime(format!("cannot write {}: {e}", path.display())));
            }
            written.push(path.clone());
        }
        Ok(written)
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

/// Anchor record of the calibrate command; the position is only known
/// when a scenario was given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorRecord {
    pub id: AnchorId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos: Option<Point>,
    pub z: f64,
    pub k: f64,
    pub z_score: f64,
    pub k_score: f64,
    pub reliability: f64,
}

pub fn calibrate(
    input: &Path,
    output: &Path,
    flc1: Option<&Path>,
    scenario: Option<&Path>,
) -> Result<Outputs, CliError> {
    let cfg = RunConfig {
        flc1: flc1.map(Path::to_path_buf),
        scenario: scenario.map(Path::to_path_buf),
        ..RunConfig::default()
    };
    let flc1 = cfg.flc1()?;
    let positions: BTreeMap<AnchorId, Point> =
        cfg.scenario_file()?.map(|s| s.anchors.iter().map(|a| (a.id, a.pos)).collect()).unwrap_or_default();

    let text =
        fs::read_to_string(input).map_err(|e| CliError::Config(format!("cannot read {}: {e}", input.display())))?;
    let groups = io::read_calibration(text.as_bytes()).map_err(|e| runtime(format!("{}: {e}", input.display())))?;
    let fitted = groups
        .iter()
        .map(|(&id, points)| {
            let model = fit_path_loss(points).map_err(|e| runtime(format!("anchor {}: {e}", id.0)))?;
            Ok((id, positions.get(&id).copied().unwrap_or(Point::new(0.0, 0.0)), model))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let anchors = score_anchors(&fitted, &flc1).map_err(runtime)?;
    let records: Vec<AnchorRecord> = anchors
        .iter()
        .map(|a| AnchorRecord {
            id: a.id,
            pos: positions.get(&a.id).copied(),
            z: a.model.z,
            k: a.model.k,
            z_score: a.z_score,
            k_score: a.k_score,
            reliability: a.reliability,
        })
        .collect();
    let mut out = Outputs::default();
    out.add(output.to_path_buf(), json(&records));
    Ok(out)
}

fn scenario(cfg: &RunConfig) -> Result<Scenario, CliError> {
    if let Some(sc) = cfg.scenario_file()? {
        return Ok(sc);
    }
    let s = &cfg.simulation;
    simulator::generate_scenario_placed(
        s.room,
        s.placement,
        s.anchors,
        s.positions,
        s.samples_per_position,
        s.noise,
        cfg.seed,
    )
    .map_err(|e| CliError::Config(e.to_string()))
}

/// Scenario JSON, per-position samples and calibration readings.
pub fn simulate(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let sc = scenario(cfg)?;
    let mut rows = Vec::new();
    for (idx, &p) in sc.test_positions.iter().enumerate() {
        for s in sample_rssi(&sc, p, sc.samples_per_position, idx as u64).map_err(runtime)? {
            rows.push(SampleRow {
                anchor_id: s.anchor_id.0,
                position_index: idx,
                sequence: s.sequence,
                rssi_db: s.rssi,
            });
        }
    }
    let calibration: BTreeMap<AnchorId, _> =
        calibration_sets(&sc).map_err(runtime)?.into_iter().map(|c| (c.id, c.points)).collect();
    let mut out = Outputs::default();
    out.add(cfg.output_dir.join("scenario.json"), json(&sc));
    out.add(cfg.output_dir.join("samples.csv"), io::write_samples(&rows));
    out.add(cfg.output_dir.join("calibration.csv"), io::write_calibration(&calibration));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizedPosition {
    pub index: usize,
    pub estimate: Point,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fix: Option<Fix>,
}

/// Localizes every position of a samples file with calibrated anchors.
pub fn localize(cfg: &RunConfig, anchors_path: &Path, samples_path: &Path) -> Result<Outputs, CliError> {
    let read =
        |p: &Path| fs::read_to_string(p).map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())));
    let records: Vec<AnchorRecord> = serde_json::from_str(&read(anchors_path)?)
        .map_err(|e| CliError::Config(format!("{}: {e}", anchors_path.display())))?;
    let flc1 = cfg.flc1()?;
    let flc2 = cfg.flc2()?;
    let fitted = records
        .iter()
        .map(|r| {
            let pos = r.pos.ok_or_else(|| {
                CliError::Config(format!("{}: anchor {} has no position", anchors_path.display(), r.id.0))
            })?;
            Ok((r.id, pos, channel::PathLossModel::new(r.z, r.k)))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let anchors: Vec<Anchor> = if cfg.flc1.is_some() {
        score_anchors(&fitted, &flc1).map_err(runtime)?
    } else {
        records
            .iter()
            .zip(&fitted)
            .map(|(r, f)| Anchor {
                id: r.id,
                position: f.1,
                model: f.2,
                z_score: r.z_score,
                k_score: r.k_score,
                reliability: r.reliability,
            })
            .collect()
    };
    let room = cfg.room()?;
    let grid =
        GridMap::for_room(room.width, room.height, cfg.cell_side).map_err(|e| CliError::Config(e.to_string()))?;
    let rows = io::read_samples(read(samples_path)?.as_bytes())
        .map_err(|e| runtime(format!("{}: {e}", samples_path.display())))?;

    let algorithm = cfg.algorithms[0];
    let mut located = Vec::new();
    for (index, samples) in io::group_by_position(&rows) {
        let rssi = channel::filtered_means(&samples).map_err(|e| runtime(format!("position {index}: {e}")))?;
        let (estimate, fix) = localize_one(&grid, algorithm, &anchors, &rssi, &flc2)
            .map_err(|e| runtime(format!("position {index}: {e}")))?;
        located.push(LocalizedPosition { index, estimate, fix });
    }
    let mut out = Outputs::default();
    out.add(cfg.output_dir.join("fixes.json"), json(&located));
    Ok(out)
}

fn training_surveys(cfg: &RunConfig) -> Result<Vec<Survey>, CliError> {
    let s = &cfg.simulation;
    (0..cfg.pso.training_surveys as u64)
        .map(|t| {
            let seed = derive_seed(cfg.seed, &[TAG_TRAINING, t]);
            let sc = simulator::generate_scenario_placed(
                s.room,
                s.placement,
                s.anchors,
                s.positions,
                s.samples_per_position,
                s.noise,
                seed,
            )
            .map_err(|e| CliError::Config(e.to_string()))?;
            survey(&sc, Execution::Parallel).map_err(runtime)
        })
        .collect()
}

/// Tuned controller(s) and their convergence traces.
pub fn optimize(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let flc1 = cfg.flc1()?;
    let flc2 = cfg.flc2()?;
    let pso = cfg.pso_config();
    let mut out = Outputs::default();
    let dir = &cfg.output_dir;
    match cfg.pso.fitness {
        FitnessKind::MeanOutput => {
            let (template, name) = match cfg.pso.target {
                Target::Flc1 => (flc1, "flc1"),
                Target::Flc2 => (flc2, "flc2"),
            };
            let run =
                run_pso(&pso, &template, &MeanOutput::new(template.clone()), Execution::Parallel).map_err(runtime)?;
            let tuned = run.best.decode(&template).map_err(runtime)?;
            out.add(dir.join(format!("{name}_tuned.json")), tuned.to_json() + "\n");
            out.add(dir.join(format!("trace_{name}.csv")), run.trace_csv());
        }
        FitnessKind::NegMeanError => {
            let surveys = training_surveys(cfg)?;
            let tuned =
                tune_pipeline(&surveys, cfg.cell_side, &flc1, &flc2, &pso, Execution::Parallel).map_err(runtime)?;
            out.add(dir.join("flc1_tuned.json"), tuned.flc1.to_json() + "\n");
            out.add(dir.join("flc2_tuned.json"), tuned.flc2.to_json() + "\n");
            out.add(dir.join("trace_flc1.csv"), tuned.flc1_run.trace_csv());
            out.add(dir.join("trace_flc2.csv"), tuned.flc2_run.trace_csv());
        }
    }
    Ok(out)
}

/// Error statistics and CDF per configured algorithm.
pub fn evaluate(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let flc1 = cfg.flc1()?;
    let flc2 = cfg.flc2()?;
    let sc = scenario(cfg)?;
    let sv = survey(&sc, Execution::Parallel).map_err(runtime)?;
    let grid = sv.grid(cfg.cell_side).map_err(|e| CliError::Config(e.to_string()))?;
    let mut reports = Vec::new();
    let mut out = Outputs::default();
    for &alg in &cfg.algorithms {
        let records = sv.evaluate(&grid, alg, &flc1, &flc2, Execution::Parallel).map_err(runtime)?;
        let errors: Vec<f64> = records.iter().map(|r| r.error).collect();
        reports.push(StatsReport::new(alg.name(), &errors).map_err(runtime)?);
        let cdf = empirical_cdf(&errors).map_err(runtime)?;
        out.add(cfg.output_dir.join(format!("cdf_{}.csv", alg.name())), cdf.to_csv());
    }
    out.add(cfg.output_dir.join("stats.json"), json(&reports));
    Ok(out)
}

/// Mean error per anchor count and algorithm.
pub fn sweep(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let flc1 = cfg.flc1()?;
    let flc2 = cfg.flc2()?;
    let s = &cfg.simulation;
    let template = SweepTemplate {
        room: s.room,
        n_positions: s.positions,
        samples_per_position: s.samples_per_position,
        noise: s.noise,
        cell_side: cfg.cell_side,
        placement: s.placement,
    };
    let entries: Vec<SweepEntry> = cfg
        .sweep
        .algorithms
        .iter()
        .map(|&a: &Algorithm| SweepEntry {
            label: a.name().into(),
            algorithm: a,
            flc1: flc1.clone(),
            flc2: flc2.clone(),
        })
        .collect();
    let seeds: Vec<u64> = (0..cfg.sweep.seeds as u64).map(|i| derive_seed(cfg.seed, &[TAG_SWEEP, i])).collect();
    let rows = beacon_sweep(&template, &cfg.sweep.counts, &entries, &seeds, Execution::Parallel).map_err(runtime)?;
    let mut out = Outputs::default();
    out.add(cfg.output_dir.join("sweep.csv"), sweep_csv(&rows));
    Ok(out)
}
