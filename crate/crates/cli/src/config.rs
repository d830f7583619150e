use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vlcfuzz::fuzzy::{default_flc1, default_flc2};
use vlcfuzz::pso::fitness::Target;
use vlcfuzz::pso::PsoConfig;
use vlcfuzz::simulator::{Algorithm, NoiseModel, Placement, Room, Scenario};
use vlcfuzz::FlcSpec;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub room: Room,
    pub anchors: usize,
    pub positions: usize,
    pub samples_per_position: usize,
    pub noise: NoiseModel,
    pub placement: Placement,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            room: Room::new(10.0, 10.0),
            anchors: 8,
            positions: 20,
            samples_per_position: 30,
            noise: NoiseModel::default(),
            placement: Placement::Grid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitnessKind {
    /// Mean controller output over its input grid.
    MeanOutput,
    /// Negative mean localization error on simulated training surveys.
    NegMeanError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoSection {
    pub particles: usize,
    pub iterations: usize,
    pub w: f64,
    pub c1: f64,
    pub c2: f64,
    pub epsilon: f64,
    pub fitness: FitnessKind,
    /// Controller tuned by `mean_output`; `neg_mean_error` tunes both.
    pub target: Target,
    pub training_surveys: usize,
}

impl Default for PsoSection {
    fn default() -> Self {
        let d = PsoConfig::default();
        Self {
            particles: d.particles,
            iterations: d.iterations,
            w: d.w,
            c1: d.c1,
            c2: d.c2,
            epsilon: d.epsilon,
            fitness: FitnessKind::MeanOutput,
            target: Target::Flc2,
            training_surveys: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub counts: Vec<usize>,
    pub seeds: usize,
    pub algorithms: Vec<Algorithm>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { counts: (4..=10).collect(), seeds: 30, algorithms: Algorithm::ALL.to_vec() }
    }
}

/// Everything a pipeline command needs. Relative paths are resolved
/// against the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Scenario JSON; when absent one is generated from `simulation`.
    pub scenario: Option<PathBuf>,
    pub simulation: SimulationConfig,
    pub flc1: Option<PathBuf>,
    pub flc2: Option<PathBuf>,
    pub cell_side: f64,
    pub algorithms: Vec<Algorithm>,
    pub pso: PsoSection,
    pub sweep: SweepSection,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: None,
            simulation: SimulationConfig::default(),
            flc1: None,
            flc2: None,
            cell_side: 1.0,
            algorithms: vec![Algorithm::Fuzzy],
            pso: PsoSection::default(),
            sweep: SweepSection::default(),
            output_dir: PathBuf::from("."),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub particles: Option<usize>,
    pub iterations: Option<usize>,
    pub anchors: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

impl RunConfig {
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let mut cfg = match path {
            Some(p) => {
                let mut cfg: RunConfig =
                    serde_json::from_str(&read(p)?).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                let base = p.parent().unwrap_or(Path::new(""));
                for f in [&mut cfg.scenario, &mut cfg.flc1, &mut cfg.flc2] {
                    if let Some(rel) = f.as_mut().filter(|r| r.is_relative()) {
                        *rel = base.join(&*rel);
                    }
                }
                if cfg.output_dir.is_relative() {
                    cfg.output_dir = base.join(&cfg.output_dir);
                }
                cfg
            }
            None => RunConfig::default(),
        };
        if let Some(s) = overrides.seed {
            cfg.seed = s;
        }
        if let Some(k) = overrides.particles {
            cfg.pso.particles = k;
        }
        if let Some(n) = overrides.iterations {
            cfg.pso.iterations = n;
        }
        if let Some(a) = overrides.anchors {
            cfg.simulation.anchors = a;
        }
        if let Some(d) = &overrides.output_dir {
            cfg.output_dir = d.clone();
        }
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if !(self.cell_side > 0.0 && self.cell_side.is_finite()) {
            return bad(format!("cell_side must be positive, got {}", self.cell_side));
        }
        if self.algorithms.is_empty() {
            return bad("algorithms must not be empty".into());
        }
        if self.simulation.anchors == 0 {
            return bad("simulation.anchors must be >= 1".into());
        }
        if self.pso.training_surveys == 0 {
            return bad("pso.training_surveys must be >= 1".into());
        }
        if self.sweep.seeds == 0 || self.sweep.counts.is_empty() || self.sweep.algorithms.is_empty() {
            return bad("sweep needs at least one seed, count and algorithm".into());
        }
        self.pso_config().validate().map_err(|e| CliError::Config(e.to_string()))?;
        for p in [&self.scenario, &self.flc1, &self.flc2].into_iter().flatten() {
            if !p.is_file() {
                return bad(format!("referenced file {} does not exist", p.display()));
            }
        }
        Ok(())
    }

    pub fn pso_config(&self) -> PsoConfig {
        PsoConfig {
            particles: self.pso.particles,
            iterations: self.pso.iterations,
            w: self.pso.w,
            c1: self.pso.c1,
            c2: self.pso.c2,
            seed: self.seed,
            epsilon: self.pso.epsilon,
        }
    }

    fn controller(path: &Option<PathBuf>, default: fn() -> FlcSpec) -> Result<FlcSpec, CliError> {
        match path {
            Some(p) => FlcSpec::from_json(&read(p)?).map_err(|e| CliError::Config(format!("{}: {e}", p.display()))),
            None => Ok(default()),
        }
    }

    pub fn flc1(&self) -> Result<FlcSpec, CliError> {
        Self::controller(&self.flc1, default_flc1)
    }

    pub fn flc2(&self) -> Result<FlcSpec, CliError> {
        Self::controller(&self.flc2, default_flc2)
    }

    /// The scenario file if one is configured, without generating.
    pub fn scenario_file(&self) -> Result<Option<Scenario>, CliError> {
        let Some(p) = &self.scenario else { return Ok(None) };
        let sc: Scenario =
            serde_json::from_str(&read(p)?).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
        sc.validate().map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
        Ok(Some(sc))
    }

    pub fn room(&self) -> Result<Room, CliError> {
        Ok(self.scenario_file()?.map_or(self.simulation.room, |s| s.room))
    }
}
