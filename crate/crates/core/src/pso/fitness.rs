//! Ready-made objectives for tuning the two controllers.

use serde::{Deserialize, Serialize};

use super::{run_pso, Chromosome, Fitness, PsoConfig, PsoError, PsoOutcome};
use crate::exec::Execution;
use crate::fuzzy::FlcSpec;
use crate::localization::{Anchor, GridMap};
use crate::simulator::{Algorithm, SimError, Survey};

pub const GRID_POINTS: usize = 21;

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
}

/// Mean controller output over a 21 × 21 grid spanning both input
/// universes, endpoints included.
#[derive(Debug, Clone)]
pub struct MeanOutput {
    template: FlcSpec,
}

impl MeanOutput {
    pub fn new(template: FlcSpec) -> Self {
        Self { template }
    }

    pub fn of_spec(spec: &FlcSpec) -> Option<f64> {
        let (u1, u2) = (spec.input1.universe, spec.input2.universe);
        let mut sum = 0.0;
        for x1 in linspace(u1[0], u1[1], GRID_POINTS) {
            for x2 in linspace(u2[0], u2[1], GRID_POINTS) {
                sum += spec.infer(x1, x2).ok()?;
            }
        }
        Some(sum / (GRID_POINTS * GRID_POINTS) as f64)
    }
}

impl Fitness for MeanOutput {
    fn evaluate(&self, chromosome: &Chromosome) -> f64 {
        chromosome.decode(&self.template).ok().and_then(|spec| Self::of_spec(&spec)).unwrap_or(f64::NEG_INFINITY)
    }
}

/// Which controller a [`PipelineError`] objective varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Flc1,
    Flc2,
}

/// Negative mean localization error of the fuzzy pipeline over labeled
/// surveys, with one controller taken from the chromosome and the other
/// held fixed.
#[derive(Debug, Clone)]
pub struct PipelineError {
    target: Target,
    template: FlcSpec,
    fixed: FlcSpec,
    cases: Vec<(Survey, GridMap, Option<Vec<Anchor>>)>,
}

impl PipelineError {
    /// `fixed` is the controller that is not tuned.
    pub fn new(
        target: Target,
        template: FlcSpec,
        fixed: FlcSpec,
        surveys: &[Survey],
        cell_side: f64,
    ) -> Result<Self, SimError> {
        let cases = surveys
            .iter()
            .map(|s| {
                let grid = s.grid(cell_side)?;
                let anchors = match target {
                    Target::Flc1 => None,
                    Target::Flc2 => Some(s.anchors(&fixed)?),
                };
                Ok((s.clone(), grid, anchors))
            })
            .collect::<Result<Vec<_>, SimError>>()?;
        Ok(Self { target, template, fixed, cases })
    }

    /// Mean error of the pipeline with the given pair of controllers.
    fn mean_error(&self, candidate: &FlcSpec) -> Result<f64, SimError> {
        let (mut sum, mut n) = (0.0, 0usize);
        for (survey, grid, anchors) in &self.cases {
            let records = match (self.target, anchors) {
                (Target::Flc2, Some(a)) => {
                    survey.evaluate_with_anchors(grid, Algorithm::Fuzzy, a, candidate, Execution::Sequential)?
                }
                _ => survey.evaluate(grid, Algorithm::Fuzzy, candidate, &self.fixed, Execution::Sequential)?,
            };
            sum += records.iter().map(|r| r.error).sum::<f64>();
            n += records.len();
        }
        Ok(sum / n.max(1) as f64)
    }
}

impl Fitness for PipelineError {
    fn evaluate(&self, chromosome: &Chromosome) -> f64 {
        let Ok(spec) = chromosome.decode(&self.template) else {
            return f64::NEG_INFINITY;
        };
        match self.mean_error(&spec) {
            Ok(e) if e.is_finite() => -e,
            _ => f64::NEG_INFINITY,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TunedPipeline {
    pub flc1: FlcSpec,
    pub flc2: FlcSpec,
    pub flc1_run: PsoOutcome,
    pub flc2_run: PsoOutcome,
}

#[derive(Debug, thiserror::Error)]
pub enum TuneError {
    #[error(transparent)]
    Pso(#[from] PsoError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Tunes the first controller against localization error with the second
/// at its initial value, then the second with the tuned first one. The
/// second run uses `config.seed + 1`.
pub fn tune_pipeline(
    surveys: &[Survey],
    cell_side: f64,
    flc1: &FlcSpec,
    flc2: &FlcSpec,
    config: &PsoConfig,
    exec: Execution,
) -> Result<TunedPipeline, TuneError> {
    let f1 = PipelineError::new(Target::Flc1, flc1.clone(), flc2.clone(), surveys, cell_side)?;
    let flc1_run = run_pso(config, flc1, &f1, exec)?;
    let tuned1 = flc1_run.best.decode(flc1)?;

    let f2 = PipelineError::new(Target::Flc2, flc2.clone(), tuned1.clone(), surveys, cell_side)?;
    let cfg2 = PsoConfig { seed: config.seed.wrapping_add(1), ..config.clone() };
    let flc2_run = run_pso(&cfg2, flc2, &f2, exec)?;
    let tuned2 = flc2_run.best.decode(flc2)?;

    Ok(TunedPipeline { flc1: tuned1, flc2: tuned2, flc1_run, flc2_run })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::{default_flc1, default_flc2};
    use crate::simulator::{generate_scenario, survey, NoiseModel, Room};

    #[test]
    fn grid_includes_endpoints() {
        let pts: Vec<f64> = linspace(0.0, 100.0, GRID_POINTS).collect();
        assert_eq!(pts.len(), 21);
        assert_eq!(pts[0], 0.0);
        assert_eq!(pts[20], 100.0);
        assert!((pts[1] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn mean_output_of_defaults_is_in_output_range() {
        for spec in [default_flc1(), default_flc2()] {
            let m = MeanOutput::of_spec(&spec).unwrap();
            assert!(m > 0.0 && m < 1.0, "{m}");
            let f = MeanOutput::new(spec.clone());
            assert_eq!(f.evaluate(&Chromosome::from_spec(&spec)), m);
        }
    }

    #[test]
    fn invalid_chromosome_scores_neg_infinity() {
        let spec = default_flc2();
        let mut c = Chromosome::from_spec(&spec);
        c.genes[0] = 5.0;
        assert_eq!(MeanOutput::new(spec).evaluate(&c), f64::NEG_INFINITY);
    }

    #[test]
    fn pipeline_error_matches_direct_evaluation() {
        let sc = generate_scenario(Room::new(10.0, 10.0), 6, 5, 10, NoiseModel::default(), 4).unwrap();
        let sv = survey(&sc, Execution::Sequential).unwrap();
        let (f1, f2) = (default_flc1(), default_flc2());
        let grid = sv.grid(0.5).unwrap();
        let direct = sv.evaluate(&grid, Algorithm::Fuzzy, &f1, &f2, Execution::Sequential).unwrap();
        let mean = direct.iter().map(|r| r.error).sum::<f64>() / direct.len() as f64;

        let obj1 = PipelineError::new(Target::Flc1, f1.clone(), f2.clone(), std::slice::from_ref(&sv), 0.5).unwrap();
        assert!((obj1.evaluate(&Chromosome::from_spec(&f1)) + mean).abs() < 1e-12);
        let obj2 = PipelineError::new(Target::Flc2, f2.clone(), f1.clone(), &[sv], 0.5).unwrap();
        assert!((obj2.evaluate(&Chromosome::from_spec(&f2)) + mean).abs() < 1e-12);
    }
}
