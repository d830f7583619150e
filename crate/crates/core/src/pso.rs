//! Constrained particle swarm over triangular membership parameters.
//!
//! Each variable of a controller (input1, input2, output) contributes six
//! free parameters, in this order:
//!
//! | gene | meaning             | feasible interval            |
//! |------|---------------------|------------------------------|
//! | c_L  | Low right foot      | `[a_L + 2ε, b_M − ε]`        |
//! | b_L  | Low peak            | `[a_L + ε, c_L − ε]`         |
//! | a_M  | Medium left foot    | `[a_L + ε, c_L − ε]`         |
//! | c_M  | Medium right foot   | `[b_M + 2ε, c_H − ε]`        |
//! | a_H  | High left foot      | `[b_M + ε, c_M − ε]`         |
//! | b_H  | High peak           | `[a_H + ε, c_H − ε]`         |
//!
//! `a_L`, `b_M` and `c_H` stay fixed at the template's values. The doubled
//! margin on `c_L` and `c_M` keeps the intervals that depend on them
//! non-empty. Dimensions are always visited in this order, so each interval
//! uses parameters already updated in the current iteration.
//!
//! When the interval moves, a position left outside it is mapped
//! proportionally back in before the velocity update; a position that
//! overshoots after the update gets a velocity-proportional correction and
//! a final clamp.

pub mod fitness;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;
use crate::fuzzy::{FlcSpec, Slot, Violation};
use crate::rng::substream;

pub const GENES_PER_VARIABLE: usize = 6;
pub const CHROMOSOME_LEN: usize = 3 * GENES_PER_VARIABLE;

const TAG_PSO: u64 = 0x50_53_4f;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PsoError {
    #[error("{slot:?}.{gene:?}: empty feasible interval [{lo}, {hi}]")]
    EmptyInterval { slot: Slot, gene: Gene, lo: f64, hi: f64 },
    #[error("previous interval [{0}, {1}] is degenerate")]
    DegenerateOldInterval(f64, f64),
    #[error("chromosome decodes to an invalid controller: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InfeasibleChromosome(Vec<Violation>),
    #[error("invalid PSO configuration: {0}")]
    InvalidConfig(String),
}

/// One free parameter of a variable, in update order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gene {
    LowRight,
    LowPeak,
    MediumLeft,
    MediumRight,
    HighLeft,
    HighPeak,
}

impl Gene {
    pub const ORDER: [Gene; GENES_PER_VARIABLE] =
        [Gene::LowRight, Gene::LowPeak, Gene::MediumLeft, Gene::MediumRight, Gene::HighLeft, Gene::HighPeak];

    pub const fn index(self) -> usize {
        self as usize
    }
}

/// The fixed parameters of one variable plus its absolute margin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariableFrame {
    /// `a_L`
    pub low_left: f64,
    /// `b_M`
    pub medium_peak: f64,
    /// `c_H`
    pub high_right: f64,
    pub margin: f64,
}

impl VariableFrame {
    pub fn from_template(spec: &FlcSpec, slot: Slot, relative_margin: f64) -> Self {
        let var = spec.variable(slot);
        Self {
            low_left: var.terms.low.a,
            medium_peak: var.terms.medium.m,
            high_right: var.terms.high.b,
            margin: relative_margin * var.width(),
        }
    }
}

pub fn frames(template: &FlcSpec, relative_margin: f64) -> [VariableFrame; 3] {
    Slot::ALL.map(|s| VariableFrame::from_template(template, s, relative_margin))
}

/// Feasible interval of `gene`, given the current values of the variable's
/// six genes. Genes earlier in [`Gene::ORDER`] must already hold their
/// updated values.
pub fn compute_bounds(genes: &[f64], frame: &VariableFrame, gene: Gene) -> Result<(f64, f64), (f64, f64)> {
    let eps = frame.margin;
    let (a_l, b_m, c_h) = (frame.low_left, frame.medium_peak, frame.high_right);
    let (lo, hi) = match gene {
        Gene::LowRight => (a_l + 2.0 * eps, b_m - eps),
        Gene::LowPeak | Gene::MediumLeft => (a_l + eps, genes[Gene::LowRight.index()] - eps),
        Gene::MediumRight => (b_m + 2.0 * eps, c_h - eps),
        Gene::HighLeft => (b_m + eps, genes[Gene::MediumRight.index()] - eps),
        Gene::HighPeak => (genes[Gene::HighLeft.index()] + eps, c_h - eps),
    };
    if lo <= hi {
        Ok((lo, hi))
    } else if lo - hi <= 8.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(1.0) {
        // the margins cancel up to rounding
        Ok((lo, lo))
    } else {
        Err((lo, hi))
    }
}

fn bounds_for(genes: &[f64], frame: &VariableFrame, slot: Slot, gene: Gene) -> Result<(f64, f64), PsoError> {
    compute_bounds(genes, frame, gene).map_err(|(lo, hi)| PsoError::EmptyInterval { slot, gene, lo, hi })
}

/// Moves `x` back inside the new interval `[a1, b1]` by stretching the old
/// interval `[a0, b0]`: below the new lower bound, `[a0, b0]` maps onto
/// `[a1, b0]`; above the new upper bound, `[a0, b0]` maps onto `[a0, b1]`.
/// The result is then clamped into `[a1, b1]`.
pub fn clamp_position_proportional(x: f64, old: (f64, f64), new: (f64, f64)) -> Result<f64, PsoError> {
    let ((a0, b0), (a1, b1)) = (old, new);
    if !(b0 > a0) {
        return Err(PsoError::DegenerateOldInterval(a0, b0));
    }
    let y = if x < a1 {
        b0 + (a1 - b0) / (a0 - b0) * (x - b0)
    } else if x > b1 {
        a0 + (b1 - a0) / (b0 - a0) * (x - a0)
    } else {
        x
    };
    Ok(y.clamp(a1, b1))
}

/// Velocity update for one dimension with the limits implied by the new
/// interval. Returns `(v, v_min, v_max)`.
#[allow(clippy::too_many_arguments)]
pub fn update_velocity(
    velocity: f64,
    position: f64,
    pbest: f64,
    gbest: f64,
    r1: f64,
    r2: f64,
    config: &PsoConfig,
    bounds: (f64, f64),
) -> (f64, f64, f64) {
    let pull = |at: f64| config.c1 * r1 * (pbest - at) + config.c2 * r2 * (gbest - at);
    let inertia = config.w * velocity;
    let v = inertia + pull(position);
    let v_min = inertia + pull(bounds.1);
    let v_max = inertia + pull(bounds.0);
    (v.clamp(v_min, v_max), v_min, v_max)
}

/// Position update with proportional overshoot correction; the result is
/// always inside `new`.
pub fn update_position(position: f64, velocity: f64, old: (f64, f64), new: (f64, f64), v_min: f64, v_max: f64) -> f64 {
    let mut x = position + velocity;
    let correct = |x: f64, v_lim: f64, old_bound: f64| {
        if v_lim == 0.0 {
            return x;
        }
        let c = x + velocity / v_lim * (old_bound - position);
        if c.is_finite() {
            c
        } else {
            x
        }
    };
    if x < new.0 {
        x = correct(x, v_min, old.0);
    } else if x > new.1 {
        x = correct(x, v_max, old.1);
    }
    x.clamp(new.0, new.1)
}

/// The 18 free membership parameters of a controller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chromosome {
    pub genes: [f64; CHROMOSOME_LEN],
}

impl Chromosome {
    pub fn from_spec(spec: &FlcSpec) -> Self {
        let mut genes = [0.0; CHROMOSOME_LEN];
        for (v, slot) in Slot::ALL.into_iter().enumerate() {
            let t = &spec.variable(slot).terms;
            genes[v * GENES_PER_VARIABLE..(v + 1) * GENES_PER_VARIABLE]
                .copy_from_slice(&[t.low.b, t.low.m, t.medium.a, t.medium.b, t.high.a, t.high.m]);
        }
        Self { genes }
    }

    pub fn variable(&self, v: usize) -> &[f64] {
        &self.genes[v * GENES_PER_VARIABLE..(v + 1) * GENES_PER_VARIABLE]
    }

    /// Substitutes the genes into `template` without validation.
    pub fn apply(&self, template: &FlcSpec) -> FlcSpec {
        let mut spec = template.clone();
        for (v, slot) in Slot::ALL.into_iter().enumerate() {
            let g = self.variable(v);
            let t = &mut spec.variable_mut(slot).terms;
            t.low.b = g[0];
            t.low.m = g[1];
            t.medium.a = g[2];
            t.medium.b = g[3];
            t.high.a = g[4];
            t.high.m = g[5];
        }
        spec
    }

    pub fn decode(&self, template: &FlcSpec) -> Result<FlcSpec, PsoError> {
        let spec = self.apply(template);
        spec.validate().map_err(PsoError::InfeasibleChromosome)?;
        Ok(spec)
    }

    /// Strict orderings with margin: every gene lies in its interval.
    pub fn is_feasible(&self, frames: &[VariableFrame; 3]) -> bool {
        (0..3).all(|v| {
            let g = self.variable(v);
            Gene::ORDER.iter().all(|&gene| match compute_bounds(g, &frames[v], gene) {
                Ok((lo, hi)) => (lo..=hi).contains(&g[gene.index()]),
                Err(_) => false,
            })
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsoConfig {
    /// Swarm size.
    pub particles: usize,
    pub iterations: usize,
    /// Inertia weight (constant).
    pub w: f64,
    pub c1: f64,
    pub c2: f64,
    pub seed: u64,
    /// Feasibility margin as a fraction of each variable's universe width.
    pub epsilon: f64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self { particles: 50, iterations: 20, w: 0.74, c1: 1.47, c2: 1.47, seed: 0, epsilon: 1e-6 }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<(), PsoError> {
        let bad = |m: String| Err(PsoError::InvalidConfig(m));
        if self.particles == 0 {
            return bad("particles must be >= 1".into());
        }
        if self.iterations == 0 {
            return bad("iterations must be >= 1".into());
        }
        for (name, v) in [("w", self.w), ("c1", self.c1), ("c2", self.c2)] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if !(self.epsilon >= 0.0 && self.epsilon < 0.25) {
            return bad(format!("epsilon must lie in [0, 0.25), got {}", self.epsilon));
        }
        Ok(())
    }
}

/// Something to maximize over chromosomes. NaN is treated as `-inf`.
pub trait Fitness: Sync {
    fn evaluate(&self, chromosome: &Chromosome) -> f64;
}

impl<F> Fitness for F
where
    F: Fn(&Chromosome) -> f64 + Sync,
{
    fn evaluate(&self, chromosome: &Chromosome) -> f64 {
        self(chromosome)
    }
}

fn score(fitness: &dyn Fitness, c: &Chromosome) -> f64 {
    let f = fitness.evaluate(c);
    if f.is_nan() {
        f64::NEG_INFINITY
    } else {
        f
    }
}

#[derive(Debug, Clone)]
pub struct Particle {
    pub position: Chromosome,
    pub velocity: [f64; CHROMOSOME_LEN],
    pub pbest: Chromosome,
    pub pbest_fitness: f64,
    /// Feasible interval of every dimension at the last update.
    pub bounds: [(f64, f64); CHROMOSOME_LEN],
    rng: ChaCha8Rng,
}

impl Particle {
    /// Moves every dimension once, in gene order, toward `pbest` and `gbest`.
    fn advance(&mut self, gbest: &Chromosome, frames: &[VariableFrame; 3], config: &PsoConfig) -> Result<(), PsoError> {
        for (v, slot) in Slot::ALL.into_iter().enumerate() {
            for gene in Gene::ORDER {
                let d = v * GENES_PER_VARIABLE + gene.index();
                let new = bounds_for(self.position.variable(v), &frames[v], slot, gene)?;
                let old = self.bounds[d];

                let mut x = self.position.genes[d];
                if x < new.0 || x > new.1 {
                    x = clamp_position_proportional(x, old, new).unwrap_or_else(|_| x.clamp(new.0, new.1));
                }

                let r1: f64 = self.rng.gen();
                let r2: f64 = self.rng.gen();
                let (vel, v_min, v_max) =
                    update_velocity(self.velocity[d], x, self.pbest.genes[d], gbest.genes[d], r1, r2, config, new);

                self.position.genes[d] = update_position(x, vel, old, new, v_min, v_max);
                self.velocity[d] = vel;
                self.bounds[d] = new;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Swarm {
    pub particles: Vec<Particle>,
    pub gbest: Chromosome,
    pub gbest_fitness: f64,
    /// gbest fitness after initialization, then after every iteration.
    pub trace: Vec<f64>,
    pub frames: [VariableFrame; 3],
}

/// Samples every particle dimension by dimension inside its feasible
/// interval; velocities start at zero. Fitness is not evaluated yet.
pub fn init_swarm(config: &PsoConfig, template: &FlcSpec) -> Result<Swarm, PsoError> {
    config.validate()?;
    let frames = frames(template, config.epsilon);
    let particles = (0..config.particles)
        .map(|k| {
            let mut rng = substream(config.seed, &[TAG_PSO, k as u64]);
            let mut genes = [0.0; CHROMOSOME_LEN];
            let mut bounds = [(0.0, 0.0); CHROMOSOME_LEN];
            for (v, slot) in Slot::ALL.into_iter().enumerate() {
                for gene in Gene::ORDER {
                    let d = v * GENES_PER_VARIABLE + gene.index();
                    let var = &genes[v * GENES_PER_VARIABLE..(v + 1) * GENES_PER_VARIABLE];
                    let (lo, hi) = bounds_for(var, &frames[v], slot, gene)?;
                    genes[d] = lo + (hi - lo) * rng.gen::<f64>();
                    bounds[d] = (lo, hi);
                }
            }
            let position = Chromosome { genes };
            Ok(Particle {
                position,
                velocity: [0.0; CHROMOSOME_LEN],
                pbest: position,
                pbest_fitness: f64::NEG_INFINITY,
                bounds,
                rng,
            })
        })
        .collect::<Result<Vec<_>, PsoError>>()?;
    let gbest = particles[0].position;
    Ok(Swarm { particles, gbest, gbest_fitness: f64::NEG_INFINITY, trace: Vec::new(), frames })
}

impl Swarm {
    fn absorb(&mut self, scores: &[f64]) {
        for (p, &f) in self.particles.iter_mut().zip(scores) {
            if f > p.pbest_fitness {
                p.pbest_fitness = f;
                p.pbest = p.position;
            }
        }
        for p in &self.particles {
            if p.pbest_fitness > self.gbest_fitness {
                self.gbest_fitness = p.pbest_fitness;
                self.gbest = p.pbest;
            }
        }
        self.trace.push(self.gbest_fitness);
    }

    /// Scores the initial positions. Call once before [`Swarm::step`].
    pub fn evaluate_initial(&mut self, fitness: &dyn Fitness, exec: Execution) {
        let scores = exec.map_slice(&self.particles, |p| score(fitness, &p.position));
        self.absorb(&scores);
    }

    /// One synchronous iteration: all particles move using the current
    /// gbest, then the whole swarm is scored and the bests refreshed
    /// (ties keep the lowest particle index).
    pub fn step(&mut self, config: &PsoConfig, fitness: &dyn Fitness, exec: Execution) -> Result<(), PsoError> {
        let gbest = self.gbest;
        let frames = self.frames;
        let results = {
            let mut errs: Vec<Option<PsoError>> = vec![None; self.particles.len()];
            let mut pairs: Vec<(&mut Particle, &mut Option<PsoError>)> =
                self.particles.iter_mut().zip(errs.iter_mut()).collect();
            exec.for_each_mut(&mut pairs, |_, (p, e)| {
                if let Err(err) = p.advance(&gbest, &frames, config) {
                    **e = Some(err);
                }
            });
            errs
        };
        if let Some(err) = results.into_iter().flatten().next() {
            return Err(err);
        }
        let scores = exec.map_slice(&self.particles, |p| score(fitness, &p.position));
        self.absorb(&scores);
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PsoOutcome {
    pub best: Chromosome,
    pub best_fitness: f64,
    /// `iterations + 1` entries: the initial gbest fitness, then one per
    /// iteration.
    pub trace: Vec<f64>,
}

impl PsoOutcome {
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,gbest_fitness\n");
        for (i, f) in self.trace.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i, crate::io::fmt_num(*f)));
        }
        out
    }
}

/// Runs the swarm for `config.iterations` iterations and returns the
/// global best.
pub fn run_pso(
    config: &PsoConfig,
    template: &FlcSpec,
    fitness: &dyn Fitness,
    exec: Execution,
) -> Result<PsoOutcome, PsoError> {
    let mut swarm = init_swarm(config, template)?;
    swarm.evaluate_initial(fitness, exec);
    for _ in 0..config.iterations {
        swarm.step(config, fitness, exec)?;
    }
    Ok(PsoOutcome { best: swarm.gbest, best_fitness: swarm.gbest_fitness, trace: swarm.trace })
}
