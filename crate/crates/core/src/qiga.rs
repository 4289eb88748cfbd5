//! Quantum-inspired genetic algorithm over binary strings.
//!
//! Each gene is a real amplitude pair `(alpha, beta)` with
//! `alpha^2 + beta^2 = 1`. Measuring a gene yields 1 with probability
//! `alpha^2`. The population is pulled toward the best string found so far by
//! small orthogonal rotations; there is no crossover or mutation.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{BinaryProblem, Evaluation};
use crate::rng::{rng_for, SimRng};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Qubit {
    pub alpha: f64,
    pub beta: f64,
}

impl Qubit {
    pub const UNIFORM: Qubit = Qubit {
        alpha: FRAC_1_SQRT_2,
        beta: FRAC_1_SQRT_2,
    };

    pub fn norm_sqr(&self) -> f64 {
        self.alpha * self.alpha + self.beta * self.beta
    }

    /// Probability that measurement yields 1.
    pub fn p_one(&self) -> f64 {
        self.alpha * self.alpha
    }

    pub fn rotated(&self, theta: f64) -> Qubit {
        let (s, c) = theta.sin_cos();
        Qubit {
            alpha: c * self.alpha - s * self.beta,
            beta: s * self.alpha + c * self.beta,
        }
    }

    fn normalized(&self) -> Qubit {
        let n = self.norm_sqr().sqrt();
        Qubit {
            alpha: self.alpha / n,
            beta: self.beta / n,
        }
    }
}

/// Collapse one gene: draw `r` in [0, 1); return 0 if `r > alpha^2`, else 1.
pub fn measure<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> bool {
    let r: f64 = rng.random();
    r <= alpha * alpha
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitChromosome {
    pub amplitudes: Vec<Qubit>,
    pub measured: Option<Vec<bool>>,
}

impl QubitChromosome {
    pub fn uniform(m: usize) -> Self {
        QubitChromosome {
            amplitudes: vec![Qubit::UNIFORM; m],
            measured: None,
        }
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn max_norm_error(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|q| (q.norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    fn renormalize(&mut self) {
        for q in &mut self.amplitudes {
            *q = q.normalized();
        }
    }
}

pub fn measure_chromosome<R: Rng + ?Sized>(chrom: &mut QubitChromosome, rng: &mut R) -> Vec<bool> {
    let bits: Vec<bool> = chrom.amplitudes.iter().map(|q| measure(q.alpha, rng)).collect();
    chrom.measured = Some(bits.clone());
    bits
}

/// Which bit a rotation pushes the gene toward.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Toward {
    Best,
    Own,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationRule {
    pub magnitude: f64,
    pub toward: Toward,
}

impl RotationRule {
    pub const NONE: RotationRule = RotationRule {
        magnitude: 0.0,
        toward: Toward::Best,
    };
}

/// Rotation lookup keyed by (measured bit, best bit, own fitness >= best).
///
/// The actual sign of the angle is derived from the gene's quadrant so that
/// the amplitude of the target bit grows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationPolicy {
    table: [[[RotationRule; 2]; 2]; 2],
}

impl Default for RotationPolicy {
    fn default() -> Self {
        Self::with_magnitude(0.01 * PI)
    }
}

impl RotationPolicy {
    /// Move a disagreeing gene toward whichever of the two strings is fitter.
    pub fn with_magnitude(magnitude: f64) -> Self {
        let mut policy = RotationPolicy::zero();
        for (x, b) in [(false, true), (true, false)] {
            policy.set(x, b, false, RotationRule { magnitude, toward: Toward::Best });
            policy.set(x, b, true, RotationRule { magnitude, toward: Toward::Own });
        }
        policy
    }

    pub fn zero() -> Self {
        RotationPolicy {
            table: [[[RotationRule::NONE; 2]; 2]; 2],
        }
    }

    pub fn set(&mut self, own_bit: bool, best_bit: bool, own_not_worse: bool, rule: RotationRule) {
        self.table[own_bit as usize][best_bit as usize][own_not_worse as usize] = rule;
    }

    pub fn rule(&self, own_bit: bool, best_bit: bool, own_not_worse: bool) -> RotationRule {
        self.table[own_bit as usize][best_bit as usize][own_not_worse as usize]
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self
            .table
            .iter()
            .flatten()
            .flatten()
            .all(|r| r.magnitude.abs() <= PI / 2.0);
        if ok {
            Ok(())
        } else {
            Err(Error::config("rotation magnitudes must not exceed pi/2"))
        }
    }

    /// Signed angle for a gene currently at `q`.
    pub fn angle(&self, q: &Qubit, own_bit: bool, best_bit: bool, own_not_worse: bool) -> f64 {
        let rule = self.rule(own_bit, best_bit, own_not_worse);
        if rule.magnitude == 0.0 {
            return 0.0;
        }
        let target = match rule.toward {
            Toward::Best => best_bit,
            Toward::Own => own_bit,
        };
        rule.magnitude * direction(q, target)
    }
}

/// Sign of the angle that increases the probability of measuring `target`.
/// Zero when that probability is already one.
fn direction(q: &Qubit, target: bool) -> f64 {
    let ab = q.alpha * q.beta;
    let saturated = if target { q.beta == 0.0 } else { q.alpha == 0.0 };
    if saturated {
        0.0
    } else if ab == 0.0 {
        1.0
    } else if target {
        // d(alpha^2)/d(theta) = -2 alpha beta
        -ab.signum()
    } else {
        ab.signum()
    }
}

/// Rotate every gene of a measured chromosome.
pub fn rotate(
    chrom: &QubitChromosome,
    best_bits: &[bool],
    own_fitness: f64,
    best_fitness: f64,
    policy: &RotationPolicy,
) -> Result<QubitChromosome> {
    let mut out = chrom.clone();
    rotate_in_place(&mut out, best_bits, own_fitness, best_fitness, policy)?;
    Ok(out)
}

fn rotate_in_place(
    chrom: &mut QubitChromosome,
    best_bits: &[bool],
    own_fitness: f64,
    best_fitness: f64,
    policy: &RotationPolicy,
) -> Result<()> {
    let measured = chrom.measured.as_ref().ok_or(Error::Unmeasured)?;
    if measured.len() != best_bits.len() || measured.len() != chrom.amplitudes.len() {
        return Err(Error::LengthMismatch {
            expected: chrom.amplitudes.len(),
            found: best_bits.len(),
        });
    }
    let not_worse = own_fitness >= best_fitness;
    for ((q, &x), &b) in chrom.amplitudes.iter_mut().zip(measured).zip(best_bits) {
        let theta = policy.angle(q, x, b, not_worse);
        if theta != 0.0 {
            *q = q.rotated(theta);
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QigaConfig {
    pub population_size: usize,
    pub max_iterations: usize,
    pub rotation_policy: RotationPolicy,
    pub rng_seed: u64,
    /// Re-normalize every gene after each generation.
    pub renormalize: bool,
}

impl Default for QigaConfig {
    fn default() -> Self {
        QigaConfig {
            population_size: 200,
            max_iterations: 500,
            rotation_policy: RotationPolicy::default(),
            rng_seed: 0,
            renormalize: true,
        }
    }
}

impl QigaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size == 0 || self.max_iterations == 0 {
            return Err(Error::config(
                "population size and iteration count must be at least 1",
            ));
        }
        self.rotation_policy.validate()
    }
}

pub fn init_population(m: usize, config: &QigaConfig) -> Vec<QubitChromosome> {
    vec![QubitChromosome::uniform(m); config.population_size]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerResult<E> {
    pub best_bits: Vec<bool>,
    pub best_eval: E,
    /// Best-so-far fitness after initialization and after each iteration.
    pub history: Vec<f64>,
    pub evaluations: usize,
    /// Measured strings of the last generation with their evaluations.
    pub final_population: Vec<(Vec<bool>, E)>,
    /// Largest `|alpha^2 + beta^2 - 1|` seen before any re-normalization.
    pub max_norm_drift: f64,
}

/// Stepwise driver; [`run`] wraps it for the common case.
pub struct Qiga<E> {
    config: QigaConfig,
    rng: SimRng,
    population: Vec<QubitChromosome>,
    evaluated: Vec<(Vec<bool>, E)>,
    best: Option<(Vec<bool>, E)>,
    history: Vec<f64>,
    evaluations: usize,
    max_norm_drift: f64,
}

impl<E: Evaluation> Qiga<E> {
    pub fn new(m: usize, config: QigaConfig) -> Result<Self> {
        config.validate()?;
        let population = init_population(m, &config);
        let rng = rng_for(config.rng_seed, &[0x9194]);
        Ok(Qiga {
            config,
            rng,
            population,
            evaluated: Vec::new(),
            best: None,
            history: Vec::new(),
            evaluations: 0,
            max_norm_drift: 0.0,
        })
    }

    pub fn population(&self) -> &[QubitChromosome] {
        &self.population
    }

    pub fn best(&self) -> Option<&(Vec<bool>, E)> {
        self.best.as_ref()
    }

    fn measure_and_evaluate<P>(&mut self, problem: &mut P) -> std::result::Result<(), P::Error>
    where
        P: BinaryProblem<Eval = E>,
    {
        self.evaluated.clear();
        for chrom in &mut self.population {
            let bits = measure_chromosome(chrom, &mut self.rng);
            let eval = problem.evaluate(&bits)?;
            self.evaluated.push((bits, eval));
        }
        self.evaluations += self.population.len();
        Ok(())
    }

    fn store_best(&mut self) {
        let mut idx = None;
        let mut top = self.best.as_ref().map(|(_, e)| e.fitness());
        for (i, (_, e)) in self.evaluated.iter().enumerate() {
            let f = e.fitness();
            if top.is_none_or(|t| f > t) {
                top = Some(f);
                idx = Some(i);
            }
        }
        if let Some(i) = idx {
            self.best = Some(self.evaluated[i].clone());
        }
        if let Some(t) = top {
            self.history.push(t);
        }
    }

    /// Initialize: measure, evaluate and record the first best.
    pub fn start<P>(&mut self, problem: &mut P) -> std::result::Result<(), P::Error>
    where
        P: BinaryProblem<Eval = E>,
    {
        self.measure_and_evaluate(problem)?;
        self.store_best();
        Ok(())
    }

    /// One iteration: measure, evaluate, rotate toward the stored best, then
    /// update the stored best.
    pub fn step<P>(&mut self, problem: &mut P) -> std::result::Result<(), P::Error>
    where
        P: BinaryProblem<Eval = E>,
    {
        self.measure_and_evaluate(problem)?;
        let (best_bits, best_eval) = self.best.as_ref().expect("start() must run first");
        let best_fitness = best_eval.fitness();
        for (chrom, (_, eval)) in self.population.iter_mut().zip(&self.evaluated) {
            rotate_in_place(chrom, best_bits, eval.fitness(), best_fitness, &self.config.rotation_policy)
                .expect("population strings match the best string length");
            self.max_norm_drift = self.max_norm_drift.max(chrom.max_norm_error());
            if self.config.renormalize {
                chrom.renormalize();
            }
        }
        self.store_best();
        Ok(())
    }

    pub fn finish(self) -> OptimizerResult<E> {
        let (best_bits, best_eval) = self.best.expect("start() must run first");
        OptimizerResult {
            best_bits,
            best_eval,
            history: self.history,
            evaluations: self.evaluations,
            final_population: self.evaluated,
            max_norm_drift: self.max_norm_drift,
        }
    }
}

/// Run the optimizer for `max_iterations` iterations after initialization and
/// return the best string ever measured.
pub fn run<P>(problem: &mut P, config: &QigaConfig) -> std::result::Result<OptimizerResult<P::Eval>, P::Error>
where
    P: BinaryProblem,
    P::Error: From<Error>,
{
    let mut qiga = Qiga::new(problem.num_bits(), config.clone())?;
    qiga.start(problem)?;
    for _ in 0..config.max_iterations {
        qiga.step(problem)?;
    }
    Ok(qiga.finish())
}
