//! Bound-constrained bat-algorithm minimisers.
//!
//! Three variants share one loop. Each iteration first moves every bat, then
//! proposes a local random walk around the best bat (or a random peer) and
//! keeps it when it is strictly better and passes the loudness test.
//!
//! - [`Variant::StandardBa`] moves bats with the frequency/velocity rule.
//! - [`Variant::Gbbba`] replaces that move with a Gaussian bare-bones draw.
//! - [`Variant::Degbbba`] shrinks the bare-bones spread linearly from 1 to 0.1.
//!
//! Random numbers come from ChaCha8 with a 64-bit seed and a stream index, so
//! a run is reproducible bit for bit on every platform. Fitness evaluations
//! may run on a rayon pool; all random draws and state updates happen in bat
//! order on the calling thread.

mod operators;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::Bounds;

pub use operators::{
    ba_velocity_position_update, bare_bones_component, frequency_draw, frequency_from, gaussian_barebones_update,
    greedy_accept, initialize_population, lambda_schedule, local_random_walk, update_loudness_pulse,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
    #[error("fitness returned NaN at {position:?}")]
    NanFitness { position: Vec<f64> },
    #[error("unknown algorithm '{0}' (expected ba, gbbba or degbbba)")]
    UnknownVariant(String),
    #[error("unknown velocity sign '{0}' (expected paper or conventional)")]
    UnknownVelocitySign(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    StandardBa,
    Gbbba,
    Degbbba,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::StandardBa, Variant::Gbbba, Variant::Degbbba];

    pub fn key(self) -> &'static str {
        match self {
            Variant::StandardBa => "ba",
            Variant::Gbbba => "gbbba",
            Variant::Degbbba => "degbbba",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Variant::StandardBa => "BA",
            Variant::Gbbba => "GBBBA",
            Variant::Degbbba => "DeGBBBA",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Variant {
    type Err = OptimizerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ba" => Ok(Variant::StandardBa),
            "gbbba" => Ok(Variant::Gbbba),
            "degbbba" => Ok(Variant::Degbbba),
            _ => Err(OptimizerError::UnknownVariant(s.to_string())),
        }
    }
}

/// Orientation of the frequency-weighted difference in the velocity update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum VelocitySign {
    /// `V += f (X_i - X_best)`
    #[default]
    Paper,
    /// `V += f (X_best - X_i)`
    Conventional,
}

impl VelocitySign {
    pub fn key(self) -> &'static str {
        match self {
            VelocitySign::Paper => "paper",
            VelocitySign::Conventional => "conventional",
        }
    }
}

impl FromStr for VelocitySign {
    type Err = OptimizerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "paper" => Ok(VelocitySign::Paper),
            "conventional" => Ok(VelocitySign::Conventional),
            _ => Err(OptimizerError::UnknownVelocitySign(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub variant: Variant,
    pub population: usize,
    pub max_iterations: usize,
    pub f_min: f64,
    pub f_max: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// Initial loudness is drawn uniformly from this interval.
    pub loudness_range: (f64, f64),
    /// Initial pulse rate is drawn uniformly from this interval.
    pub pulse_range: (f64, f64),
    /// Use `R0 (1 - exp(-gamma t))` instead of `R0 (1 - exp(-gamma))`.
    pub pulse_time_dependent: bool,
    pub velocity_sign: VelocitySign,
    /// Replaces the bare-bones spread schedule with a constant.
    pub lambda_override: Option<f64>,
    pub rng_seed: u64,
    pub rng_stream: u64,
    /// Evaluate each generation on the rayon pool.
    pub parallel: bool,
}

impl OptimizerConfig {
    pub fn new(variant: Variant, population: usize, max_iterations: usize) -> Self {
        Self {
            variant,
            population,
            max_iterations,
            f_min: 0.0,
            f_max: 100.0,
            alpha: 0.9,
            gamma: 0.9,
            loudness_range: (1.0, 2.0),
            pulse_range: (0.0, 1.0),
            pulse_time_dependent: false,
            velocity_sign: VelocitySign::Paper,
            lambda_override: None,
            rng_seed: 0,
            rng_stream: 0,
            parallel: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.rng_stream = stream;
        self
    }

    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn validate(&self) -> Result<(), OptimizerError> {
        let bad = |msg: String| Err(OptimizerError::InvalidConfig(msg));
        if self.population < 2 {
            return bad(format!("population must be at least 2, got {}", self.population));
        }
        if self.max_iterations < 1 {
            return bad("max_iterations must be at least 1".into());
        }
        if !(self.f_min.is_finite() && self.f_max.is_finite() && self.f_min <= self.f_max) {
            return bad(format!("frequency range [{}, {}] is invalid", self.f_min, self.f_max));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be positive, got {}", self.gamma));
        }
        let (a0, a1) = self.loudness_range;
        if !(a0 > 0.0 && a0 <= a1 && a1.is_finite()) {
            return bad(format!("loudness range [{a0}, {a1}] is invalid"));
        }
        let (r0, r1) = self.pulse_range;
        if !(0.0 <= r0 && r0 <= r1 && r1 <= 1.0) {
            return bad(format!("pulse range [{r0}, {r1}] is invalid"));
        }
        if let Some(l) = self.lambda_override {
            if !(l > 0.0 && l <= 1.0) {
                return bad(format!("lambda override must lie in (0, 1], got {l}"));
            }
        }
        Ok(())
    }

    /// Spread multiplier of the bare-bones draw at iteration `t` (1-based).
    pub fn lambda_at(&self, t: usize) -> f64 {
        match self.variant {
            Variant::StandardBa | Variant::Gbbba => 1.0,
            Variant::Degbbba => self
                .lambda_override
                .unwrap_or_else(|| lambda_schedule(t, self.max_iterations)),
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        make_rng(self.rng_seed, self.rng_stream)
    }
}

/// ChaCha8 generator for `(seed, stream)`; streams of one seed are independent.
pub fn make_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bat {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub frequency: f64,
    pub loudness: f64,
    pub pulse_rate: f64,
    pub initial_pulse_rate: f64,
    pub fitness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub best_fitness: f64,
    pub best_position: Vec<f64>,
    /// Mean over bats with finite fitness, `+inf` if there are none.
    pub mean_fitness: f64,
    pub lambda_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    pub records: Vec<IterationRecord>,
    pub evaluations: usize,
}

struct Incumbent {
    position: Vec<f64>,
    fitness: f64,
}

impl Incumbent {
    fn offer(&mut self, position: &[f64], fitness: f64) {
        if fitness < self.fitness {
            self.fitness = fitness;
            self.position.clear();
            self.position.extend_from_slice(position);
        }
    }
}

fn evaluate_all<F>(fitness: &F, points: &[Vec<f64>], parallel: bool) -> Result<Vec<f64>, OptimizerError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let values: Vec<f64> = if parallel {
        points.par_iter().map(|x| fitness(x)).collect()
    } else {
        points.iter().map(|x| fitness(x)).collect()
    };
    match values.iter().position(|v| v.is_nan()) {
        Some(k) => Err(OptimizerError::NanFitness {
            position: points[k].clone(),
        }),
        None => Ok(values),
    }
}

fn population_best(bats: &[Bat]) -> Vec<f64> {
    let mut k = 0;
    for (i, b) in bats.iter().enumerate() {
        if b.fitness < bats[k].fitness {
            k = i;
        }
    }
    bats[k].position.clone()
}

fn finite_mean(bats: &[Bat]) -> f64 {
    let finite: Vec<f64> = bats.iter().map(|b| b.fitness).filter(|f| f.is_finite()).collect();
    if finite.is_empty() {
        f64::INFINITY
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    }
}

/// Minimises `fitness` over `bounds`.
///
/// `fitness` must be pure; `+inf` marks a rejected point and NaN aborts the
/// run. The result holds one record per iteration.
pub fn run<F>(fitness: F, bounds: &Bounds, config: &OptimizerConfig) -> Result<RunResult, OptimizerError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    config.validate()?;
    let mut rng = config.rng();
    let n = config.population;
    let mut bats = initialize_population(bounds, config, &mut rng);

    let initial: Vec<Vec<f64>> = bats.iter().map(|b| b.position.clone()).collect();
    let values = evaluate_all(&fitness, &initial, config.parallel)?;
    let mut evaluations = n;
    let mut best = Incumbent {
        position: bats[0].position.clone(),
        fitness: f64::INFINITY,
    };
    for (bat, &f) in bats.iter_mut().zip(&values) {
        bat.fitness = f;
        best.offer(&bat.position, f);
    }

    let mut records = Vec::with_capacity(config.max_iterations);
    for t in 1..=config.max_iterations {
        let lambda = config.lambda_at(t);
        let leader = population_best(&bats);

        // Global move.
        let moved: Vec<Vec<f64>> = bats
            .iter_mut()
            .map(|bat| match config.variant {
                Variant::StandardBa => {
                    bat.frequency = frequency_draw(config, &mut rng);
                    let (v, x) = ba_velocity_position_update(bat, &leader, bat.frequency, bounds, config.velocity_sign);
                    bat.velocity = v;
                    x
                }
                Variant::Gbbba | Variant::Degbbba => {
                    gaussian_barebones_update(&bat.position, &leader, lambda, &mut rng, bounds)
                }
            })
            .collect();
        let values = evaluate_all(&fitness, &moved, config.parallel)?;
        evaluations += n;
        for ((bat, x), f) in bats.iter_mut().zip(moved).zip(values) {
            bat.position = x;
            bat.fitness = f;
            best.offer(&bat.position, f);
        }

        // Local random walk and greedy acceptance.
        let leader = population_best(&bats);
        let mut candidates = Vec::with_capacity(n);
        let mut accept_draws = Vec::with_capacity(n);
        for i in 0..n {
            let peer = {
                let r = rng.random_range(0..n - 1);
                if r >= i {
                    r + 1
                } else {
                    r
                }
            };
            let bat = &bats[i];
            candidates.push(local_random_walk(
                &leader,
                &bats[peer].position,
                bat.loudness,
                bat.pulse_rate,
                &mut rng,
                bounds,
            ));
            accept_draws.push(rng.random::<f64>());
        }
        let values = evaluate_all(&fitness, &candidates, config.parallel)?;
        evaluations += n;
        for (((bat, x), f), r4) in bats.iter_mut().zip(candidates).zip(values).zip(accept_draws) {
            best.offer(&x, f);
            greedy_accept(bat, x, f, r4, t, config);
        }

        records.push(IterationRecord {
            iteration: t,
            best_fitness: best.fitness,
            best_position: best.position.clone(),
            mean_fitness: finite_mean(&bats),
            lambda_value: lambda,
        });
    }

    Ok(RunResult {
        best_position: best.position,
        best_fitness: best.fitness,
        records,
        evaluations,
    })
}
