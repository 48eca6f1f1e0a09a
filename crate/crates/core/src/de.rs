//! Differential evolution with an externally chosen mutation configuration
//! per generation.
//!
//! Random draws happen in a fixed order so runs can be replayed: for each
//! target `i` in turn, `mutate` draws the pbest slot (current-to-pbest only)
//! and then `r1, r2, r3` as needed, each by rejection from
//! `random_range(0..np)`; `crossover_select` draws `j_rand` and then one
//! uniform per dimension for each target in turn.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::Objective;

pub const N_ACTIONS: usize = 15;
pub const F_VALUES: [f64; 3] = [0.1, 0.5, 0.9];
pub const MIN_POPULATION: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationOperator {
    Rand1,
    Best1,
    CurrentToRand,
    CurrentToPbest,
    CurrentToBest,
}

impl MutationOperator {
    pub const ALL: [MutationOperator; 5] = [
        MutationOperator::Rand1,
        MutationOperator::Best1,
        MutationOperator::CurrentToRand,
        MutationOperator::CurrentToPbest,
        MutationOperator::CurrentToBest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MutationOperator::Rand1 => "rand1",
            MutationOperator::Best1 => "best1",
            MutationOperator::CurrentToRand => "current_to_rand",
            MutationOperator::CurrentToPbest => "current_to_pbest",
            MutationOperator::CurrentToBest => "current_to_best",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MutationConfig {
    pub operator: MutationOperator,
    pub f: f64,
}

impl fmt::Display for MutationConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(F={})", self.operator.name(), self.f)
    }
}

/// `a = 3 * operator + F index`.
pub fn decode_action(a: usize) -> Result<MutationConfig> {
    if a >= N_ACTIONS {
        return Err(Error::ActionOutOfRange(a));
    }
    Ok(MutationConfig { operator: MutationOperator::ALL[a / 3], f: F_VALUES[a % 3] })
}

/// Inverse of [`decode_action`] for configs drawn from the action set.
pub fn encode_action(cfg: MutationConfig) -> Option<usize> {
    let op = MutationOperator::ALL.iter().position(|&o| o == cfg.operator)?;
    let fi = F_VALUES.iter().position(|&f| f == cfg.f)?;
    Some(3 * op + fi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeParams {
    pub np: usize,
    pub cr: f64,
    /// Fraction of the population eligible as pbest.
    pub p_best: f64,
}

impl Default for DeParams {
    fn default() -> Self {
        DeParams { np: 100, cr: 0.7, p_best: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub xs: Vec<Vec<f64>>,
    pub ys: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
    pub best_idx: usize,
    pub best_x: Vec<f64>,
    pub best_y: f64,
}

fn argmin(ys: &[f64]) -> usize {
    let mut best = 0;
    for (i, y) in ys.iter().enumerate() {
        if *y < ys[best] {
            best = i;
        }
    }
    best
}

impl Population {
    /// Evaluates `xs` and builds a population around them.
    pub fn from_points<O: Objective + ?Sized>(
        xs: Vec<Vec<f64>>,
        bounds: (f64, f64),
        evaluator: &mut O,
    ) -> Result<Population> {
        let ys = evaluator.evaluate_batch(&xs)?;
        Population::from_evaluated(xs, ys, bounds)
    }

    pub fn from_evaluated(xs: Vec<Vec<f64>>, ys: Vec<f64>, bounds: (f64, f64)) -> Result<Population> {
        if xs.len() != ys.len() || xs.is_empty() {
            return Err(Error::InvalidConfig("population needs matching, non-empty xs and ys".into()));
        }
        let best_idx = argmin(&ys);
        Ok(Population {
            best_x: xs[best_idx].clone(),
            best_y: ys[best_idx],
            xs,
            ys,
            lower: bounds.0,
            upper: bounds.1,
            best_idx,
        })
    }

    /// Uniform initialisation inside the bounds.
    pub fn initialize<O: Objective + ?Sized, R: Rng + ?Sized>(
        np: usize,
        bounds: (f64, f64),
        evaluator: &mut O,
        rng: &mut R,
    ) -> Result<Population> {
        let dim = evaluator.dim();
        let xs = (0..np).map(|_| (0..dim).map(|_| rng.random_range(bounds.0..bounds.1)).collect()).collect();
        Population::from_points(xs, bounds, evaluator)
    }

    pub fn np(&self) -> usize {
        self.xs.len()
    }

    pub fn dim(&self) -> usize {
        self.xs[0].len()
    }

    pub fn mean_y(&self) -> f64 {
        self.ys.iter().sum::<f64>() / self.ys.len() as f64
    }
}

fn draw_distinct<R: Rng + ?Sized>(np: usize, exclude: &[usize], rng: &mut R) -> usize {
    loop {
        let r = rng.random_range(0..np);
        if !exclude.contains(&r) {
            return r;
        }
    }
}

/// Donor vectors for every member of `pop`.
pub fn mutate<R: Rng + ?Sized>(
    pop: &Population,
    cfg: MutationConfig,
    p_best: f64,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    let np = pop.np();
    if np < MIN_POPULATION {
        return Err(Error::PopulationTooSmall { need: MIN_POPULATION, have: np });
    }
    let dim = pop.dim();
    let f = cfg.f;
    let best = &pop.xs[pop.best_idx];
    let top: Vec<usize> = if cfg.operator == MutationOperator::CurrentToPbest {
        let mut order: Vec<usize> = (0..np).collect();
        order.sort_by(|&a, &b| pop.ys[a].total_cmp(&pop.ys[b]).then(a.cmp(&b)));
        let k = ((p_best * np as f64).ceil() as usize).clamp(1, np);
        order.truncate(k);
        order
    } else {
        Vec::new()
    };
    let mut donors = Vec::with_capacity(np);
    for i in 0..np {
        let xi = &pop.xs[i];
        let pb = if top.is_empty() { 0 } else { top[rng.random_range(0..top.len())] };
        let needed = match cfg.operator {
            MutationOperator::Rand1 | MutationOperator::CurrentToRand => 3,
            _ => 2,
        };
        let mut r = [i, 0, 0, 0];
        for k in 1..=needed {
            r[k] = draw_distinct(np, &r[..k], rng);
        }
        let (x1, x2, x3) = (&pop.xs[r[1]], &pop.xs[r[2]], &pop.xs[r[3]]);
        let donor: Vec<f64> = (0..dim)
            .map(|j| match cfg.operator {
                MutationOperator::Rand1 => x1[j] + f * (x2[j] - x3[j]),
                MutationOperator::Best1 => best[j] + f * (x1[j] - x2[j]),
                MutationOperator::CurrentToRand => xi[j] + f * (x1[j] - xi[j]) + f * (x2[j] - x3[j]),
                MutationOperator::CurrentToPbest => {
                    xi[j] + f * (pop.xs[pb][j] - xi[j]) + f * (x1[j] - x2[j])
                }
                MutationOperator::CurrentToBest => xi[j] + f * (best[j] - xi[j]) + f * (x1[j] - x2[j]),
            })
            .collect();
        donors.push(donor);
    }
    Ok(donors)
}

/// Binomial crossover (guaranteed `j_rand`), clamping, and greedy one-to-one
/// selection (ties go to the trial).
pub fn crossover_select<O: Objective + ?Sized, R: Rng + ?Sized>(
    pop: &Population,
    donors: &[Vec<f64>],
    cr: f64,
    evaluator: &mut O,
    rng: &mut R,
) -> Result<Population> {
    let np = pop.np();
    if donors.len() != np {
        return Err(Error::DimensionMismatch { expected: np, got: donors.len() });
    }
    let dim = pop.dim();
    let mut trials = Vec::with_capacity(np);
    for (x, v) in pop.xs.iter().zip(donors) {
        if v.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
        }
        let j_rand = rng.random_range(0..dim);
        let u: Vec<f64> = (0..dim)
            .map(|j| {
                let take = rng.random::<f64>() < cr || j == j_rand;
                let val = if take { v[j] } else { x[j] };
                val.clamp(pop.lower, pop.upper)
            })
            .collect();
        trials.push(u);
    }
    let trial_ys = evaluator.evaluate_batch(&trials)?;
    let mut next = pop.clone();
    for (i, (u, fu)) in trials.into_iter().zip(trial_ys).enumerate() {
        if fu <= next.ys[i] {
            next.xs[i] = u;
            next.ys[i] = fu;
        }
    }
    next.best_idx = argmin(&next.ys);
    if next.ys[next.best_idx] < next.best_y {
        next.best_y = next.ys[next.best_idx];
        next.best_x = next.xs[next.best_idx].clone();
    }
    Ok(next)
}

/// One line of the per-generation trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub action: Option<usize>,
    pub fes: u64,
    pub best_y: f64,
    pub mean_y: f64,
}

/// A budgeted DE run. Generation 0 is the initial population; a further
/// generation is only started while it fits in the budget, so a run has
/// `max_fes / np` generations in total.
#[derive(Debug, Clone)]
pub struct DeRun {
    pub params: DeParams,
    pub pop: Population,
    pub generation: usize,
    pub fes: u64,
    pub max_fes: u64,
    pub trace: Vec<GenerationRecord>,
}

impl DeRun {
    pub fn start<O: Objective + ?Sized, R: Rng + ?Sized>(
        params: DeParams,
        bounds: (f64, f64),
        max_fes: u64,
        evaluator: &mut O,
        rng: &mut R,
    ) -> Result<DeRun> {
        if params.np < MIN_POPULATION {
            return Err(Error::PopulationTooSmall { need: MIN_POPULATION, have: params.np });
        }
        if (params.np as u64) > max_fes {
            return Err(Error::InvalidConfig(format!("budget {max_fes} below population size {}", params.np)));
        }
        let pop = Population::initialize(params.np, bounds, evaluator, rng)?;
        let fes = params.np as u64;
        let trace = vec![GenerationRecord { generation: 0, action: None, fes, best_y: pop.best_y, mean_y: pop.mean_y() }];
        Ok(DeRun { params, pop, generation: 0, fes, max_fes, trace })
    }

    pub fn is_done(&self) -> bool {
        self.fes + self.params.np as u64 > self.max_fes
    }

    pub fn total_generations(&self) -> usize {
        (self.max_fes / self.params.np as u64) as usize
    }

    pub fn step<O: Objective + ?Sized, R: Rng + ?Sized>(
        &mut self,
        cfg: MutationConfig,
        action: Option<usize>,
        evaluator: &mut O,
        rng: &mut R,
    ) -> Result<&GenerationRecord> {
        if self.is_done() {
            return Err(Error::BudgetExhausted { budget: self.max_fes });
        }
        let donors = mutate(&self.pop, cfg, self.params.p_best, rng)?;
        self.pop = crossover_select(&self.pop, &donors, self.params.cr, evaluator, rng)?;
        self.fes += self.params.np as u64;
        self.generation += 1;
        self.trace.push(GenerationRecord {
            generation: self.generation,
            action,
            fes: self.fes,
            best_y: self.pop.best_y,
            mean_y: self.pop.mean_y(),
        });
        Ok(self.trace.last().unwrap())
    }

    /// Runs to the end of the budget with one fixed configuration.
    pub fn run_static<O: Objective + ?Sized, R: Rng + ?Sized>(
        &mut self,
        cfg: MutationConfig,
        evaluator: &mut O,
        rng: &mut R,
    ) -> Result<()> {
        let action = encode_action(cfg);
        while !self.is_done() {
            self.step(cfg, action, evaluator, rng)?;
        }
        Ok(())
    }
}
