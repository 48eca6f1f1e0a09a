use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::de::{DeParams, DeRun, MutationConfig, MutationOperator};
use crate::error::{Error, Result};
use crate::features::{extract_state, RunProgress};
use crate::objective::Objective;
use crate::problems::{Problem, ProblemSpec};
use crate::rl::DqnAgent;
use crate::seed::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMethod {
    RandomSearch,
    /// DE with rand/1, F = 0.5 for the whole run.
    StaticDe,
}

impl BaselineMethod {
    pub fn name(self) -> &'static str {
        match self {
            BaselineMethod::RandomSearch => "random_search",
            BaselineMethod::StaticDe => "static_de",
        }
    }
}

impl FromStr for BaselineMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "random_search" | "rs" => Ok(BaselineMethod::RandomSearch),
            "static_de" | "de" => Ok(BaselineMethod::StaticDe),
            _ => Err(Error::UnknownMode(s.to_string())),
        }
    }
}

/// A method under evaluation.
#[derive(Debug, Clone, Copy)]
pub enum Method<'a> {
    /// Greedy rollouts of a learned policy.
    Policy { name: &'a str, agent: &'a DqnAgent },
    Baseline(BaselineMethod),
}

impl Method<'_> {
    pub fn name(&self) -> &str {
        match self {
            Method::Policy { name, .. } => name,
            Method::Baseline(b) => b.name(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub fes: u64,
    pub best_y: f64,
}

/// One optimisation run on a true function. Wall time is measured but not
/// serialised, so logs of repeated runs compare byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: String,
    pub problem: String,
    pub dim: usize,
    pub run: usize,
    pub seed: u64,
    /// Best-so-far value after each generation (generation 0 included).
    pub trace: Vec<TracePoint>,
    pub final_best_y: f64,
    pub fes: u64,
    #[serde(skip)]
    pub wall_time: f64,
}

/// Seed of run `run` on `spec`; shared by all methods.
fn run_seed(seed_: u64, spec: &ProblemSpec, run: usize) -> u64 {
    seed::derive(seed::derive(seed_, Stream::Evaluation, spec.function.id() as u64), Stream::Evaluation, run as u64)
}

fn random_search<R: Rng + ?Sized>(
    problem: &mut Problem,
    max_fes: u64,
    np: usize,
    rng: &mut R,
) -> Result<Vec<TracePoint>> {
    let (lo, hi) = problem.spec().bounds();
    let dim = problem.dim();
    let generations = max_fes / np as u64;
    let mut best = f64::INFINITY;
    let mut trace = Vec::with_capacity(generations as usize);
    for g in 1..=generations {
        for _ in 0..np {
            let x: Vec<f64> = (0..dim).map(|_| rng.random_range(lo..hi)).collect();
            best = best.min(problem.evaluate(&x)?);
        }
        trace.push(TracePoint { fes: g * np as u64, best_y: best });
    }
    Ok(trace)
}

fn de_trace(run: &DeRun) -> Vec<TracePoint> {
    run.trace.iter().map(|g| TracePoint { fes: g.fes, best_y: g.best_y }).collect()
}

/// Greedy policy rollout.
fn policy_run<R: Rng + ?Sized>(
    agent: &DqnAgent,
    problem: &mut Problem,
    max_fes: u64,
    de: &DeParams,
    rng: &mut R,
) -> Result<Vec<TracePoint>> {
    let bounds = problem.spec().bounds();
    let mut run = DeRun::start(de.clone(), bounds, max_fes, problem, rng)?;
    let mut progress = RunProgress::start(&run.pop, run.fes, run.max_fes, run.total_generations());
    while !run.is_done() {
        let s = extract_state(&run.pop, &progress);
        let a = agent.select_with_epsilon(&s, rng, None);
        run.step(crate::de::decode_action(a)?, Some(a), problem, rng)?;
        progress.advance(&run.pop, run.fes);
    }
    Ok(de_trace(&run))
}

/// One seeded run of `method` on the true function `spec`, under a hard
/// budget of `max_fes` evaluations.
pub fn run_method(method: &Method, spec: &ProblemSpec, max_fes: u64, de: &DeParams, run: usize, seed_: u64) -> Result<RunRecord> {
    let start = Instant::now();
    let s = run_seed(seed_, spec, run);
    let mut rng = seed::rng(s);
    let mut problem = Problem::new(spec.clone())?.with_budget(max_fes);
    let trace = match method {
        Method::Policy { agent, .. } => policy_run(agent, &mut problem, max_fes, de, &mut rng)?,
        Method::Baseline(BaselineMethod::RandomSearch) => random_search(&mut problem, max_fes, de.np, &mut rng)?,
        Method::Baseline(BaselineMethod::StaticDe) => {
            let cfg = MutationConfig { operator: MutationOperator::Rand1, f: 0.5 };
            let mut run = DeRun::start(de.clone(), spec.bounds(), max_fes, &mut problem, &mut rng)?;
            run.run_static(cfg, &mut problem, &mut rng)?;
            de_trace(&run)
        }
    };
    Ok(RunRecord {
        method: method.name().to_string(),
        problem: spec.to_string(),
        dim: spec.dim,
        run,
        seed: s,
        final_best_y: trace.last().map_or(f64::INFINITY, |t| t.best_y),
        trace,
        fes: problem.evaluations(),
        wall_time: start.elapsed().as_secs_f64(),
    })
}

pub fn run_baseline(method: BaselineMethod, spec: &ProblemSpec, max_fes: u64, de: &DeParams, run: usize, seed_: u64) -> Result<RunRecord> {
    run_method(&Method::Baseline(method), spec, max_fes, de, run, seed_)
}

/// `runs` seeded runs of every method on every problem, in parallel on the
/// current rayon pool. Records come back ordered by (problem, method, run).
pub fn run_protocol(
    methods: &[Method],
    specs: &[ProblemSpec],
    runs: usize,
    max_fes: u64,
    de: &DeParams,
    seed_: u64,
) -> Result<Vec<RunRecord>> {
    let jobs: Vec<(usize, usize, usize)> = (0..specs.len())
        .flat_map(|p| (0..methods.len()).flat_map(move |m| (0..runs).map(move |r| (p, m, r))))
        .collect();
    jobs.par_iter().map(|&(p, m, r)| run_method(&methods[m], &specs[p], max_fes, de, r, seed_)).collect()
}

/// Greedy evaluation of a learned policy on the true functions.
pub fn evaluate_policy(
    agent: &DqnAgent,
    name: &str,
    specs: &[ProblemSpec],
    runs: usize,
    max_fes: u64,
    de: &DeParams,
    seed_: u64,
) -> Result<Vec<RunRecord>> {
    run_protocol(&[Method::Policy { name, agent }], specs, runs, max_fes, de, seed_)
}
