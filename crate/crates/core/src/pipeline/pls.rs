use std::fs;
use std::io::Write;
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{EvaluatorMode, PlsConfig};
use crate::de::{decode_action, DeRun};
use crate::error::{Error, Result};
use crate::features::{extract_state, RunProgress};
use crate::objective::Objective;
use crate::problems::thread_evaluations;
use crate::rl::{reward, AgentCheckpoint, DqnAgent, ReplayBuffer, Transition};
use crate::seed::{self, Stream};

/// One line of the policy training log (one per learning step).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLogRow {
    pub learning_step: u64,
    pub episode: usize,
    pub problem: usize,
    pub generation: usize,
    pub action: usize,
    pub reward: f64,
    /// Empty until the replay buffer is warm.
    pub loss: Option<f64>,
    pub epsilon: f64,
    pub mean_q: f64,
}

/// Everything policy learning mutates. Saved at episode boundaries so an
/// interrupted run resumes exactly where it stopped.
#[derive(Debug, Clone)]
pub struct PlsState {
    pub agent: DqnAgent,
    pub buffer: ReplayBuffer,
    pub rng: ChaCha8Rng,
    /// Completed (or truncated) episodes.
    pub episode: usize,
    pub log: Vec<TrainLogRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlsCheckpoint {
    pub agent: AgentCheckpoint,
    pub buffer: ReplayBuffer,
    pub rng: ChaCha8Rng,
    pub episode: usize,
    pub log: Vec<TrainLogRow>,
}

impl PlsState {
    pub fn new(cfg: &PlsConfig, seed_: u64) -> Result<PlsState> {
        cfg.validate()?;
        let agent = DqnAgent::new(cfg.dqn.clone(), cfg.max_ls, &mut seed::rng(seed::derive(seed_, Stream::Policy, 0)))?;
        Ok(PlsState {
            agent,
            buffer: ReplayBuffer::new(cfg.dqn.buffer_capacity),
            rng: seed::rng(seed::derive(seed_, Stream::Policy, 1)),
            episode: 0,
            log: Vec::new(),
        })
    }

    pub fn checkpoint(&self) -> PlsCheckpoint {
        PlsCheckpoint {
            agent: self.agent.checkpoint(),
            buffer: self.buffer.clone(),
            rng: self.rng.clone(),
            episode: self.episode,
            log: self.log.clone(),
        }
    }

    pub fn from_checkpoint(ck: PlsCheckpoint) -> Result<PlsState> {
        Ok(PlsState {
            agent: DqnAgent::from_checkpoint(ck.agent)?,
            buffer: ck.buffer,
            rng: ck.rng,
            episode: ck.episode,
            log: ck.log,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_vec(&self.checkpoint())?)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<PlsState> {
        let ck: PlsCheckpoint = serde_json::from_slice(&fs::read(path)?)?;
        PlsState::from_checkpoint(ck)
    }

    /// Training log as CSV.
    pub fn write_log_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for row in &self.log {
            out.serialize(row).map_err(|e| Error::Dataset(e.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlsOutcome {
    pub episodes: usize,
    pub learning_steps: u64,
    /// True-function evaluations made on this thread during training.
    pub true_evaluations: u64,
}

/// Policy learning. Episodes cycle through `envs` in order; each episode is
/// one DE run of `max_fes / np` generations and every generation is one
/// learning step. Training stops as soon as `max_ls` steps are reached,
/// even mid-episode. `episode_limit` stops after that many episodes in
/// total (used to split a run across resumes).
///
/// With a `checkpoint` path the state is saved every `checkpoint_every`
/// episodes, at the end, and before returning a divergence error.
pub fn run_pls<O: Objective>(
    envs: &mut [O],
    bounds: (f64, f64),
    cfg: &PlsConfig,
    state: &mut PlsState,
    checkpoint: Option<&Path>,
    episode_limit: Option<usize>,
) -> Result<PlsOutcome> {
    cfg.validate()?;
    if envs.is_empty() {
        return Err(Error::InvalidConfig("policy learning needs at least one problem".into()));
    }
    let fe_before = thread_evaluations();
    let result = train_loop(envs, bounds, cfg, state, checkpoint, episode_limit);
    if let (Err(_), Some(path)) = (&result, checkpoint) {
        state.save(path)?;
    }
    result?;
    if let Some(path) = checkpoint {
        state.save(path)?;
    }
    let true_evaluations = thread_evaluations() - fe_before;
    if cfg.evaluator == EvaluatorMode::Surrogate && true_evaluations != 0 {
        return Err(Error::InvalidConfig(format!(
            "surrogate-mode training made {true_evaluations} true-function evaluations"
        )));
    }
    Ok(PlsOutcome { episodes: state.episode, learning_steps: state.agent.learning_steps, true_evaluations })
}

fn train_loop<O: Objective>(
    envs: &mut [O],
    bounds: (f64, f64),
    cfg: &PlsConfig,
    state: &mut PlsState,
    checkpoint: Option<&Path>,
    episode_limit: Option<usize>,
) -> Result<()> {
    while state.agent.learning_steps < cfg.max_ls && episode_limit.map_or(true, |l| state.episode < l) {
        let k = state.episode % envs.len();
        let env = &mut envs[k];
        let PlsState { agent, buffer, rng, episode, log } = state;
        let mut run = DeRun::start(cfg.de.clone(), bounds, cfg.max_fes, env, rng)?;
        let mut progress = RunProgress::start(&run.pop, run.fes, run.max_fes, run.total_generations());
        let mut s = extract_state(&run.pop, &progress);
        while !run.is_done() && agent.learning_steps < cfg.max_ls {
            let epsilon = agent.epsilon();
            let a = agent.select_with_epsilon(&s, rng, Some(epsilon));
            let prev = progress.y_now;
            run.step(decode_action(a)?, Some(a), env, rng)?;
            progress.advance(&run.pop, run.fes);
            let s_next = extract_state(&run.pop, &progress);
            let r = reward(prev, progress.y_now, cfg.dqn.reward_literal);
            buffer.push(Transition { s, a, r, s_next, terminal: run.is_done() });
            let loss = agent.learn_step(buffer, rng)?;
            let q = agent.q_values(&s);
            let mean_q = q.iter().sum::<f64>() / q.len() as f64;
            if !mean_q.is_finite() {
                return Err(Error::Diverged { epoch: agent.learning_steps as usize, detail: "non-finite Q".into() });
            }
            log.push(TrainLogRow {
                learning_step: agent.learning_steps,
                episode: *episode,
                problem: k,
                generation: run.generation,
                action: a,
                reward: r,
                loss,
                epsilon,
                mean_q,
            });
            s = s_next;
        }
        *episode += 1;
        if let Some(path) = checkpoint {
            if cfg.checkpoint_every > 0 && *episode % cfg.checkpoint_every == 0 {
                state.save(path)?;
            }
        }
    }
    Ok(())
}
