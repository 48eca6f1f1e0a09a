//! Q-learning meta-policy: online and target MLPs, replay memory and
//! epsilon-greedy exploration.

mod buffer;

use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::de::N_ACTIONS;
use crate::error::{Error, Result};
use crate::features::{OptState, STATE_DIM};
use crate::networks::{Adam, Checkpoint, MlpNetwork, Model, Network};

pub use buffer::{ReplayBuffer, Transition};

/// How the bootstrap value of `s'` is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetMode {
    /// `max_a Q_target(s', a)`.
    Paper,
    /// `Q_target(s', argmax_a Q_online(s', a))`.
    #[default]
    Double,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DqnConfig {
    pub hidden: Vec<usize>,
    pub gamma: f64,
    pub lr: f64,
    /// Target sync period in learning steps.
    pub target_sync: u64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub warmup: usize,
    pub eps_start: f64,
    pub eps_end: f64,
    /// Fraction of the learning-step budget over which epsilon anneals.
    pub eps_fraction: f64,
    pub target_mode: TargetMode,
    /// Use the reward cases exactly as printed (improvement gives 0).
    pub reward_literal: bool,
}

impl Default for DqnConfig {
    fn default() -> Self {
        DqnConfig {
            hidden: vec![32, 64, 32],
            gamma: 0.99,
            lr: 1e-4,
            target_sync: 1000,
            batch_size: 64,
            buffer_capacity: 100_000,
            warmup: 1000,
            eps_start: 1.0,
            eps_end: 0.05,
            eps_fraction: 0.2,
            target_mode: TargetMode::Double,
            reward_literal: false,
        }
    }
}

impl DqnConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = (0.0..=1.0).contains(&self.gamma)
            && self.lr > 0.0
            && self.target_sync > 0
            && self.batch_size > 0
            && self.buffer_capacity > 0
            && (0.0..=1.0).contains(&self.eps_start)
            && (0.0..=1.0).contains(&self.eps_end)
            && self.eps_fraction >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid agent config {self:?}")))
        }
    }
}

/// 1 when the best-so-far value strictly improved, else 0. With `literal`
/// the two cases are swapped, matching the printed equation.
pub fn reward(y_star_prev: f64, y_star_new: f64, literal: bool) -> f64 {
    let improved = y_star_new < y_star_prev;
    if literal {
        if y_star_new <= y_star_prev {
            0.0
        } else {
            1.0
        }
    } else if improved {
        1.0
    } else {
        0.0
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(q: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in q.iter().enumerate() {
        if *v > q[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone)]
pub struct DqnAgent {
    pub cfg: DqnConfig,
    pub online: MlpNetwork,
    pub target: MlpNetwork,
    pub opt: Adam,
    /// Learning steps taken so far (one per environment step).
    pub learning_steps: u64,
    /// Learning-step budget, used by the epsilon schedule.
    pub max_ls: u64,
}

fn shape(cfg: &DqnConfig) -> Vec<usize> {
    let mut s = vec![STATE_DIM];
    s.extend(&cfg.hidden);
    s.push(N_ACTIONS);
    s
}

impl DqnAgent {
    pub fn new<R: Rng + ?Sized>(cfg: DqnConfig, max_ls: u64, rng: &mut R) -> Result<DqnAgent> {
        cfg.validate()?;
        let online = MlpNetwork::new(&shape(&cfg), rng)?;
        let mut target = MlpNetwork::zeros(&shape(&cfg))?;
        target.params_mut().copy_from_slice(online.params());
        let opt = Adam::new(online.n_params(), cfg.lr);
        Ok(DqnAgent { cfg, online, target, opt, learning_steps: 0, max_ls })
    }

    pub fn epsilon(&self) -> f64 {
        let horizon = self.cfg.eps_fraction * self.max_ls as f64;
        if horizon <= 0.0 {
            return self.cfg.eps_end;
        }
        let frac = (self.learning_steps as f64 / horizon).min(1.0);
        self.cfg.eps_start + frac * (self.cfg.eps_end - self.cfg.eps_start)
    }

    pub fn q_values(&self, s: &OptState) -> Vec<f64> {
        self.online.predict(s).expect("state dimension is fixed")
    }

    /// Epsilon-greedy in training mode, greedy otherwise.
    pub fn select_action<R: Rng + ?Sized>(&self, s: &OptState, rng: &mut R, training: bool) -> usize {
        self.select_with_epsilon(s, rng, if training { Some(self.epsilon()) } else { None })
    }

    pub fn select_with_epsilon<R: Rng + ?Sized>(&self, s: &OptState, rng: &mut R, eps: Option<f64>) -> usize {
        if let Some(eps) = eps {
            if rng.random::<f64>() < eps {
                return rng.random_range(0..N_ACTIONS);
            }
        }
        argmax(&self.q_values(s))
    }

    fn bootstrap(&self, s_next: &OptState) -> f64 {
        let tq = self.target.predict(s_next).expect("state dimension is fixed");
        match self.cfg.target_mode {
            TargetMode::Paper => tq.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            TargetMode::Double => tq[argmax(&self.q_values(s_next))],
        }
    }

    /// Temporal-difference target of one transition.
    pub fn td_target(&self, t: &Transition) -> f64 {
        if t.terminal {
            t.r
        } else {
            t.r + self.cfg.gamma * self.bootstrap(&t.s_next)
        }
    }

    /// One Adam step on the online network from a uniform replay batch.
    /// Returns the batch loss `mean 1/2 (target - Q(s, a))^2`.
    pub fn dqn_update<R: Rng + ?Sized>(&mut self, buffer: &ReplayBuffer, rng: &mut R) -> Result<f64> {
        let need = self.cfg.warmup.max(self.cfg.batch_size);
        if buffer.len() < need {
            return Err(Error::InsufficientBuffer { have: buffer.len(), need });
        }
        let batch = buffer.sample(self.cfg.batch_size, rng)?;
        let b = batch.len() as f64;
        let mut grads = vec![0.0; self.online.n_params()];
        let mut loss = 0.0;
        let mut dy = vec![0.0; N_ACTIONS];
        for t in batch {
            let target = self.td_target(t);
            let (q, tape) = self.online.forward(&t.s)?;
            let err = target - q[t.a];
            loss += 0.5 * err * err;
            dy.iter_mut().for_each(|v| *v = 0.0);
            dy[t.a] = -err / b;
            self.online.backward_accumulate(&tape, &dy, &mut grads)?;
        }
        let loss = loss / b;
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch: self.learning_steps as usize, detail: format!("q loss {loss}") });
        }
        let mut params = self.online.params().to_vec();
        self.opt.step(&mut params, &grads)?;
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Diverged { epoch: self.learning_steps as usize, detail: "non-finite q parameters".into() });
        }
        self.online.params_mut().copy_from_slice(&params);
        Ok(loss)
    }

    pub fn sync_target(&mut self) {
        let p = self.online.params().to_vec();
        self.target.params_mut().copy_from_slice(&p);
    }

    /// Counts one learning step: updates once the buffer is warm and syncs
    /// the target whenever the step count is a multiple of the period.
    pub fn learn_step<R: Rng + ?Sized>(&mut self, buffer: &ReplayBuffer, rng: &mut R) -> Result<Option<f64>> {
        self.learning_steps += 1;
        let loss = if buffer.len() >= self.cfg.warmup.max(self.cfg.batch_size) {
            Some(self.dqn_update(buffer, rng)?)
        } else {
            None
        };
        if self.learning_steps % self.cfg.target_sync == 0 {
            self.sync_target();
        }
        Ok(loss)
    }

    pub fn checkpoint(&self) -> AgentCheckpoint {
        AgentCheckpoint {
            version: crate::networks::CHECKPOINT_VERSION,
            config: self.cfg.clone(),
            online: Checkpoint::of(&self.online),
            target: Checkpoint::of(&self.target),
            adam: self.opt.clone(),
            learning_steps: self.learning_steps,
            max_ls: self.max_ls,
        }
    }

    pub fn from_checkpoint(ck: AgentCheckpoint) -> Result<DqnAgent> {
        let net = |c: &Checkpoint| match c.model()? {
            Model::Mlp(m) => Ok(m),
            _ => Err(Error::Checkpoint("agent networks must be MLPs".into())),
        };
        Ok(DqnAgent {
            online: net(&ck.online)?,
            target: net(&ck.target)?,
            cfg: ck.config,
            opt: ck.adam,
            learning_steps: ck.learning_steps,
            max_ls: ck.max_ls,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_vec(&self.checkpoint())?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<DqnAgent> {
        let ck: AgentCheckpoint = serde_json::from_slice(&fs::read(path)?)?;
        DqnAgent::from_checkpoint(ck)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentCheckpoint {
    pub version: u32,
    pub config: DqnConfig,
    pub online: Checkpoint,
    pub target: Checkpoint,
    pub adam: Adam,
    pub learning_steps: u64,
    pub max_ls: u64,
}
