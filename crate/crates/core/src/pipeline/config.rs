use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::de::DeParams;
use crate::error::{Error, Result};
use crate::problems::{make_split_with_dim, BbobFunction, OodMode, ProblemSpec};
use crate::rl::DqnConfig;
use crate::surrogate::SlsConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Full-size settings: 10D, 5e4 samples, 1.5e6 learning steps.
    #[default]
    Paper,
    /// 2D problems with budgets that finish in minutes on one core.
    Desk,
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "paper" => Ok(Preset::Paper),
            "desk" => Ok(Preset::Desk),
            _ => Err(Error::UnknownMode(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArchKind {
    #[default]
    Kan,
    Mlp,
    Rbf,
}

impl ArchKind {
    pub const ALL: [ArchKind; 3] = [ArchKind::Kan, ArchKind::Mlp, ArchKind::Rbf];

    pub fn name(self) -> &'static str {
        match self {
            ArchKind::Kan => "kan",
            ArchKind::Mlp => "mlp",
            ArchKind::Rbf => "rbf",
        }
    }
}

impl fmt::Display for ArchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ArchKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kan" => Ok(ArchKind::Kan),
            "mlp" => Ok(ArchKind::Mlp),
            "rbf" => Ok(ArchKind::Rbf),
            _ => Err(Error::UnknownMode(s.to_string())),
        }
    }
}

/// What the policy's DE runs are scored on during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvaluatorMode {
    #[default]
    Surrogate,
    /// Train directly on the true functions (no surrogate stage).
    TrueFunction,
}

impl FromStr for EvaluatorMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "surrogate" => Ok(EvaluatorMode::Surrogate),
            "true" | "true_function" => Ok(EvaluatorMode::TrueFunction),
            _ => Err(Error::UnknownMode(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemSet {
    pub dim: usize,
    pub train: Vec<BbobFunction>,
    pub test: Vec<BbobFunction>,
}

impl Default for ProblemSet {
    fn default() -> Self {
        ProblemSet::split(10)
    }
}

impl ProblemSet {
    /// The fixed 16/8 split at dimension `dim`.
    pub fn split(dim: usize) -> ProblemSet {
        let (train, test) = make_split_with_dim(dim);
        ProblemSet {
            dim,
            train: train.into_iter().map(|p| p.function).collect(),
            test: test.into_iter().map(|p| p.function).collect(),
        }
    }

    pub fn train_specs(&self) -> Vec<ProblemSpec> {
        self.train.iter().map(|&f| ProblemSpec::new(f, self.dim)).collect()
    }

    pub fn test_specs(&self) -> Vec<ProblemSpec> {
        self.test.iter().map(|&f| ProblemSpec::new(f, self.dim)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingConfig {
    /// LHS points per training problem.
    pub samples: usize,
    /// Share of each dataset held out for order-accuracy measurement only.
    pub holdout: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig { samples: 50_000, holdout: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurrogateSettings {
    pub arch: ArchKind,
    pub kan_hidden: Vec<usize>,
    pub grid: usize,
    pub degree: usize,
    pub mlp_hidden: Vec<usize>,
    pub rbf_centers: usize,
    pub training: SlsConfig,
}

impl Default for SurrogateSettings {
    fn default() -> Self {
        SurrogateSettings {
            arch: ArchKind::Kan,
            kan_hidden: vec![10],
            grid: 5,
            degree: 5,
            mlp_hidden: vec![32, 32],
            rbf_centers: 32,
            training: SlsConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlsConfig {
    pub max_ls: u64,
    pub max_fes: u64,
    pub evaluator: EvaluatorMode,
    /// Write a resume checkpoint every this many episodes (0 disables).
    pub checkpoint_every: usize,
    pub de: DeParams,
    pub dqn: DqnConfig,
}

impl Default for PlsConfig {
    fn default() -> Self {
        PlsConfig {
            max_ls: 1_500_000,
            max_fes: 20_000,
            evaluator: EvaluatorMode::Surrogate,
            checkpoint_every: 50,
            de: DeParams::default(),
            dqn: DqnConfig::default(),
        }
    }
}

impl PlsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_fes < self.de.np as u64 {
            return Err(Error::InvalidConfig(format!("max_fes {} below population size {}", self.max_fes, self.de.np)));
        }
        self.dqn.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub runs: usize,
    pub max_fes: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ood: Option<OodMode>,
    /// Also run random search and static DE on every problem.
    pub baselines: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { runs: 51, max_fes: 20_000, ood: None, baselines: true }
    }
}

/// Every setting of a full experiment. `Default` is the paper preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub seed: u64,
    pub workers: usize,
    pub problems: ProblemSet,
    pub sampling: SamplingConfig,
    pub surrogate: SurrogateSettings,
    pub policy: PlsConfig,
    pub evaluation: EvalConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            preset: Preset::Paper,
            seed: 0,
            workers: 1,
            problems: ProblemSet::default(),
            sampling: SamplingConfig::default(),
            surrogate: SurrogateSettings::default(),
            policy: PlsConfig::default(),
            evaluation: EvalConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default();
        if preset == Preset::Desk {
            cfg.preset = Preset::Desk;
            cfg.problems = ProblemSet::split(2);
            cfg.sampling = SamplingConfig { samples: 2000, holdout: 0.2 };
            cfg.surrogate.kan_hidden = vec![5];
            cfg.surrogate.training.mse_epochs = 200;
            cfg.surrogate.training.roa_epochs = 200;
            cfg.policy.max_ls = 50_000;
            cfg.policy.max_fes = 2000;
            cfg.policy.de.np = 20;
            cfg.evaluation.max_fes = 2000;
        }
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        if self.problems.dim == 0 {
            return Err(Error::InvalidConfig("problem dimension must be positive".into()));
        }
        if self.sampling.samples < 2 || !(0.0..1.0).contains(&self.sampling.holdout) {
            return Err(Error::InvalidConfig(format!("invalid sampling config {:?}", self.sampling)));
        }
        if self.evaluation.max_fes < self.policy.de.np as u64 {
            return Err(Error::InvalidConfig("evaluation budget below population size".into()));
        }
        self.surrogate.training.validate()?;
        self.policy.validate()
    }
}
