use rayon::prelude::*;

use super::config::{ArchKind, ExperimentConfig, SamplingConfig, SurrogateSettings};
use super::eval::{run_protocol, Method, RunRecord};
use super::pls::{run_pls, PlsState};
use super::report::{summarize, SummaryRow};
use super::sls::{run_sls, train_one, SlsOutcome};
use crate::error::{Error, Result};
use crate::problems::{BbobFunction, Problem, ProblemSpec};
use crate::sampling::SampleSet;
use crate::seed::{self, Stream};
use crate::surrogate::{landscape_grid, order_accuracy, LandscapeRow, LossMode, TrainedSurrogate};

/// Problems whose fitted landscapes are exported, trained on 10^4 samples.
pub const ABLATION_LANDSCAPES: [BbobFunction; 2] = [BbobFunction::RosenbrockOriginal, BbobFunction::Schwefel];
const LANDSCAPE_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct AblationOptions {
    /// Problems for the architecture comparison.
    pub problems: Vec<ProblemSpec>,
    /// Independent repetitions per (problem, architecture).
    pub repetitions: usize,
    /// Train and evaluate policies on MSE-only and ROA surrogates.
    pub policies: bool,
    pub landscapes: bool,
    pub landscape_resolution: usize,
}

impl AblationOptions {
    pub fn from_config(cfg: &ExperimentConfig) -> AblationOptions {
        AblationOptions {
            problems: cfg.problems.train_specs(),
            repetitions: 5,
            policies: true,
            landscapes: true,
            landscape_resolution: 101,
        }
    }
}

/// Architecture comparison, averaged over repetitions.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ArchitectureRow {
    pub problem: String,
    pub arch: String,
    /// Holdout MSE in normalised target units.
    pub mse: f64,
    pub order_accuracy: f64,
    /// Mean rank among the architectures (1 = best) per repetition.
    pub mse_rank: f64,
    pub order_rank: f64,
}

#[derive(Debug, Clone)]
pub struct LossAblation {
    pub records: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
}

#[derive(Debug, Clone, Default)]
pub struct AblationReport {
    pub architectures: Vec<ArchitectureRow>,
    pub losses: Option<LossAblation>,
    /// `(name, grid)` per exported landscape, e.g. `schwefel-2d-roa`.
    pub landscapes: Vec<(String, Vec<LandscapeRow>)>,
}

fn holdout_mse(model: &TrainedSurrogate, holdout: &SampleSet) -> Result<f64> {
    let mut sum = 0.0;
    for (x, &y) in holdout.xs.iter().zip(&holdout.ys) {
        let p = model.predict(x)?;
        sum += (holdout.y_norm.apply(p) - holdout.y_norm.apply(y)).powi(2);
    }
    Ok(sum / holdout.len() as f64)
}

/// Ranks (1 = best) with ties averaged.
fn ranks(values: &[f64], higher_is_better: bool) -> Vec<f64> {
    values
        .iter()
        .map(|&v| {
            let better = values.iter().filter(|&&o| if higher_is_better { o > v } else { o < v }).count() as f64;
            let equal = values.iter().filter(|&&o| o == v).count() as f64;
            better + (equal + 1.0) / 2.0
        })
        .collect()
}

fn ensure_holdout(sampling: &SamplingConfig) -> SamplingConfig {
    let mut s = sampling.clone();
    if s.holdout <= 0.0 {
        s.holdout = 0.2;
    }
    s
}

fn trained(outcome: SlsOutcome) -> Result<(TrainedSurrogate, SampleSet)> {
    let holdout = outcome.holdout.ok_or_else(|| Error::InvalidConfig("ablation needs a holdout split".into()))?;
    Ok((outcome.result?, holdout))
}

/// KAN vs MLP vs RBF on each problem: holdout MSE and order accuracy.
pub fn architecture_ablation(
    problems: &[ProblemSpec],
    repetitions: usize,
    sampling: &SamplingConfig,
    settings: &SurrogateSettings,
    seed_: u64,
) -> Result<Vec<ArchitectureRow>> {
    let sampling = ensure_holdout(sampling);
    let jobs: Vec<(usize, usize, ArchKind)> = (0..problems.len())
        .flat_map(|p| (0..repetitions).flat_map(move |r| ArchKind::ALL.into_iter().map(move |a| (p, r, a))))
        .collect();
    let scores: Vec<(f64, f64)> = jobs
        .par_iter()
        .map(|&(p, r, arch)| {
            let rep_seed = seed::derive(seed_, Stream::Surrogate, r as u64);
            let (model, holdout) = trained(train_one(&problems[p], arch, &sampling, settings, rep_seed))?;
            Ok((holdout_mse(&model, &holdout)?, order_accuracy(&model, &holdout)?))
        })
        .collect::<Result<_>>()?;

    let n_arch = ArchKind::ALL.len();
    let mut rows = Vec::new();
    for (p, spec) in problems.iter().enumerate() {
        let mut acc = vec![[0.0; 4]; n_arch];
        for r in 0..repetitions {
            let base = (p * repetitions + r) * n_arch;
            let cell = &scores[base..base + n_arch];
            let mse: Vec<f64> = cell.iter().map(|s| s.0).collect();
            let oa: Vec<f64> = cell.iter().map(|s| s.1).collect();
            let (mr, or) = (ranks(&mse, false), ranks(&oa, true));
            for a in 0..n_arch {
                acc[a][0] += mse[a];
                acc[a][1] += oa[a];
                acc[a][2] += mr[a];
                acc[a][3] += or[a];
            }
        }
        let n = repetitions.max(1) as f64;
        for (a, arch) in ArchKind::ALL.iter().enumerate() {
            rows.push(ArchitectureRow {
                problem: spec.to_string(),
                arch: arch.to_string(),
                mse: acc[a][0] / n,
                order_accuracy: acc[a][1] / n,
                mse_rank: acc[a][2] / n,
                order_rank: acc[a][3] / n,
            });
        }
    }
    Ok(rows)
}

fn with_loss(settings: &SurrogateSettings, loss: LossMode) -> SurrogateSettings {
    let mut s = settings.clone();
    s.arch = ArchKind::Kan;
    s.training.loss = loss;
    s
}

/// Surrogates trained with MSE only and with the order-aware phase, a
/// policy on each, both evaluated on the test set. The two arms differ
/// only in the loss setting.
pub fn loss_ablation(cfg: &ExperimentConfig) -> Result<LossAblation> {
    let train = cfg.problems.train_specs();
    let test = cfg.problems.test_specs();
    let mut agents = Vec::new();
    for loss in [LossMode::Roa, LossMode::Mse] {
        let settings = with_loss(&cfg.surrogate, loss);
        let mut surrogates: Vec<TrainedSurrogate> = run_sls(&train, &cfg.sampling, &settings, cfg.seed)
            .into_iter()
            .map(|o| o.result)
            .collect::<Result<_>>()?;
        let mut state = PlsState::new(&cfg.policy, cfg.seed)?;
        run_pls(&mut surrogates, train[0].bounds(), &cfg.policy, &mut state, None, None)?;
        agents.push(state.agent);
    }
    let methods = [
        Method::Policy { name: "surr_rlde", agent: &agents[0] },
        Method::Policy { name: "surr_rlde_mse", agent: &agents[1] },
    ];
    let records = run_protocol(&methods, &test, cfg.evaluation.runs, cfg.evaluation.max_fes, &cfg.policy.de, cfg.seed)?;
    let summary = summarize(&records);
    Ok(LossAblation { records, summary })
}

/// 2D landscape grids of the true function and the ROA / MSE-only KAN fits.
pub fn landscape_ablation(
    settings: &SurrogateSettings,
    sampling: &SamplingConfig,
    resolution: usize,
    seed_: u64,
) -> Result<Vec<(String, Vec<LandscapeRow>)>> {
    let sampling = SamplingConfig { samples: LANDSCAPE_SAMPLES, holdout: sampling.holdout };
    let mut out = Vec::new();
    for f in ABLATION_LANDSCAPES {
        let spec = ProblemSpec::new(f, 2);
        for (tag, loss) in [("roa", LossMode::Roa), ("mse", LossMode::Mse)] {
            let settings = with_loss(settings, loss);
            let model = train_one(&spec, ArchKind::Kan, &sampling, &settings, seed_).result?;
            let mut truth = Problem::new(spec.clone())?;
            out.push((format!("{spec}-{tag}"), landscape_grid(&mut truth, &model, resolution)?));
        }
    }
    Ok(out)
}

pub fn run_ablations(cfg: &ExperimentConfig, opts: &AblationOptions) -> Result<AblationReport> {
    let architectures =
        architecture_ablation(&opts.problems, opts.repetitions, &cfg.sampling, &cfg.surrogate, cfg.seed)?;
    let losses = if opts.policies { Some(loss_ablation(cfg)?) } else { None };
    let landscapes = if opts.landscapes {
        landscape_ablation(&cfg.surrogate, &cfg.sampling, opts.landscape_resolution, cfg.seed)?
    } else {
        Vec::new()
    };
    Ok(AblationReport { architectures, losses, landscapes })
}
