use rand::Rng;
use rayon::prelude::*;

use super::config::{ArchKind, SamplingConfig, SurrogateSettings};
use crate::error::Result;
use crate::networks::{KanInit, KanNetwork, MlpNetwork, Model, RbfNetwork};
use crate::problems::{Problem, ProblemSpec};
use crate::sampling::{build_dataset, SampleSet};
use crate::seed::{self, Stream};
use crate::surrogate::{train_surrogate, TrainedSurrogate};

/// Result of surrogate learning on one problem.
#[derive(Debug)]
pub struct SlsOutcome {
    pub spec: ProblemSpec,
    /// True-function evaluations spent on this problem.
    pub true_evaluations: u64,
    pub holdout: Option<SampleSet>,
    pub result: Result<TrainedSurrogate>,
}

/// Fresh network of the configured architecture for `dim` inputs. RBF
/// centres are drawn from `inputs` (normalised training points).
pub fn build_network<R: Rng + ?Sized>(
    arch: ArchKind,
    settings: &SurrogateSettings,
    dim: usize,
    inputs: &[Vec<f64>],
    rng: &mut R,
) -> Result<Model> {
    Ok(match arch {
        ArchKind::Kan => {
            let mut shape = vec![dim];
            shape.extend(&settings.kan_hidden);
            shape.push(1);
            KanNetwork::new(&shape, settings.grid, settings.degree, KanInit::default(), rng)?.into()
        }
        ArchKind::Mlp => {
            let mut shape = vec![dim];
            shape.extend(&settings.mlp_hidden);
            shape.push(1);
            MlpNetwork::new(&shape, rng)?.into()
        }
        ArchKind::Rbf => RbfNetwork::from_data(inputs, settings.rbf_centers, rng)?.into(),
    })
}

/// Samples one problem and trains one surrogate. Seeds are keyed on the
/// function id so a problem gets the same data in any subset.
pub fn train_one(
    spec: &ProblemSpec,
    arch: ArchKind,
    sampling: &SamplingConfig,
    settings: &SurrogateSettings,
    seed_: u64,
) -> SlsOutcome {
    let key = spec.function.id() as u64;
    let mut problem = match Problem::new(spec.clone()) {
        Ok(p) => p,
        Err(e) => return SlsOutcome { spec: spec.clone(), true_evaluations: 0, holdout: None, result: Err(e) },
    };
    let data = build_dataset(&mut problem, sampling.samples, seed::derive(seed_, Stream::Dataset, key));
    let true_evaluations = problem.evaluations();
    let mut holdout = None;
    let result = data.and_then(|data| {
        let train = if sampling.holdout > 0.0 {
            let (train, hold) = data.split(sampling.holdout, seed::derive(seed_, Stream::Split, key))?;
            holdout = Some(hold);
            train
        } else {
            data
        };
        let mut init = seed::rng(seed::derive(seed_, Stream::Surrogate, 2 * key));
        let net = build_network(arch, settings, spec.dim, &train.normalized_inputs(), &mut init)?;
        let mut s = train_surrogate(
            &train,
            holdout.as_ref(),
            net,
            &settings.training,
            seed::derive(seed_, Stream::Surrogate, 2 * key + 1),
        )?;
        s.meta.problem = spec.to_string();
        Ok(s)
    });
    SlsOutcome { spec: spec.clone(), true_evaluations, holdout, result }
}

/// Surrogate learning over `specs`. A failure on one problem is reported in
/// its outcome and the others still run.
pub fn run_sls(
    specs: &[ProblemSpec],
    sampling: &SamplingConfig,
    settings: &SurrogateSettings,
    seed_: u64,
) -> Vec<SlsOutcome> {
    specs.par_iter().map(|spec| train_one(spec, settings.arch, sampling, settings, seed_)).collect()
}
