//! Command-line front end.
//!
//! Every command resolves its configuration in three layers: the preset
//! (`--preset`, or `preset = ...` in the file, default `paper`), then the
//! TOML file given with `--config`, then command-line flags. The resolved
//! configuration is written to `<out>/<command>.config.toml` before any
//! work starts.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::networks::Network;
use crate::pipeline::{
    self, ArchKind, EvaluatorMode, ExperimentConfig, Method, PlsState, Preset, BaselineMethod,
};
use crate::problems::{apply_ood, BbobFunction, OodMode, Problem, ProblemSpec};
use crate::rl::DqnAgent;
use crate::sampling::build_dataset;
use crate::seed::{self, Stream};
use crate::surrogate::{LossMode, TrainedSurrogate};

#[derive(Debug, Parser)]
#[command(name = "metabbo", version, about = "Surrogate-assisted learned configuration of differential evolution")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// `paper` or `desk`.
    #[arg(long, global = true)]
    pub preset: Option<Preset>,
    /// Global seed; all stage seeds are derived from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for sampling, surrogate training and evaluation.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "runs")]
    pub out: PathBuf,
    /// Overwrite existing outputs.
    #[arg(long, global = true)]
    pub force: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Latin-hypercube dataset of one problem.
    Sample(SampleArgs),
    /// Train one surrogate per training problem.
    TrainSurrogate(SurrogateArgs),
    /// Learn the configuration policy.
    TrainPolicy(PolicyArgs),
    /// Evaluate a policy and the baselines on the true functions.
    Evaluate(EvaluateArgs),
    /// Architecture, loss and landscape ablations.
    Ablate(AblateArgs),
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub problem: BbobFunction,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SurrogateArgs {
    /// Problems to train on (repeatable); default is the training set.
    #[arg(long)]
    pub problem: Vec<BbobFunction>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub arch: Option<ArchKind>,
    /// `roa` or `mse`.
    #[arg(long)]
    pub loss: Option<String>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub holdout: Option<f64>,
    #[arg(long)]
    pub mse_epochs: Option<usize>,
    #[arg(long)]
    pub roa_epochs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PolicyArgs {
    /// `surrogate` or `true`.
    #[arg(long)]
    pub evaluator: Option<EvaluatorMode>,
    #[arg(long)]
    pub max_ls: Option<u64>,
    #[arg(long)]
    pub max_fes: Option<u64>,
    #[arg(long)]
    pub np: Option<usize>,
    /// Directory of surrogate checkpoints; default `<out>/surrogates`,
    /// trained there first when missing.
    #[arg(long)]
    pub surrogates: Option<PathBuf>,
    /// Continue from `<out>/policy/state.json`.
    #[arg(long)]
    pub resume: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Agent checkpoint; default `<out>/policy/agent.json` when present.
    #[arg(long)]
    pub agent: Option<PathBuf>,
    /// Problems to evaluate (repeatable); default is the test set.
    #[arg(long)]
    pub problem: Vec<BbobFunction>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub max_fes: Option<u64>,
    #[arg(long)]
    pub np: Option<usize>,
    /// `sr` (10D shifted and rotated) or `30d`.
    #[arg(long)]
    pub ood: Option<OodMode>,
    #[arg(long)]
    pub no_baselines: bool,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    /// Problems for the architecture comparison; default is the training set.
    #[arg(long)]
    pub problem: Vec<BbobFunction>,
    #[arg(long, default_value_t = 5)]
    pub repetitions: usize,
    #[arg(long)]
    pub skip_policies: bool,
    #[arg(long)]
    pub skip_landscapes: bool,
    #[arg(long, default_value_t = 101)]
    pub resolution: usize,
}

fn merge(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Preset, then file, then the global flags.
pub fn resolve_config(global: &GlobalArgs) -> Result<ExperimentConfig> {
    let file: Option<toml::Value> = match &global.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Some(toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))?)
        }
        None => None,
    };
    let file_preset = file
        .as_ref()
        .and_then(|v| v.get("preset"))
        .and_then(|v| v.as_str())
        .map(str::parse::<Preset>)
        .transpose()?;
    let preset = global.preset.or(file_preset).unwrap_or_default();
    let mut value = toml::Value::try_from(ExperimentConfig::preset(preset))?;
    if let Some(f) = file {
        merge(&mut value, f);
    }
    let mut cfg: ExperimentConfig = value.try_into().context("invalid configuration")?;
    cfg.preset = preset;
    if let Some(s) = global.seed {
        cfg.seed = s;
    }
    if let Some(w) = global.workers {
        cfg.workers = w;
    }
    Ok(cfg)
}

fn ensure_free(path: &Path, force: bool) -> Result<()> {
    if path.exists() && !force {
        bail!("{} exists; pass --force to overwrite", path.display());
    }
    Ok(())
}

fn echo_config(cfg: &ExperimentConfig, out: &Path, command: &str) -> Result<()> {
    fs::create_dir_all(out)?;
    fs::write(out.join(format!("{command}.config.toml")), toml::to_string(cfg)?)?;
    Ok(())
}

fn specs(fs_: &[BbobFunction], dim: usize) -> Vec<ProblemSpec> {
    fs_.iter().map(|&f| ProblemSpec::new(f, dim)).collect()
}

fn csv_file(path: &Path) -> Result<fs::File> {
    Ok(fs::File::create(path).with_context(|| format!("creating {}", path.display()))?)
}

fn cmd_sample(cfg: &mut ExperimentConfig, g: &GlobalArgs, a: &SampleArgs) -> Result<()> {
    if let Some(d) = a.dim {
        cfg.problems.dim = d;
    }
    if let Some(n) = a.n {
        cfg.sampling.samples = n;
    }
    cfg.validate()?;
    let spec = ProblemSpec::new(a.problem, cfg.problems.dim);
    let dir = g.out.join("samples");
    let path = dir.join(format!("{spec}.csv"));
    ensure_free(&path, g.force)?;
    echo_config(cfg, &g.out, "sample")?;
    fs::create_dir_all(&dir)?;
    let mut problem = Problem::new(spec.clone())?;
    let data = build_dataset(
        &mut problem,
        cfg.sampling.samples,
        seed::derive(cfg.seed, Stream::Dataset, spec.function.id() as u64),
    )?;
    data.save(&path)?;
    eprintln!("wrote {} ({} samples)", path.display(), data.len());
    Ok(())
}

const METRICS_HEADER: [&str; 8] =
    ["problem", "arch", "samples", "true_evaluations", "final_mse", "final_oc", "order_accuracy", "params"];

fn train_surrogates(
    cfg: &ExperimentConfig,
    specs: &[ProblemSpec],
    dir: &Path,
    force: bool,
) -> Result<Vec<TrainedSurrogate>> {
    for s in specs {
        ensure_free(&dir.join(format!("{s}.json")), force)?;
    }
    fs::create_dir_all(dir)?;
    let outcomes = pipeline::run_sls(specs, &cfg.sampling, &cfg.surrogate, cfg.seed);
    let mut metrics = csv::Writer::from_writer(csv_file(&dir.join("metrics.csv"))?);
    metrics.write_record(METRICS_HEADER)?;
    let mut out = Vec::new();
    let mut failed = Vec::new();
    for o in outcomes {
        match o.result {
            Ok(s) => {
                s.save(&dir.join(format!("{}.json", o.spec)))?;
                s.save_history(&dir.join(format!("{}.history.csv", o.spec)))?;
                metrics.write_record([
                    o.spec.to_string(),
                    cfg.surrogate.arch.to_string(),
                    s.meta.samples.to_string(),
                    o.true_evaluations.to_string(),
                    s.meta.final_mse.to_string(),
                    s.meta.final_oc.to_string(),
                    s.meta.order_accuracy.map_or(String::new(), |v| v.to_string()),
                    s.model.n_params().to_string(),
                ])?;
                eprintln!("{}: order accuracy {:?}", o.spec, s.meta.order_accuracy);
                out.push(s);
            }
            Err(e) => {
                eprintln!("{}: failed: {e}", o.spec);
                failed.push(o.spec.to_string());
            }
        }
    }
    metrics.flush()?;
    if !failed.is_empty() {
        bail!("surrogate training failed on {}", failed.join(", "));
    }
    Ok(out)
}

fn cmd_train_surrogate(cfg: &mut ExperimentConfig, g: &GlobalArgs, a: &SurrogateArgs) -> Result<()> {
    if let Some(d) = a.dim {
        cfg.problems.dim = d;
    }
    if !a.problem.is_empty() {
        cfg.problems.train = a.problem.clone();
    }
    if let Some(arch) = a.arch {
        cfg.surrogate.arch = arch;
    }
    if let Some(l) = &a.loss {
        cfg.surrogate.training.loss = match l.to_ascii_lowercase().as_str() {
            "roa" => LossMode::Roa,
            "mse" => LossMode::Mse,
            other => bail!("unknown loss {other}"),
        };
    }
    if let Some(n) = a.samples {
        cfg.sampling.samples = n;
    }
    if let Some(h) = a.holdout {
        cfg.sampling.holdout = h;
    }
    if let Some(e) = a.mse_epochs {
        cfg.surrogate.training.mse_epochs = e;
    }
    if let Some(e) = a.roa_epochs {
        cfg.surrogate.training.roa_epochs = e;
    }
    cfg.validate()?;
    echo_config(cfg, &g.out, "train-surrogate")?;
    train_surrogates(cfg, &cfg.problems.train_specs(), &g.out.join("surrogates"), g.force)?;
    Ok(())
}

fn cmd_train_policy(cfg: &mut ExperimentConfig, g: &GlobalArgs, a: &PolicyArgs) -> Result<()> {
    if let Some(m) = a.evaluator {
        cfg.policy.evaluator = m;
    }
    if let Some(v) = a.max_ls {
        cfg.policy.max_ls = v;
    }
    if let Some(v) = a.max_fes {
        cfg.policy.max_fes = v;
    }
    if let Some(v) = a.np {
        cfg.policy.de.np = v;
    }
    cfg.validate()?;
    let dir = g.out.join("policy");
    let agent_path = dir.join("agent.json");
    let state_path = dir.join("state.json");
    if !a.resume {
        ensure_free(&agent_path, g.force)?;
    }
    echo_config(cfg, &g.out, "train-policy")?;
    fs::create_dir_all(&dir)?;

    let mut state = if a.resume {
        PlsState::load(&state_path).with_context(|| format!("resuming from {}", state_path.display()))?
    } else {
        PlsState::new(&cfg.policy, cfg.seed)?
    };
    let train = cfg.problems.train_specs();
    let bounds = train[0].bounds();
    let outcome = match cfg.policy.evaluator {
        EvaluatorMode::Surrogate => {
            let sdir = a.surrogates.clone().unwrap_or_else(|| g.out.join("surrogates"));
            let have_all = train.iter().all(|s| sdir.join(format!("{s}.json")).exists());
            let mut envs = if have_all {
                train
                    .iter()
                    .map(|s| TrainedSurrogate::load(&sdir.join(format!("{s}.json"))).map_err(Into::into))
                    .collect::<Result<Vec<_>>>()?
            } else {
                eprintln!("training surrogates into {}", sdir.display());
                let pool = pool(cfg.workers)?;
                pool.install(|| train_surrogates(cfg, &train, &sdir, g.force))?
            };
            pipeline::run_pls(&mut envs, bounds, &cfg.policy, &mut state, Some(&state_path), None)?
        }
        EvaluatorMode::TrueFunction => {
            let mut envs = train.iter().map(|s| Problem::new(s.clone())).collect::<crate::Result<Vec<_>>>()?;
            pipeline::run_pls(&mut envs, bounds, &cfg.policy, &mut state, Some(&state_path), None)?
        }
    };
    state.agent.save(&agent_path)?;
    state.write_log_csv(csv_file(&dir.join("train_log.csv"))?)?;
    eprintln!(
        "{} learning steps over {} episodes; true evaluations during training: {}",
        outcome.learning_steps, outcome.episodes, outcome.true_evaluations
    );
    Ok(())
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?)
}

fn write_eval(dir: &Path, records: &[pipeline::RunRecord], force: bool) -> Result<()> {
    let runs = dir.join("runs.jsonl");
    ensure_free(&runs, force)?;
    fs::create_dir_all(dir)?;
    pipeline::write_jsonl(records, csv_file(&runs)?)?;
    let summary = pipeline::summarize(records);
    pipeline::write_summary_csv(&summary, csv_file(&dir.join("summary.csv"))?)?;
    pipeline::write_ranks_csv(&pipeline::average_ranks(&summary), csv_file(&dir.join("ranks.csv"))?)?;
    pipeline::write_convergence_csv(records, csv_file(&dir.join("convergence.csv"))?)?;
    pipeline::write_timings_csv(records, csv_file(&dir.join("timings.csv"))?)?;
    for r in &summary {
        eprintln!("{:<28} {:<14} mean {:.4e} std {:.4e} rank {}", r.problem, r.method, r.mean, r.std, r.rank);
    }
    Ok(())
}

fn cmd_evaluate(cfg: &mut ExperimentConfig, g: &GlobalArgs, a: &EvaluateArgs) -> Result<()> {
    if let Some(d) = a.dim {
        cfg.problems.dim = d;
    }
    if !a.problem.is_empty() {
        cfg.problems.test = a.problem.clone();
    }
    if let Some(v) = a.runs {
        cfg.evaluation.runs = v;
    }
    if let Some(v) = a.max_fes {
        cfg.evaluation.max_fes = v;
    }
    if let Some(v) = a.np {
        cfg.policy.de.np = v;
    }
    if a.ood.is_some() {
        cfg.evaluation.ood = a.ood;
    }
    if a.no_baselines {
        cfg.evaluation.baselines = false;
    }
    cfg.validate()?;
    let dir = g.out.join("eval");
    ensure_free(&dir.join("runs.jsonl"), g.force)?;
    echo_config(cfg, &g.out, "evaluate")?;

    let agent_path = a.agent.clone().unwrap_or_else(|| g.out.join("policy").join("agent.json"));
    let agent = if agent_path.exists() {
        Some(DqnAgent::load(&agent_path)?)
    } else if a.agent.is_some() {
        bail!("agent checkpoint {} not found", agent_path.display());
    } else {
        eprintln!("no agent at {}; evaluating baselines only", agent_path.display());
        None
    };
    let mut problems = specs(&cfg.problems.test, cfg.problems.dim);
    if let Some(mode) = cfg.evaluation.ood {
        let ood_seed = seed::derive(cfg.seed, Stream::Transform, 0);
        problems = problems.iter().map(|p| apply_ood(p, mode, ood_seed)).collect::<crate::Result<_>>()?;
    }
    let mut methods = Vec::new();
    if let Some(agent) = &agent {
        methods.push(Method::Policy { name: "surr_rlde", agent });
    }
    if cfg.evaluation.baselines {
        methods.push(Method::Baseline(BaselineMethod::RandomSearch));
        methods.push(Method::Baseline(BaselineMethod::StaticDe));
    }
    if methods.is_empty() {
        bail!("nothing to evaluate: no agent and baselines disabled");
    }
    let records = pool(cfg.workers)?.install(|| {
        pipeline::run_protocol(
            &methods,
            &problems,
            cfg.evaluation.runs,
            cfg.evaluation.max_fes,
            &cfg.policy.de,
            cfg.seed,
        )
    })?;
    write_eval(&dir, &records, g.force)
}

fn cmd_ablate(cfg: &mut ExperimentConfig, g: &GlobalArgs, a: &AblateArgs) -> Result<()> {
    cfg.validate()?;
    let dir = g.out.join("ablation");
    ensure_free(&dir.join("architectures.csv"), g.force)?;
    echo_config(cfg, &g.out, "ablate")?;
    fs::create_dir_all(&dir)?;
    let mut opts = pipeline::AblationOptions::from_config(cfg);
    if !a.problem.is_empty() {
        opts.problems = specs(&a.problem, cfg.problems.dim);
    }
    opts.repetitions = a.repetitions;
    opts.policies = !a.skip_policies;
    opts.landscapes = !a.skip_landscapes;
    opts.landscape_resolution = a.resolution;
    let report = pool(cfg.workers)?.install(|| pipeline::run_ablations(cfg, &opts))?;

    let mut w = csv::Writer::from_writer(csv_file(&dir.join("architectures.csv"))?);
    for row in &report.architectures {
        w.serialize(row)?;
        eprintln!("{:<28} {:<4} mse {:.4e} order acc {:.4}", row.problem, row.arch, row.mse, row.order_accuracy);
    }
    w.flush()?;
    if let Some(l) = &report.losses {
        pipeline::write_jsonl(&l.records, csv_file(&dir.join("loss_runs.jsonl"))?)?;
        pipeline::write_summary_csv(&l.summary, csv_file(&dir.join("loss_summary.csv"))?)?;
    }
    for (name, rows) in &report.landscapes {
        crate::surrogate::write_landscape_csv(rows, csv_file(&dir.join(format!("landscape_{name}.csv")))?)?;
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    let mut cfg = resolve_config(&cli.global)?;
    let g = &cli.global;
    match &cli.command {
        Command::Sample(a) => pool(cfg.workers)?.install(|| cmd_sample(&mut cfg, g, a)),
        Command::TrainSurrogate(a) => pool(cfg.workers)?.install(|| cmd_train_surrogate(&mut cfg, g, a)),
        Command::TrainPolicy(a) => cmd_train_policy(&mut cfg, g, a),
        Command::Evaluate(a) => cmd_evaluate(&mut cfg, g, a),
        Command::Ablate(a) => cmd_ablate(&mut cfg, g, a),
    }
}
