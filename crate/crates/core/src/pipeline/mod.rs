//! End-to-end orchestration: surrogate learning over the training set,
//! policy learning on the surrogates, and the evaluation protocol with
//! baselines and ablations.

mod ablation;
mod config;
mod eval;
mod pls;
mod report;
mod sls;

pub use ablation::{
    architecture_ablation, landscape_ablation, loss_ablation, run_ablations, AblationOptions, AblationReport,
    ArchitectureRow, LossAblation, ABLATION_LANDSCAPES,
};
pub use config::{
    ArchKind, EvalConfig, EvaluatorMode, ExperimentConfig, PlsConfig, Preset, ProblemSet, SamplingConfig,
    SurrogateSettings,
};
pub use eval::{
    evaluate_policy, run_baseline, run_method, run_protocol, BaselineMethod, Method, RunRecord, TracePoint,
};
pub use pls::{run_pls, PlsCheckpoint, PlsOutcome, PlsState, TrainLogRow};
pub use report::{
    average_ranks, convergence_rows, summarize, write_convergence_csv, write_jsonl, write_ranks_csv,
    write_summary_csv, write_timings_csv, ConvergenceRow, SummaryRow,
};
pub use sls::{build_network, run_sls, train_one, SlsOutcome};
