use metabbo::networks::Network;
use metabbo::pipeline::*;
use metabbo::problems::{BbobFunction, Problem, ProblemSpec};
use metabbo::rl::DqnConfig;
use metabbo::surrogate::{SlsConfig, TrainedSurrogate};
use proptest::prelude::*;

fn spec(f: BbobFunction, dim: usize) -> ProblemSpec {
    ProblemSpec::new(f, dim)
}

fn quick_surrogate() -> SurrogateSettings {
    SurrogateSettings {
        kan_hidden: vec![3],
        grid: 3,
        degree: 2,
        training: SlsConfig { mse_epochs: 3, roa_epochs: 3, batch_size: 20, ..SlsConfig::default() },
        ..SurrogateSettings::default()
    }
}

fn quick_sampling() -> SamplingConfig {
    SamplingConfig { samples: 60, holdout: 0.25 }
}

fn quick_policy() -> PlsConfig {
    let mut p = PlsConfig {
        max_ls: 150,
        max_fes: 200,
        checkpoint_every: 2,
        dqn: DqnConfig { hidden: vec![8], warmup: 16, batch_size: 8, buffer_capacity: 500, target_sync: 25, ..DqnConfig::default() },
        ..PlsConfig::default()
    };
    p.de.np = 10;
    p
}

fn surrogates(fs: &[BbobFunction]) -> Vec<TrainedSurrogate> {
    let specs: Vec<_> = fs.iter().map(|&f| spec(f, 2)).collect();
    run_sls(&specs, &quick_sampling(), &quick_surrogate(), 3).into_iter().map(|o| o.result.unwrap()).collect()
}

#[test]
fn sls_spends_exactly_n_evaluations_per_problem() {
    let specs = [spec(BbobFunction::Sphere, 2), spec(BbobFunction::Rastrigin, 2)];
    let out = run_sls(&specs, &quick_sampling(), &quick_surrogate(), 1);
    assert_eq!(out.len(), 2);
    for o in &out {
        assert_eq!(o.true_evaluations, 60);
        let acc = o.result.as_ref().unwrap().meta.order_accuracy.unwrap();
        assert!((0.0..=1.0).contains(&acc));
    }
}

#[test]
fn sls_failure_on_one_problem_leaves_the_rest() {
    let specs = [spec(BbobFunction::RosenbrockOriginal, 1), spec(BbobFunction::Sphere, 2)];
    let out = run_sls(&specs, &quick_sampling(), &quick_surrogate(), 1);
    assert!(out[0].result.is_err());
    assert!(out[1].result.is_ok());
}

#[test]
fn zero_learning_steps_leave_the_agent_unchanged() {
    let mut envs = surrogates(&[BbobFunction::Sphere]);
    let cfg = PlsConfig { max_ls: 0, ..quick_policy() };
    let mut state = PlsState::new(&cfg, 4).unwrap();
    let before = state.agent.online.params().to_vec();
    let out = run_pls(&mut envs, (-5.0, 5.0), &cfg, &mut state, None, None).unwrap();
    assert_eq!(out.learning_steps, 0);
    assert_eq!(out.episodes, 0);
    assert_eq!(state.agent.online.params(), &before[..]);
}

#[test]
fn surrogate_training_uses_no_true_evaluations_and_cycles_problems() {
    let mut envs = surrogates(&[BbobFunction::Sphere, BbobFunction::Ellipsoidal]);
    let cfg = quick_policy();
    let mut state = PlsState::new(&cfg, 4).unwrap();
    let out = run_pls(&mut envs, (-5.0, 5.0), &cfg, &mut state, None, None).unwrap();
    assert_eq!(out.true_evaluations, 0);
    assert_eq!(out.learning_steps, 150);
    // 20 generations per episode (19 steps after the initial one); the
    // last episode is cut short at max_ls
    assert_eq!(out.episodes, 8);
    for ep in 0..7 {
        let rows: Vec<_> = state.log.iter().filter(|r| r.episode == ep).collect();
        assert_eq!(rows.len(), 19, "episode {ep}");
        assert!(rows.iter().all(|r| r.problem == ep % 2));
    }
    assert!(state.log.iter().any(|r| r.loss.is_some()));
}

#[test]
fn true_function_mode_spends_evaluations() {
    let mut envs = vec![Problem::new(spec(BbobFunction::Sphere, 2)).unwrap()];
    let cfg = PlsConfig { evaluator: EvaluatorMode::TrueFunction, max_ls: 40, ..quick_policy() };
    let mut state = PlsState::new(&cfg, 4).unwrap();
    let out = run_pls(&mut envs, (-5.0, 5.0), &cfg, &mut state, None, None).unwrap();
    assert_eq!(out.true_evaluations, envs[0].evaluations());
    assert_eq!(envs[0].evaluations(), 3 * 10 + 40 * 10);
}

#[test]
fn resumed_training_matches_uninterrupted_training() {
    let cfg = quick_policy();
    let mut envs = surrogates(&[BbobFunction::Sphere, BbobFunction::Rastrigin]);
    let mut full = PlsState::new(&cfg, 9).unwrap();
    run_pls(&mut envs, (-5.0, 5.0), &cfg, &mut full, None, None).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("pls.json");
    let mut first = PlsState::new(&cfg, 9).unwrap();
    run_pls(&mut envs, (-5.0, 5.0), &cfg, &mut first, Some(&ck), Some(3)).unwrap();
    assert_eq!(first.episode, 3);
    let mut resumed = PlsState::load(&ck).unwrap();
    run_pls(&mut envs, (-5.0, 5.0), &cfg, &mut resumed, Some(&ck), None).unwrap();

    assert_eq!(resumed.agent.online.params(), full.agent.online.params());
    assert_eq!(resumed.agent.target.params(), full.agent.target.params());
    assert_eq!(resumed.log, full.log);
}

#[test]
fn policy_rollouts_run_on_the_true_function_within_budget() {
    let cfg = quick_policy();
    let state = PlsState::new(&cfg, 1).unwrap();
    let specs = [spec(BbobFunction::Sphere, 2)];
    let recs = evaluate_policy(&state.agent, "p", &specs, 3, 200, &cfg.de, 5).unwrap();
    assert_eq!(recs.len(), 3);
    for r in &recs {
        assert_eq!(r.fes, 200);
        assert_eq!(r.trace.len(), 20);
        assert_eq!(r.method, "p");
    }
}

#[test]
fn random_search_never_hits_the_optimum_exactly() {
    let de = metabbo::de::DeParams::default();
    let r = run_baseline(BaselineMethod::RandomSearch, &spec(BbobFunction::Sphere, 10), 20_000, &de, 0, 1).unwrap();
    assert!(r.final_best_y > 0.0);
    assert_eq!(r.fes, 20_000);
}

#[test]
fn static_de_beats_random_search_on_sphere() {
    let de = metabbo::de::DeParams::default();
    let s = spec(BbobFunction::Sphere, 10);
    let mut wins = 0;
    for run in 0..10 {
        let rs = run_baseline(BaselineMethod::RandomSearch, &s, 20_000, &de, run, 2).unwrap();
        let ds = run_baseline(BaselineMethod::StaticDe, &s, 20_000, &de, run, 2).unwrap();
        assert_eq!(ds.fes, 20_000);
        wins += (ds.final_best_y < rs.final_best_y) as usize;
    }
    assert!(wins >= 9, "{wins}/10");
}

fn record(problem: &str, method: &str, y: f64) -> RunRecord {
    RunRecord {
        method: method.into(),
        problem: problem.into(),
        dim: 2,
        run: 0,
        seed: 0,
        trace: vec![TracePoint { fes: 10, best_y: y }],
        final_best_y: y,
        fes: 10,
        wall_time: 0.0,
    }
}

#[test]
fn dominating_method_ranks_first_and_identical_runs_have_zero_std() {
    let mut recs = Vec::new();
    for _ in 0..51 {
        recs.push(record("f", "a", 1.0));
        recs.push(record("f", "b", 2.0));
        recs.push(record("f", "c", 2.0));
    }
    let rows = summarize(&recs);
    assert_eq!(rows.len(), 3);
    assert_eq!((rows[0].method.as_str(), rows[0].rank, rows[0].std), ("a", 1.0, 0.0));
    assert_eq!(rows[1].rank, 2.5);
    assert_eq!(rows[2].rank, 2.5);
    let avg = average_ranks(&rows);
    assert_eq!(avg[0], ("a".to_string(), 1.0));

    let mut csv = Vec::new();
    write_summary_csv(&rows, &mut csv).unwrap();
    assert!(String::from_utf8(csv).unwrap().starts_with("problem,method,mean,std,rank\n"));
}

#[test]
fn protocol_logs_are_byte_identical_across_reruns() {
    let cfg = quick_policy();
    let state = PlsState::new(&cfg, 1).unwrap();
    let specs = [spec(BbobFunction::Rastrigin, 2), spec(BbobFunction::Sphere, 2)];
    let methods = [
        Method::Policy { name: "p", agent: &state.agent },
        Method::Baseline(BaselineMethod::RandomSearch),
        Method::Baseline(BaselineMethod::StaticDe),
    ];
    let log = || {
        let recs = run_protocol(&methods, &specs, 4, 200, &cfg.de, 11).unwrap();
        let mut out = Vec::new();
        write_jsonl(&recs, &mut out).unwrap();
        write_convergence_csv(&recs, &mut out).unwrap();
        out
    };
    assert_eq!(log(), log());
}

#[test]
fn architecture_report_has_one_row_per_pair() {
    let problems = [spec(BbobFunction::Sphere, 2), spec(BbobFunction::Schwefel, 2)];
    let mut settings = quick_surrogate();
    settings.rbf_centers = 6;
    settings.mlp_hidden = vec![6];
    let rows = architecture_ablation(&problems, 2, &quick_sampling(), &settings, 1).unwrap();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert!((0.0..=1.0).contains(&r.order_accuracy));
        assert!((1.0..=3.0).contains(&r.order_rank));
    }
    let mut pairs: Vec<_> = rows.iter().map(|r| (r.problem.clone(), r.arch.clone())).collect();
    pairs.dedup();
    assert_eq!(pairs.len(), 6);
}

#[test]
fn landscapes_cover_both_problems_and_losses() {
    let mut settings = quick_surrogate();
    settings.training.mse_epochs = 1;
    settings.training.roa_epochs = 1;
    settings.training.batch_size = 500;
    let grids = landscape_ablation(&settings, &quick_sampling(), 5, 1).unwrap();
    let names: Vec<_> = grids.iter().map(|g| g.0.as_str()).collect();
    assert_eq!(names, ["rosenbrock_original-2d-roa", "rosenbrock_original-2d-mse", "schwefel-2d-roa", "schwefel-2d-mse"]);
    assert!(grids.iter().all(|g| g.1.len() == 25));
}

#[test]
fn presets_validate() {
    ExperimentConfig::preset(Preset::Paper).validate().unwrap();
    let desk = ExperimentConfig::preset(Preset::Desk);
    desk.validate().unwrap();
    assert_eq!(desk.problems.train.len(), 16);
    assert_eq!(desk.policy.max_ls, 50_000);
    assert_eq!(desk.policy.max_fes, 2000);
    let paper = ExperimentConfig::default();
    assert_eq!(paper.policy.dqn.target_sync, 1000);
    assert_eq!(paper.surrogate.kan_hidden, vec![10]);
    assert_eq!(paper.sampling.samples, 50_000);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn traces_are_monotone_and_budgeted(seed_ in 0u64..1000, m in 0usize..3, fid in 0usize..24) {
        let cfg = quick_policy();
        let state = PlsState::new(&cfg, seed_).unwrap();
        let method = match m {
            0 => Method::Policy { name: "p", agent: &state.agent },
            1 => Method::Baseline(BaselineMethod::RandomSearch),
            _ => Method::Baseline(BaselineMethod::StaticDe),
        };
        let s = spec(BbobFunction::ALL[fid], 3);
        let r = run_method(&method, &s, 205, &cfg.de, 0, seed_).unwrap();
        prop_assert_eq!(r.trace.len(), 20);
        prop_assert!(r.fes <= 205);
        prop_assert!(r.trace.windows(2).all(|w| w[1].best_y <= w[0].best_y));
    }
}
