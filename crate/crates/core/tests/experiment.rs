use lrsc::experiment::{
    csv_body, mean_std, run_experiment, run_sweep, run_trace, write_results, write_results_body, write_trace,
    DatasetKind, ExperimentConfig, SolverKind, TRACE_COLUMNS,
};

fn body(cfg: &ExperimentConfig) -> String {
    let report = run_experiment(cfg).unwrap();
    let mut out = Vec::new();
    write_results(&[report], &mut out).unwrap();
    csv_body(&String::from_utf8(out).unwrap())
}

#[test]
fn synthetic_benchmark_is_perfect() {
    let report = run_experiment(&ExperimentConfig::synthetic_benchmark()).unwrap();
    assert_eq!(report.records.len(), 10);
    assert_eq!(report.failures(), 0);
    assert_eq!(report.summary(), Some((100.0, 0.0)));
    assert!(report.records.iter().all(|r| r.outcome.as_ref().unwrap().converged));
}

#[test]
fn reruns_give_identical_bodies() {
    let cfg = ExperimentConfig::synthetic_benchmark();
    let a = body(&cfg);
    let b = body(&cfg);
    assert_eq!(a, b);
    assert!(a.starts_with("dataset,solver,params,seed,"));
    assert_eq!(a.lines().count(), 1 + 10 + 1);
}

#[test]
fn header_comments_are_the_only_nondeterministic_lines() {
    let report = run_experiment(&ExperimentConfig::synthetic_benchmark()).unwrap();
    let mut full = Vec::new();
    write_results(std::slice::from_ref(&report), &mut full).unwrap();
    let mut plain = Vec::new();
    write_results_body(&[report], &mut plain).unwrap();
    let full = String::from_utf8(full).unwrap();
    assert!(full.lines().next().unwrap().starts_with("# created "));
    assert!(full.contains("# wall-time "));
    assert_eq!(csv_body(&full), String::from_utf8(plain).unwrap());
}

#[test]
fn summary_row_matches_per_seed_rows() {
    let mut cfg = ExperimentConfig::synthetic_benchmark();
    cfg.synthetic.orthogonal = false;
    cfg.synthetic.noise_sigma = 0.3;
    cfg.run.seeds = (0..6).collect();
    let text = body(&cfg);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let per_seed: Vec<f64> = rows
        .iter()
        .filter(|r| r[3] != "summary")
        .map(|r| r[4].parse().unwrap())
        .collect();
    assert_eq!(per_seed.len(), 6);
    let summary = rows.iter().find(|r| r[3] == "summary").unwrap();
    let (mean, std) = mean_std(&per_seed).unwrap();
    // per-seed rows carry 4 decimals, so recomputation agrees to rounding
    assert!((summary[4].parse::<f64>().unwrap() - mean).abs() < 1e-4);
    assert!((summary[5].parse::<f64>().unwrap() - std).abs() < 1e-4);
    assert_eq!(summary[7], "6/6");
}

#[test]
fn too_many_clusters_fails_every_seed() {
    let mut cfg = ExperimentConfig::synthetic_benchmark();
    cfg.cluster.k = Some(41);
    cfg.run.seeds = vec![0, 1, 2];
    let report = run_experiment(&cfg).unwrap();
    assert!(report.all_failed());
    assert_eq!(report.summary(), None);
    let mut out = Vec::new();
    write_results_body(&[report], &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.matches("cluster count 41 exceeds sample count 40").count(), 3);
    assert!(text.contains("summary,,,,0/3,error: all seeds failed"));
}

#[test]
fn missing_dataset_is_a_per_seed_error() {
    let mut cfg = ExperimentConfig::default();
    cfg.dataset.root = Some("/nonexistent/lrsc".into());
    cfg.run.seeds = vec![0, 1];
    let report = run_experiment(&cfg).unwrap();
    assert!(report.all_failed());
    assert_eq!(report.dataset, "yaleb-g1");
}

#[test]
fn sweep_covers_every_solver() {
    let mut cfg = ExperimentConfig::synthetic_benchmark();
    cfg.run.seeds = vec![0, 1];
    cfg.solver.config.alpha = 100.0;
    cfg.solver.config.tau = lrsc::Tau::Finite(100.0);
    let reports = run_sweep(&cfg, &SolverKind::ALL).unwrap();
    assert_eq!(reports.len(), 9);
    for r in &reports {
        assert_eq!(r.failures(), 0, "{}: {:?}", r.solver, r.records);
        assert_eq!(r.summary().unwrap().0, 100.0, "{}", r.solver);
    }
}

#[test]
fn empty_config_reproduces_face_settings() {
    let cfg = ExperimentConfig::from_toml_str("").unwrap();
    assert_eq!(cfg.dataset.kind, DatasetKind::Yaleb);
    assert_eq!(cfg.solver.name, SolverKind::GlP5);
    assert_eq!(cfg.solver.config.tau, lrsc::Tau::Finite(0.2));
    assert_eq!(cfg.solver.config.beta, 1e-6);
    assert_eq!(cfg.solver.config.gamma, 1e-3);
    assert_eq!(cfg.graph.k, 10);
}

#[test]
fn config_file_round_trip() {
    let text = r#"
[dataset]
kind = "synthetic"

[synthetic]
ambient_dim = 20
subspace_dims = [3, 3]
points_per_subspace = [20, 20]
orthogonal = true

[solver]
name = "p5-admm"
beta = 0.1
gamma = 0.5

[graph]
k = 5

[run]
seeds = [3, 4]
"#;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.toml");
    std::fs::write(&path, text).unwrap();
    let cfg = ExperimentConfig::from_file(&path).unwrap();
    assert_eq!(cfg.solver.name, SolverKind::P5Admm);
    let warnings = cfg.ignored_parameters();
    assert!(warnings.iter().any(|w| w.starts_with("solver.gamma")), "{warnings:?}");
    assert!(warnings.iter().any(|w| w.starts_with("graph.k")), "{warnings:?}");
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.records.iter().map(|r| r.seed).collect::<Vec<_>>(), vec![3, 4]);
    assert_eq!(report.summary(), Some((100.0, 0.0)));

    assert!(ExperimentConfig::from_toml_str("[solver]\nbogus = 1\n").is_err());
    assert!(ExperimentConfig::from_toml_str("[graph]\nbogus = 1\n").is_err());
    assert!(ExperimentConfig::from_toml_str("[solver]\nname = \"p7\"\n").is_err());
}

#[test]
fn converged_trace_ends_below_tolerance() {
    let cfg = ExperimentConfig::synthetic_benchmark();
    let d = run_trace(&cfg).unwrap();
    assert!(d.converged);
    let mut out = Vec::new();
    write_trace(&d.residuals, d.converged, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], TRACE_COLUMNS);
    assert_eq!(lines.len(), 1 + d.iterations);
    let last: Vec<&str> = lines.last().unwrap().split(',').collect();
    let eps = cfg.solver.config.eps1;
    assert!(last[1].parse::<f64>().unwrap() < eps);
    assert!(last[2].parse::<f64>().unwrap() < eps);
    assert_eq!(&last[7..], &["1", "0"]);
    assert!(lines[1..lines.len() - 1].iter().all(|l| l.ends_with(",0,0")));
}

#[test]
fn exhausted_trace_has_max_iters_rows() {
    let mut cfg = ExperimentConfig::synthetic_benchmark();
    cfg.solver.config.max_iters = 7;
    let d = run_trace(&cfg).unwrap();
    assert!(!d.converged);
    let mut out = Vec::new();
    write_trace(&d.residuals, d.converged, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), 1 + 7);
    assert!(text.lines().last().unwrap().ends_with(",0,1"));
}

#[test]
fn closed_form_solvers_have_no_trace() {
    let mut cfg = ExperimentConfig::synthetic_benchmark();
    cfg.solver.name = SolverKind::P2;
    assert!(run_trace(&cfg).is_err());
}
