//! Experiment pipeline: data → graph → solver → spectral clustering → score.
//!
//! Configuration is TOML with one section per stage:
//!
//! ```toml
//! [dataset]     # kind = "yaleb" | "mnist" | "usps" | "synthetic", root, group, split, per_class, subsample_seed
//! [synthetic]   # generator parameters when kind = "synthetic"
//! [solver]      # solver name plus SolverConfig fields
//! [graph]       # k, symmetrization
//! [cluster]     # k, restarts, kmeans_iters
//! [run]         # seeds, output, trace
//! ```
//!
//! Every key is optional; an empty file runs `gl-p5` on Yale B group 1 with
//! the face clustering settings and ten seeds.
//!
//! Result CSV columns, in order:
//! `dataset,solver,params,seed,accuracy,accuracy_std,iterations,converged,status`.
//! Each run ends with a `summary` row holding the mean and population standard
//! deviation of the successful seeds. Wall times and the creation time are
//! written as `#` comment lines above the header, so the body is a pure
//! function of the configuration.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closedform::{self, Decomposition};
use crate::datasets::{self, LabeledData, Split, Subsample, SyntheticSpec};
use crate::error::{LrscError, Result};
use crate::graph::{self, GraphModel, Symmetrization};
use crate::operators::{OperatorParams, Tau};
use crate::solvers::{self, IterationRecord, SolverConfig};
use crate::spectral::{self, SpectralOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SolverKind {
    #[serde(rename = "p1")]
    P1,
    #[serde(rename = "p2")]
    P2,
    #[serde(rename = "p3")]
    P3,
    #[serde(rename = "p4")]
    P4,
    #[serde(rename = "p5-ipt")]
    P5Ipt,
    #[serde(rename = "p5-admm")]
    P5Admm,
    #[serde(rename = "p6")]
    P6,
    #[serde(rename = "gl-p5")]
    GlP5,
    #[serde(rename = "gl-p6")]
    GlP6,
}

impl SolverKind {
    pub const ALL: [SolverKind; 9] = [
        SolverKind::P1,
        SolverKind::P2,
        SolverKind::P3,
        SolverKind::P4,
        SolverKind::P5Ipt,
        SolverKind::P5Admm,
        SolverKind::P6,
        SolverKind::GlP5,
        SolverKind::GlP6,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::P1 => "p1",
            SolverKind::P2 => "p2",
            SolverKind::P3 => "p3",
            SolverKind::P4 => "p4",
            SolverKind::P5Ipt => "p5-ipt",
            SolverKind::P5Admm => "p5-admm",
            SolverKind::P6 => "p6",
            SolverKind::GlP5 => "gl-p5",
            SolverKind::GlP6 => "gl-p6",
        }
    }

    pub fn uses_graph(self) -> bool {
        matches!(self, SolverKind::GlP5 | SolverKind::GlP6)
    }

    pub fn is_iterative(self) -> bool {
        matches!(
            self,
            SolverKind::P5Ipt | SolverKind::P5Admm | SolverKind::P6 | SolverKind::GlP5 | SolverKind::GlP6
        )
    }

    /// Solver keys this kind reads. `tau` is fixed to infinity for P6/GL-P6.
    fn used_keys(self) -> &'static [&'static str] {
        const ADMM: &[&str] = &["tau", "beta", "mu0", "rho", "mu_max", "eps1", "max_iters", "threshold_mode"];
        const HARD_ADMM: &[&str] = &["beta", "mu0", "rho", "mu_max", "eps1", "max_iters"];
        const GL: &[&str] = &[
            "tau",
            "beta",
            "gamma",
            "mu0",
            "rho",
            "mu_max",
            "eps1",
            "max_iters",
            "threshold_mode",
        ];
        const HARD_GL: &[&str] = &["beta", "gamma", "mu0", "rho", "mu_max", "eps1", "max_iters"];
        match self {
            SolverKind::P1 => &["tau"],
            SolverKind::P2 => &[],
            SolverKind::P3 => &["tau", "alpha", "threshold_mode"],
            SolverKind::P4 => &["alpha"],
            SolverKind::P5Ipt => &["tau", "alpha", "beta", "eps1", "max_iters", "threshold_mode"],
            SolverKind::P5Admm => ADMM,
            SolverKind::P6 => HARD_ADMM,
            SolverKind::GlP5 => GL,
            SolverKind::GlP6 => HARD_GL,
        }
    }

    fn effective_config(self, cfg: &SolverConfig) -> SolverConfig {
        let mut cfg = cfg.clone();
        if matches!(self, SolverKind::P6 | SolverKind::GlP6 | SolverKind::P4) {
            cfg.tau = Tau::Infinite;
        }
        cfg
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = LrscError;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.trim())
            .ok_or_else(|| {
                let names: Vec<&str> = SolverKind::ALL.iter().map(|k| k.as_str()).collect();
                LrscError::InvalidInput(format!("unknown solver {s:?} (expected one of {})", names.join("|")))
            })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    #[default]
    Yaleb,
    Mnist,
    Usps,
    Synthetic,
}

impl DatasetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DatasetKind::Yaleb => "yaleb",
            DatasetKind::Mnist => "mnist",
            DatasetKind::Usps => "usps",
            DatasetKind::Synthetic => "synthetic",
        }
    }
}

impl FromStr for DatasetKind {
    type Err = LrscError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "yaleb" => Ok(DatasetKind::Yaleb),
            "mnist" => Ok(DatasetKind::Mnist),
            "usps" => Ok(DatasetKind::Usps),
            "synthetic" => Ok(DatasetKind::Synthetic),
            _ => Err(LrscError::InvalidInput(format!(
                "unknown dataset {s:?} (expected yaleb|mnist|usps|synthetic)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub kind: DatasetKind,
    /// Dataset root; `DATASET_ROOT` when unset. Each dataset lives in a
    /// subdirectory named after its kind.
    pub root: Option<PathBuf>,
    /// Yale B subject group, 1–4.
    pub group: usize,
    pub split: Split,
    /// Samples per class for the digit datasets.
    pub per_class: usize,
    /// Random per-class selection instead of file order.
    pub subsample_seed: Option<u64>,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            kind: DatasetKind::Yaleb,
            root: None,
            group: 1,
            split: Split::Train,
            per_class: 10,
            subsample_seed: None,
        }
    }
}

/// Keys of [`SolverConfig`] accepted in the `[solver]` section.
pub const SOLVER_KEYS: [&str; 10] = [
    "tau",
    "alpha",
    "beta",
    "gamma",
    "mu0",
    "rho",
    "mu_max",
    "eps1",
    "max_iters",
    "threshold_mode",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSection {
    pub name: SolverKind,
    #[serde(flatten)]
    pub config: SolverConfig,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            name: SolverKind::GlP5,
            config: SolverConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphConfig {
    /// Neighbour count `K`.
    pub k: usize,
    pub symmetrization: Symmetrization,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            k: 10,
            symmetrization: Symmetrization::MutualMax,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterConfig {
    /// Cluster count; the number of ground-truth classes when unset.
    pub k: Option<usize>,
    pub restarts: usize,
    pub kmeans_iters: usize,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        let opts = SpectralOptions::default();
        ClusterConfig {
            k: None,
            restarts: opts.restarts,
            kmeans_iters: opts.max_iters,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Each seed drives the synthetic generator and the k-means restarts.
    pub seeds: Vec<u64>,
    pub output: Option<PathBuf>,
    pub trace: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seeds: (0..10).collect(),
            output: None,
            trace: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    pub synthetic: SyntheticSpec,
    pub solver: SolverSection,
    pub graph: GraphConfig,
    pub cluster: ClusterConfig,
    pub run: RunConfig,
    /// `section.key` names given explicitly, for the ignored-parameter check.
    #[serde(skip)]
    pub explicit: BTreeSet<String>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| LrscError::Config(e.to_string()))?;
        let table: toml::Table = toml::from_str(text).map_err(|e| LrscError::Config(e.to_string()))?;
        for (section, value) in &table {
            match value.as_table() {
                Some(inner) => {
                    for key in inner.keys() {
                        cfg.explicit.insert(format!("{section}.{key}"));
                    }
                }
                None => {
                    cfg.explicit.insert(section.clone());
                }
            }
        }
        if let Some(bad) = cfg
            .explicit
            .iter()
            .filter_map(|k| k.strip_prefix("solver."))
            .find(|k| *k != "name" && !SOLVER_KEYS.contains(k))
        {
            return Err(LrscError::Config(format!(
                "unknown solver key {bad:?} (expected name or one of {})",
                SOLVER_KEYS.join(", ")
            )));
        }
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| LrscError::io(path, e))?;
        ExperimentConfig::from_toml_str(&text)
    }

    pub fn mark_explicit(&mut self, key: &str) {
        self.explicit.insert(key.to_string());
    }

    /// Synthetic two-subspace benchmark: two orthogonal 3-dimensional
    /// subspaces in `R^20`, 20 points each, `gl-p5` with a 5-neighbour graph.
    /// `beta = 0.1` suits unit-scale data; the face value `1e-6` lets `E`
    /// absorb the whole matrix at this scale.
    pub fn synthetic_benchmark() -> Self {
        ExperimentConfig {
            dataset: DatasetConfig {
                kind: DatasetKind::Synthetic,
                ..DatasetConfig::default()
            },
            synthetic: SyntheticSpec {
                ambient_dim: 20,
                subspace_dims: vec![3, 3],
                points_per_subspace: vec![20, 20],
                orthogonal: true,
                ..SyntheticSpec::default()
            },
            solver: SolverSection {
                name: SolverKind::GlP5,
                config: SolverConfig {
                    beta: 0.1,
                    ..SolverConfig::default()
                },
            },
            graph: GraphConfig {
                k: 5,
                ..GraphConfig::default()
            },
            ..ExperimentConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.config.validate()?;
        if self.run.seeds.is_empty() {
            return Err(LrscError::Config("run.seeds is empty".into()));
        }
        if self.dataset.kind == DatasetKind::Synthetic {
            self.synthetic.validate()?;
        }
        if self.dataset.kind == DatasetKind::Yaleb {
            datasets::yaleb::group_subjects(self.dataset.group)?;
        }
        if self.solver.name.uses_graph() && self.graph.k == 0 {
            return Err(LrscError::Config("graph.k must be positive".into()));
        }
        if self.cluster.restarts == 0 {
            return Err(LrscError::Config("cluster.restarts must be positive".into()));
        }
        Ok(())
    }

    /// Explicitly set parameters the chosen solver and dataset do not read.
    pub fn ignored_parameters(&self) -> Vec<String> {
        let kind = self.solver.name;
        let mut out = Vec::new();
        for key in &self.explicit {
            let Some((section, name)) = key.split_once('.') else {
                continue;
            };
            let ignored = match section {
                "solver" => name != "name" && !kind.used_keys().contains(&name),
                "graph" => !kind.uses_graph(),
                "synthetic" => self.dataset.kind != DatasetKind::Synthetic,
                "dataset" => match name {
                    "group" => self.dataset.kind != DatasetKind::Yaleb,
                    "split" | "per_class" | "subsample_seed" => {
                        !matches!(self.dataset.kind, DatasetKind::Mnist | DatasetKind::Usps)
                    }
                    "root" => self.dataset.kind == DatasetKind::Synthetic,
                    _ => false,
                },
                _ => false,
            };
            if ignored {
                out.push(format!("{key} is ignored by {kind} on {}", self.dataset.kind.as_str()));
            }
        }
        if self.synthetic.seed != 0 && self.dataset.kind == DatasetKind::Synthetic {
            out.push("synthetic.seed is replaced by each run seed".into());
        }
        out
    }

    /// Dataset label used in the CSV, e.g. `yaleb-g3` or `mnist-train`.
    pub fn dataset_label(&self) -> String {
        match self.dataset.kind {
            DatasetKind::Yaleb => format!("yaleb-g{}", self.dataset.group),
            DatasetKind::Mnist | DatasetKind::Usps => {
                let split = match self.dataset.split {
                    Split::Train => "train",
                    Split::Test => "test",
                };
                format!("{}-{split}", self.dataset.kind.as_str())
            }
            DatasetKind::Synthetic => {
                let s = &self.synthetic;
                let dims: Vec<String> = s.subspace_dims.iter().map(|d| d.to_string()).collect();
                format!("synthetic-p{}-d{}", s.ambient_dim, dims.join("x"))
            }
        }
    }

    /// Parameters the solver actually reads, as `key=value` pairs joined by `;`.
    pub fn params_label(&self) -> String {
        let kind = self.solver.name;
        let cfg = kind.effective_config(&self.solver.config);
        let mut parts: Vec<String> = Vec::new();
        for &key in kind.used_keys() {
            let value = match key {
                "tau" => cfg.tau.to_string(),
                "alpha" => cfg.alpha.to_string(),
                "beta" => cfg.beta.to_string(),
                "gamma" => cfg.gamma.to_string(),
                "mu0" => cfg.mu0.to_string(),
                "rho" => cfg.rho.to_string(),
                "mu_max" => cfg.mu_max.to_string(),
                "eps1" => cfg.eps1.to_string(),
                "max_iters" => cfg.max_iters.to_string(),
                "threshold_mode" => cfg.threshold_mode.to_string(),
                _ => continue,
            };
            parts.push(format!("{key}={value}"));
        }
        if kind.uses_graph() {
            parts.push(format!("K={}", self.graph.k));
            parts.push(format!("sym={}", self.graph.symmetrization));
        }
        if let Some(k) = self.cluster.k {
            parts.push(format!("k={k}"));
        }
        parts.join(";")
    }

    fn resolve_root(&self) -> Result<PathBuf> {
        let base = self
            .dataset
            .root
            .clone()
            .or_else(datasets::dataset_root)
            .ok_or_else(|| {
                LrscError::Config(format!(
                    "no dataset root: set dataset.root or {}",
                    datasets::DATASET_ROOT_ENV
                ))
            })?;
        Ok(base.join(self.dataset.kind.as_str()))
    }

    /// Loads (or generates, for synthetic data with the given seed) the data.
    pub fn load_data(&self, seed: u64) -> Result<LabeledData> {
        let sub = Subsample {
            per_class: self.dataset.per_class,
            seed: self.dataset.subsample_seed,
        };
        match self.dataset.kind {
            DatasetKind::Synthetic => {
                let spec = SyntheticSpec {
                    seed,
                    ..self.synthetic.clone()
                };
                let data = datasets::generate_synthetic(&spec)?;
                Ok(LabeledData {
                    x: data.x,
                    labels: data.labels,
                })
            }
            DatasetKind::Yaleb => datasets::load_yaleb(self.resolve_root()?, self.dataset.group),
            DatasetKind::Mnist => datasets::load_mnist_subset(self.resolve_root()?, self.dataset.split, &sub),
            DatasetKind::Usps => datasets::load_usps_subset(self.resolve_root()?, self.dataset.split, &sub),
        }
    }

    pub fn build_graph(&self, data: &LabeledData) -> Result<GraphModel> {
        graph::build_graph(&data.x, self.graph.k, self.graph.symmetrization)
    }
}

/// Runs one solver on `x`. `graph` is required by the `gl-*` kinds.
pub fn solve(
    kind: SolverKind,
    x: &crate::DataMatrix,
    graph: Option<&GraphModel>,
    cfg: &SolverConfig,
) -> Result<Decomposition> {
    let cfg = kind.effective_config(cfg);
    let clean = |c| Decomposition {
        a: x.clone(),
        e: crate::DMatrix::zeros(x.nrows(), x.ncols()),
        c,
        iterations: 0,
        converged: true,
        residuals: Vec::new(),
    };
    match kind {
        SolverKind::P1 => Ok(clean(closedform::solve_p1(x, cfg.tau.value())?)),
        SolverKind::P2 => Ok(clean(closedform::solve_p2(x)?)),
        SolverKind::P3 => {
            let params = OperatorParams::new(cfg.tau, cfg.alpha, cfg.beta)?;
            closedform::solve_p3_with(x, &params, cfg.threshold_mode)
        }
        SolverKind::P4 => closedform::solve_p4(x, cfg.alpha),
        SolverKind::P5Ipt => solvers::ipt_p5(x, &cfg),
        SolverKind::P5Admm | SolverKind::P6 => solvers::admm_p5(x, &cfg),
        SolverKind::GlP5 | SolverKind::GlP6 => {
            let graph = graph.ok_or_else(|| LrscError::Config(format!("{kind} needs a graph")))?;
            solvers::gl_admm(x, graph, &cfg)
        }
    }
}

/// Outcome of one seed.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedRecord {
    pub seed: u64,
    pub outcome: std::result::Result<SeedOutcome, String>,
    /// Solve time in seconds; not part of the deterministic output.
    pub wall_time: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeedOutcome {
    pub accuracy: f64,
    pub iterations: usize,
    pub converged: bool,
    pub labels: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub dataset: String,
    pub solver: SolverKind,
    pub params: String,
    pub records: Vec<SeedRecord>,
    pub warnings: Vec<String>,
}

impl ExperimentReport {
    pub fn accuracies(&self) -> Vec<f64> {
        self.records
            .iter()
            .filter_map(|r| r.outcome.as_ref().ok().map(|o| o.accuracy))
            .collect()
    }

    /// Mean and population standard deviation of the successful seeds.
    pub fn summary(&self) -> Option<(f64, f64)> {
        mean_std(&self.accuracies())
    }

    pub fn all_failed(&self) -> bool {
        self.records.iter().all(|r| r.outcome.is_err())
    }

    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.outcome.is_err()).count()
    }
}

pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

fn run_seed(cfg: &ExperimentConfig, shared: Option<&Result<(LabeledData, Option<GraphModel>)>>, seed: u64) -> SeedRecord {
    let start = Instant::now();
    let outcome = (|| -> Result<SeedOutcome> {
        let owned;
        let (data, graph) = match shared {
            Some(Ok((d, g))) => (d, g.as_ref()),
            Some(Err(e)) => return Err(LrscError::Config(e.to_string())),
            None => {
                owned = prepare(cfg, seed)?;
                (&owned.0, owned.1.as_ref())
            }
        };
        let k = cfg.cluster.k.unwrap_or_else(|| data.class_count());
        let n = data.x.ncols();
        if k > n {
            return Err(LrscError::InvalidInput(format!("cluster count {k} exceeds sample count {n}")));
        }
        let d = solve(cfg.solver.name, &data.x, graph, &cfg.solver.config)?;
        let w = spectral::affinity_from_c(&d.c);
        let opts = SpectralOptions {
            restarts: cfg.cluster.restarts,
            max_iters: cfg.cluster.kmeans_iters,
        };
        let mut clusters = spectral::spectral_cluster_with(&w, k, seed, &opts)?;
        let accuracy = clusters.score(&data.labels)?;
        Ok(SeedOutcome {
            accuracy,
            iterations: d.iterations,
            converged: d.converged,
            labels: clusters.labels,
        })
    })();
    SeedRecord {
        seed,
        outcome: outcome.map_err(|e| e.to_string()),
        wall_time: start.elapsed().as_secs_f64(),
    }
}

fn prepare(cfg: &ExperimentConfig, seed: u64) -> Result<(LabeledData, Option<GraphModel>)> {
    let data = cfg.load_data(seed)?;
    let graph = if cfg.solver.name.uses_graph() {
        Some(cfg.build_graph(&data)?)
    } else {
        None
    };
    Ok((data, graph))
}

/// Runs every seed (in parallel) and returns the records in seed-list order.
/// Stage errors are recorded per seed; only an invalid configuration fails
/// the whole call.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    // real datasets do not depend on the seed, so load them once
    let shared = (cfg.dataset.kind != DatasetKind::Synthetic).then(|| prepare(cfg, 0));
    let records: Vec<SeedRecord> = cfg
        .run
        .seeds
        .par_iter()
        .map(|&seed| run_seed(cfg, shared.as_ref(), seed))
        .collect();
    Ok(ExperimentReport {
        dataset: cfg.dataset_label(),
        solver: cfg.solver.name,
        params: cfg.params_label(),
        records,
        warnings: cfg.ignored_parameters(),
    })
}

/// Runs the same configuration once per solver kind.
pub fn run_sweep(cfg: &ExperimentConfig, kinds: &[SolverKind]) -> Result<Vec<ExperimentReport>> {
    kinds
        .iter()
        .map(|&kind| {
            let mut c = cfg.clone();
            c.solver.name = kind;
            run_experiment(&c)
        })
        .collect()
}

pub const RESULT_COLUMNS: &str = "dataset,solver,params,seed,accuracy,accuracy_std,iterations,converged,status";

fn csv_field(s: &str) -> String {
    s.replace([',', '\n', '\r'], ";")
}

/// Writes the deterministic body: header line, per-seed rows, summary rows.
pub fn write_results_body<W: Write>(reports: &[ExperimentReport], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{RESULT_COLUMNS}")?;
    for r in reports {
        let prefix = format!("{},{},{}", csv_field(&r.dataset), r.solver, csv_field(&r.params));
        for rec in &r.records {
            match &rec.outcome {
                Ok(o) => writeln!(
                    out,
                    "{prefix},{},{:.4},,{},{},ok",
                    rec.seed, o.accuracy, o.iterations, o.converged
                )?,
                Err(e) => writeln!(out, "{prefix},{},,,,,error: {}", rec.seed, csv_field(e))?,
            }
        }
        let ok = r.records.len() - r.failures();
        match r.summary() {
            Some((mean, std)) => writeln!(
                out,
                "{prefix},summary,{mean:.4},{std:.4},,{ok}/{},ok",
                r.records.len()
            )?,
            None => writeln!(out, "{prefix},summary,,,,0/{},error: all seeds failed", r.records.len())?,
        }
    }
    Ok(())
}

/// Comment header (creation time, warnings, wall times) followed by the body.
pub fn write_results<W: Write>(reports: &[ExperimentReport], mut out: W) -> std::io::Result<()> {
    writeln!(out, "# created {}", chrono::Local::now().to_rfc3339())?;
    for r in reports {
        for w in &r.warnings {
            writeln!(out, "# warning: {w}")?;
        }
        let times: Vec<String> = r
            .records
            .iter()
            .map(|rec| format!("{}={:.3}s", rec.seed, rec.wall_time))
            .collect();
        writeln!(out, "# wall-time {} {}: {}", r.dataset, r.solver, times.join(" "))?;
    }
    write_results_body(reports, out)
}

/// Strips `#` comment lines, leaving the deterministic part of a result file.
pub fn csv_body(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}

pub const TRACE_COLUMNS: &str = "k,primal_residual,consensus_residual,delta_a,delta_e,mu1,mu2,converged,exhausted";

/// Per-iteration CSV. The two flag columns are set on the last row only:
/// `converged` when the stopping rule fired, `exhausted` when the run
/// reached `max_iters` without it.
pub fn write_trace<W: Write>(records: &[IterationRecord], converged: bool, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{TRACE_COLUMNS}")?;
    let last = records.len().saturating_sub(1);
    for (i, r) in records.iter().enumerate() {
        let (c, x) = if i == last {
            (u8::from(converged), u8::from(!converged))
        } else {
            (0, 0)
        };
        writeln!(
            out,
            "{},{:e},{:e},{:e},{:e},{:e},{:e},{c},{x}",
            r.iteration, r.primal_residual, r.consensus_residual, r.delta_a, r.delta_e, r.mu1, r.mu2
        )?;
    }
    Ok(())
}

/// Runs the configured solver once (first seed) and returns its decomposition
/// for tracing.
pub fn run_trace(cfg: &ExperimentConfig) -> Result<Decomposition> {
    cfg.validate()?;
    if !cfg.solver.name.is_iterative() {
        return Err(LrscError::Config(format!(
            "{} is closed-form and has no iterations to trace",
            cfg.solver.name
        )));
    }
    let (data, graph) = prepare(cfg, cfg.run.seeds[0])?;
    solve(cfg.solver.name, &data.x, graph.as_ref(), &cfg.solver.config)
}
